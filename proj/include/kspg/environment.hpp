#pragma once

#include <functional>
#include <string>

#include "kspg/datagen.hpp"
#include "kspg/image.hpp"
#include "kspg/metrics.hpp"
#include "kspg/recon.hpp"

namespace kspg::env {

/// What the policy sees for a mask, and the quality score eta of that state.
struct Observation {
  Image image;
  double score = 0.0;
};

/// A single ground-truth item under acquisition. Both the observation and the
/// score are pure functions of the mask.
class AcquisitionEnv {
 public:
  virtual ~AcquisitionEnv() = default;
  virtual int width() const = 0;
  virtual Observation evaluate(const ColumnMask& mask) const = 0;
};

/// Simulated Cartesian acquisition: reconstruct from masked ground-truth
/// k-space, score by SSIM against the ground truth.
class KSpaceEnv final : public AcquisitionEnv {
 public:
  /// The SSIM dynamic range is taken from the item.
  KSpaceEnv(const data::Item& item, recon::Reconstructor recon, metrics::SsimConfig ssim);

  int width() const override { return truth_.width(); }
  Observation evaluate(const ColumnMask& mask) const override;

  const std::string& id() const { return id_; }
  const Image& truth() const { return truth_; }
  const KSpaceGrid& kspace() const { return kspace_; }

 private:
  std::string id_;
  Image truth_;
  KSpaceGrid kspace_;
  recon::Reconstructor recon_;
  metrics::SsimConfig ssim_;
};

/// Fixed observation with an arbitrary score function of the mask. Used for
/// small enumerable problems and hand-built reward tables.
class ScoredMaskEnv final : public AcquisitionEnv {
 public:
  using ScoreFn = std::function<double(const ColumnMask&)>;

  ScoredMaskEnv(Image observation, int width, ScoreFn score)
      : observation_(std::move(observation)), width_(width), score_(std::move(score)) {}

  int width() const override { return width_; }
  Observation evaluate(const ColumnMask& mask) const override { return {observation_, score_(mask)}; }

 private:
  Image observation_;
  int width_;
  ScoreFn score_;
};

}  // namespace kspg::env
