#include "kspg/environment.hpp"

#include "kspg/errors.hpp"
#include "kspg/kspace.hpp"

namespace kspg::env {

KSpaceEnv::KSpaceEnv(const data::Item& item, recon::Reconstructor recon, metrics::SsimConfig ssim)
    : id_(item.id),
      truth_(item.image),
      kspace_(kspace::forward_transform(item.image)),
      recon_(std::move(recon)),
      ssim_(ssim) {
  ssim_.dynamic_range = item.dynamic_range;
  ssim_.validate();
}

Observation KSpaceEnv::evaluate(const ColumnMask& mask) const {
  Image recon = recon_.reconstruct(id_, mask, kspace::apply_mask(kspace_, mask));
  const double score = metrics::ssim(truth_, recon, ssim_);
  return {std::move(recon), score};
}

}  // namespace kspg::env
