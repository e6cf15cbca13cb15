#include "kspg/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "kspg/errors.hpp"

namespace kspg::policy {

namespace {

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const std::string& s) { out.insert(out.end(), s.begin(), s.end()); }
  std::vector<char> out;

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
};

class Reader {
 public:
  Reader(std::vector<char> data, std::string name) : data_(std::move(data)), name_(std::move(name)) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) {
    if (pos_ + n > data_.size()) throw ParseError(name_ + ": truncated checkpoint");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::vector<char> data_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const PolicyNetwork& net,
                     const OptimizerState& st) {
  const std::size_t n = net.parameter_count();
  if (st.first_moment.size() != n || st.second_moment.size() != n) {
    throw InvalidArgument("optimizer moments do not match the network");
  }
  Writer w;
  w.bytes("KGPN");
  w.u32(kCheckpointVersion);
  const std::string desc = net.architecture().descriptor();
  w.u32(static_cast<std::uint32_t>(desc.size()));
  w.bytes(desc);
  w.u64(n);
  for (double v : net.parameters()) w.f64(v);
  for (double v : st.first_moment) w.f64(v);
  for (double v : st.second_moment) w.f64(v);
  w.u64(static_cast<std::uint64_t>(st.step_count));
  w.f64(st.learning_rate);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(w.out.data(), static_cast<std::streamsize>(w.out.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(std::move(data), path.string());
  if (r.bytes(4) != "KGPN") throw ParseError(path.string() + ": bad checkpoint magic");
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw ParseError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto desc_len = r.u32();
  if (desc_len > 1u << 16) throw ParseError(path.string() + ": layer descriptor too long");
  Architecture arch = Architecture::parse(r.bytes(desc_len));
  const auto n = r.u64();
  if (n != arch.parameter_count()) throw ParseError(path.string() + ": parameter count mismatch");
  std::vector<double> params(n);
  for (auto& v : params) v = r.f64();
  OptimizerState st(n, 0.0);
  for (auto& v : st.first_moment) v = r.f64();
  for (auto& v : st.second_moment) v = r.f64();
  st.step_count = static_cast<std::int64_t>(r.u64());
  st.learning_rate = r.f64();
  if (!r.at_end()) throw ParseError(path.string() + ": trailing bytes in checkpoint");
  return {PolicyNetwork(std::move(arch), std::move(params)), std::move(st)};
}

}  // namespace kspg::policy
