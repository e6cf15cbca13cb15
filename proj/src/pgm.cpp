#include "kspg/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "kspg/errors.hpp"

namespace kspg::pgm {

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::vector<unsigned char>& bytes, std::size_t& pos,
                       const std::filesystem::path& path) {
  while (pos < bytes.size()) {
    if (std::isspace(bytes[pos])) {
      ++pos;
    } else if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(static_cast<char>(bytes[pos++]));
  if (tok.empty()) throw ParseError(path.string() + ": truncated PGM header");
  return tok;
}

int parse_positive(const std::string& tok, const char* what, const std::filesystem::path& path) {
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw ParseError(path.string() + ": bad PGM " + what + " '" + tok + "'");
  }
  const long v = std::stol(tok);
  if (v <= 0 || v > 1 << 20) throw ParseError(path.string() + ": PGM " + what + " out of range");
  return static_cast<int>(v);
}

}  // namespace

Image read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  if (next_token(bytes, pos, path) != "P5") throw ParseError(path.string() + ": not a binary PGM (P5)");
  const int width = parse_positive(next_token(bytes, pos, path), "width", path);
  const int height = parse_positive(next_token(bytes, pos, path), "height", path);
  const int maxval = parse_positive(next_token(bytes, pos, path), "maxval", path);
  if (maxval > 65535) throw ParseError(path.string() + ": maxval exceeds 65535");
  ++pos;  // single whitespace byte after maxval
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (bytes.size() < pos + n * bytes_per) throw ParseError(path.string() + ": truncated PGM raster");
  std::vector<double> pixels(n);
  for (std::size_t i = 0; i < n; ++i) {
    unsigned v = bytes[pos + i * bytes_per];
    if (bytes_per == 2) v = (v << 8) | bytes[pos + i * 2 + 1];
    if (v > static_cast<unsigned>(maxval)) throw ParseError(path.string() + ": sample exceeds maxval");
    pixels[i] = static_cast<double>(v) / maxval;
  }
  return Image(height, width, std::move(pixels));
}

void write(const Image& image, const std::filesystem::path& path, double dynamic_range) {
  if (!(dynamic_range > 0)) throw InvalidArgument("dynamic range must be positive");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<unsigned char> raster(image.size());
  auto px = image.pixels();
  for (std::size_t i = 0; i < raster.size(); ++i) {
    const double v = std::clamp(px[i] / dynamic_range, 0.0, 1.0);
    raster[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace kspg::pgm
