#include "irspec/contourlet.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <string>

#include "irspec/spectral.hpp"

namespace irspec {

// --- kernel -----------------------------------------------------------------

GaussianKernel::GaussianKernel(std::vector<double> taps) : taps_(std::move(taps)) {
  if (taps_.empty() || taps_.size() % 2 == 0) {
    throw InvalidArgument("Gaussian kernel needs an odd number of taps, got " + std::to_string(taps_.size()));
  }
  const double total = std::accumulate(taps_.begin(), taps_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("Gaussian kernel taps must sum to 1");
  for (std::size_t i = 0; i < taps_.size() / 2; ++i) {
    if (taps_[i] != taps_[taps_.size() - 1 - i]) throw InvalidArgument("Gaussian kernel must be symmetric");
  }
}

GaussianKernel GaussianKernel::binomial5() {
  return GaussianKernel({1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16});
}

GaussianKernel GaussianKernel::unchecked(std::vector<double> taps) {
  return GaussianKernel(std::move(taps), NoCheck{});
}

// --- pyramid ----------------------------------------------------------------

namespace {

std::size_t half_up(std::size_t n) { return (n + 1) / 2; }

// Correlation with taps scaled by gain, along rows then columns. `step`
// keeps every step-th output sample (decimation fused into the pass).
ImageTensor filter_separable(const ImageTensor& in, std::span<const double> taps, double gain,
                             BorderPolicy policy, std::size_t step) {
  const auto h = static_cast<std::ptrdiff_t>(in.height());
  const auto w = static_cast<std::ptrdiff_t>(in.width());
  const std::size_t ch = in.channels();
  const auto r = static_cast<std::ptrdiff_t>(taps.size() / 2);
  const std::size_t out_h = (in.height() + step - 1) / step;
  const std::size_t out_w = (in.width() + step - 1) / step;

  ImageTensor tmp(in.height(), out_w, ch);
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::size_t xo = 0; xo < out_w; ++xo) {
      const auto x = static_cast<std::ptrdiff_t>(xo * step);
      for (std::size_t c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (std::ptrdiff_t k = -r; k <= r; ++k) {
          const auto sx = border_index(x + k, w, policy);
          if (sx >= 0) acc += taps[k + r] * in(y, sx, c);
        }
        tmp(y, xo, c) = gain * acc;
      }
    }
  }
  ImageTensor out(out_h, out_w, ch);
  for (std::size_t yo = 0; yo < out_h; ++yo) {
    const auto y = static_cast<std::ptrdiff_t>(yo * step);
    for (std::size_t x = 0; x < out_w; ++x) {
      for (std::size_t c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (std::ptrdiff_t k = -r; k <= r; ++k) {
          const auto sy = border_index(y + k, h, policy);
          if (sy >= 0) acc += taps[k + r] * tmp(sy, x, c);
        }
        out(yo, x, c) = gain * acc;
      }
    }
  }
  return out;
}

}  // namespace

ImageTensor gaussian_downsample(const ImageTensor& x, const GaussianKernel& h, BorderPolicy policy) {
  if (x.height() == 1 && x.width() == 1) {
    throw DegenerateSizeError("gaussian_downsample: cannot decimate a 1x1 image further");
  }
  return filter_separable(x, h.taps(), 1.0, policy, 2);
}

ImageTensor gaussian_expand(const ImageTensor& g, std::size_t target_height, std::size_t target_width,
                            const GaussianKernel& h, BorderPolicy policy) {
  if (g.height() != half_up(target_height) || g.width() != half_up(target_width)) {
    throw ShapeError("gaussian_expand: coarse layer " + g.shape_string() + " does not decimate " +
                     std::to_string(target_height) + "x" + std::to_string(target_width));
  }
  ImageTensor up(target_height, target_width, g.channels());
  for (std::size_t y = 0; y < g.height(); ++y)
    for (std::size_t x = 0; x < g.width(); ++x)
      for (std::size_t c = 0; c < g.channels(); ++c) up(2 * y, 2 * x, c) = g(y, x, c);
  return filter_separable(up, h.taps(), 2.0, policy, 1);
}

ImageTensor laplacian_level(const ImageTensor& x_prev, const ImageTensor& g_i, const GaussianKernel& h) {
  if (g_i.channels() != x_prev.channels()) throw ShapeError("laplacian_level: channel count mismatch");
  return x_prev - gaussian_expand(g_i, x_prev.height(), x_prev.width(), h);
}

LaplacianPyramid lp_decompose(const ImageTensor& x, std::size_t levels, const GaussianKernel& h) {
  if (levels >= 63 || std::min(x.height(), x.width()) < (std::size_t{1} << levels)) {
    throw DegenerateSizeError("lp_decompose: " + std::to_string(levels) + " levels need min(H, W) >= " +
                              (levels >= 63 ? std::string("2^") + std::to_string(levels)
                                            : std::to_string(std::size_t{1} << levels)) +
                              ", image is " + x.shape_string());
  }
  LaplacianPyramid p;
  ImageTensor current = x;
  for (std::size_t i = 0; i < levels; ++i) {
    ImageTensor coarse = gaussian_downsample(current, h);
    p.levels.push_back(laplacian_level(current, coarse, h));
    current = std::move(coarse);
  }
  p.base = std::move(current);
  return p;
}

ImageTensor lp_reconstruct(const LaplacianPyramid& p, const GaussianKernel& h) {
  if (p.base.empty()) throw ShapeError("lp_reconstruct: pyramid has no base");
  for (std::size_t i = 0; i < p.levels.size(); ++i) {
    const ImageTensor& coarser = i + 1 < p.levels.size() ? p.levels[i + 1] : p.base;
    const ImageTensor& finer = p.levels[i];
    if (coarser.height() != half_up(finer.height()) || coarser.width() != half_up(finer.width()) ||
        coarser.channels() != finer.channels()) {
      throw ShapeError("lp_reconstruct: level " + std::to_string(i + 1) + " (" + coarser.shape_string() +
                       ") is not the decimation of level " + std::to_string(i) + " (" + finer.shape_string() +
                       ")");
    }
  }
  ImageTensor x = p.base;
  for (std::size_t i = p.levels.size(); i-- > 0;) {
    x = p.levels[i] + gaussian_expand(x, p.levels[i].height(), p.levels[i].width(), h);
  }
  return x;
}

// --- directional filter bank -------------------------------------------------

namespace {

constexpr unsigned kMaxDirectionOrder = 15;

std::uint16_t wedge_of(std::ptrdiff_t su, std::ptrdiff_t sv, std::size_t height, std::size_t width,
                       std::size_t wedges) {
  if (su == 0 && sv == 0) return 0;
  const double fy = static_cast<double>(su) / static_cast<double>(height);
  const double fx = static_cast<double>(sv) / static_cast<double>(width);
  double theta = std::atan2(fy, fx);
  if (theta < 0.0) theta += std::numbers::pi;
  if (theta >= std::numbers::pi) theta -= std::numbers::pi;
  const double t = theta / (std::numbers::pi / static_cast<double>(wedges));
  const double b = std::round(t);
  if (std::abs(t - b) < 1e-9) {
    const auto bi = static_cast<std::size_t>(b);
    return static_cast<std::uint16_t>((bi == 0 || bi == wedges) ? 0 : bi - 1);
  }
  return static_cast<std::uint16_t>(std::min<std::size_t>(static_cast<std::size_t>(std::floor(t)), wedges - 1));
}

std::ptrdiff_t signed_freq(std::size_t k, std::size_t n) {
  return k <= n / 2 ? static_cast<std::ptrdiff_t>(k) : static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(n);
}

}  // namespace

std::vector<std::uint16_t> dfb_wedge_map(std::size_t height, std::size_t width, unsigned order) {
  if (order == 0 || order > kMaxDirectionOrder) {
    throw InvalidArgument("direction order must be in 1.." + std::to_string(kMaxDirectionOrder) + ", got " +
                          std::to_string(order));
  }
  const std::size_t wedges = std::size_t{1} << order;
  std::vector<std::uint16_t> map(height * width);
  for (std::size_t u = 0; u < height; ++u) {
    for (std::size_t v = 0; v < width; ++v) {
      // Both members of a conjugate pair are classified through the one with
      // the smaller linear index so the masks stay point-symmetric.
      const std::size_t ru = (height - u) % height;
      const std::size_t rv = (width - v) % width;
      const bool self_first = u * width + v <= ru * width + rv;
      const std::size_t cu = self_first ? u : ru;
      const std::size_t cv = self_first ? v : rv;
      map[u * width + v] = wedge_of(signed_freq(cu, height), signed_freq(cv, width), height, width, wedges);
    }
  }
  return map;
}

DirectionalSubbands dfb_decompose(const ImageTensor& layer, unsigned order) {
  if (order == 0) throw InvalidArgument("dfb_decompose: direction order must be >= 1");
  if (layer.channels() != 1) {
    throw ShapeError("dfb_decompose: single-channel layer required, got " + layer.shape_string());
  }
  const auto map = dfb_wedge_map(layer.height(), layer.width(), order);
  const Spectrum spectrum = dft2(layer);
  const std::size_t wedges = std::size_t{1} << order;

  DirectionalSubbands out;
  out.order = order;
  out.subbands.reserve(wedges);
  Spectrum masked{spectrum.height, spectrum.width, std::vector<cplx>(spectrum.bins.size()), false};
  for (std::size_t k = 0; k < wedges; ++k) {
    for (std::size_t i = 0; i < map.size(); ++i) masked.bins[i] = map[i] == k ? spectrum.bins[i] : cplx{};
    out.subbands.push_back(idft2_real(masked));
  }
  return out;
}

ImageTensor dfb_reconstruct(const DirectionalSubbands& s) {
  if (s.subbands.empty()) throw ShapeError("dfb_reconstruct: no subbands");
  if (s.subbands.size() != (std::size_t{1} << s.order)) {
    throw ShapeError("dfb_reconstruct: order " + std::to_string(s.order) + " needs " +
                     std::to_string(std::size_t{1} << s.order) + " subbands, got " +
                     std::to_string(s.subbands.size()));
  }
  ImageTensor sum = s.subbands.front();
  for (std::size_t k = 1; k < s.subbands.size(); ++k) {
    require_same_shape(sum, s.subbands[k], "dfb_reconstruct");
    auto d = sum.data();
    auto b = s.subbands[k].data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += b[i];
  }
  return sum;
}

// --- contourlet ---------------------------------------------------------------

std::size_t ContourletCoefficients::subband_count() const noexcept {
  std::size_t n = 0;
  for (const auto& d : directional) n += d.count();
  return n;
}

std::size_t ContourletCoefficients::element_count() const noexcept {
  std::size_t n = base.size();
  for (const auto& d : directional)
    for (const auto& s : d.subbands) n += s.size();
  return n;
}

ContourletCoefficients contourlet_decompose(const ImageTensor& x, const std::vector<unsigned>& level_spec,
                                            const GaussianKernel& h) {
  if (x.channels() != 1) {
    throw ShapeError("contourlet_decompose: single-channel image required, got " + x.shape_string());
  }
  const LaplacianPyramid p = lp_decompose(x, level_spec.size(), h);
  ContourletCoefficients c;
  c.base = p.base;
  c.level_spec = level_spec;
  const std::size_t levels = level_spec.size();
  for (std::size_t j = 0; j < levels; ++j) {
    const ImageTensor& layer = p.levels[levels - 1 - j];
    if (level_spec[j] == 0) {
      c.directional.push_back(DirectionalSubbands{0, {layer}});
    } else {
      c.directional.push_back(dfb_decompose(layer, level_spec[j]));
    }
  }
  return c;
}

ImageTensor contourlet_reconstruct(const ContourletCoefficients& c, const GaussianKernel& h) {
  if (c.directional.size() != c.level_spec.size()) {
    throw ShapeError("contourlet_reconstruct: " + std::to_string(c.directional.size()) +
                     " directional levels but level_spec has " + std::to_string(c.level_spec.size()));
  }
  LaplacianPyramid p;
  p.base = c.base;
  for (std::size_t j = c.directional.size(); j-- > 0;) {
    if (c.directional[j].order != c.level_spec[j]) {
      throw ShapeError("contourlet_reconstruct: level " + std::to_string(j) + " order disagrees with level_spec");
    }
    p.levels.push_back(dfb_reconstruct(c.directional[j]));
  }
  return lp_reconstruct(p, h);
}

// --- gated fusion --------------------------------------------------------------

ImageTensor crg_fuse(const ImageTensor& spatial, const ImageTensor& spectral, const ImageTensor& glia,
                     const GateParams& gate) {
  require_same_shape(spatial, spectral, "crg_fuse");
  require_same_shape(spatial, glia, "crg_fuse");
  const std::size_t ch = spatial.channels();
  if (gate.weight.rows() != ch || gate.weight.cols() != ch || gate.bias.size() != ch) {
    throw ShapeError("crg_fuse: gate parameters do not match " + std::to_string(ch) + " channels");
  }
  ImageTensor out = spatial;
  for (std::size_t y = 0; y < spatial.height(); ++y) {
    for (std::size_t x = 0; x < spatial.width(); ++x) {
      for (std::size_t o = 0; o < ch; ++o) {
        double z = gate.bias[o];
        for (std::size_t i = 0; i < ch; ++i) z += gate.weight(o, i) * glia(y, x, i);
        const double g = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
        out(y, x, o) += g * spectral(y, x, o);
      }
    }
  }
  return out;
}

// --- CRG1 files -----------------------------------------------------------------

namespace {

constexpr std::uint8_t kMagic[4] = {'C', 'R', 'G', '1'};
constexpr std::uint16_t kVersion = 1;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  void grid(const ImageTensor& g) {
    u32(static_cast<std::uint32_t>(g.height()));
    u32(static_cast<std::uint32_t>(g.width()));
    for (double v : g.data()) f64(v);
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint64_t uint(int width, const char* what) {
    need(static_cast<std::size_t>(width), what);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(uint(8, what)); }

  ImageTensor grid(const char* what) {
    const auto h = static_cast<std::size_t>(uint(4, what));
    const auto w = static_cast<std::size_t>(uint(4, what));
    if (h == 0 || w == 0) fail(std::string("zero-sized ") + what);
    if (h * w > (bytes_.size() - pos_) / 8) {
      fail(std::string("truncated ") + what + " payload (" + std::to_string(h) + "x" + std::to_string(w) + ")");
    }
    std::vector<double> data(h * w);
    for (double& v : data) v = f64(what);
    try {
      return ImageTensor(h, w, 1, std::move(data));
    } catch (const InvalidArgument&) {
      fail(std::string("non-finite value in ") + what);
    }
  }

  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t offset() const { return pos_; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError("CRG1 format error at byte offset " + std::to_string(pos_) + ": " + msg);
  }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) fail(std::string("truncated while reading ") + what);
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_coefficients(const ContourletCoefficients& c) {
  if (c.base.channels() != 1) throw UnsupportedFormat("CRG1 stores single-channel coefficients only");
  if (c.directional.size() != c.level_spec.size()) throw ShapeError("encode_coefficients: inconsistent levels");
  const ImageTensor& finest = c.directional.empty() ? c.base : c.directional.back().subbands.front();
  ByteWriter w;
  for (auto b : kMagic) w.u8(b);
  w.u16(kVersion);
  w.u32(static_cast<std::uint32_t>(finest.height()));
  w.u32(static_cast<std::uint32_t>(finest.width()));
  w.u32(static_cast<std::uint32_t>(c.level_spec.size()));
  for (unsigned d : c.level_spec) {
    if (d > 255) throw InvalidArgument("encode_coefficients: direction order does not fit in a byte");
    w.u8(static_cast<std::uint8_t>(d));
  }
  w.grid(c.base);
  for (const auto& level : c.directional)
    for (const auto& s : level.subbands) w.grid(s);
  return w.take();
}

ContourletCoefficients decode_coefficients(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  for (auto b : kMagic) {
    if (r.uint(1, "magic") != b) r.fail("bad magic, expected \"CRG1\"");
  }
  const auto version = r.uint(2, "version");
  if (version != kVersion) r.fail("unsupported version " + std::to_string(version));
  const auto height = static_cast<std::size_t>(r.uint(4, "height"));
  const auto width = static_cast<std::size_t>(r.uint(4, "width"));
  const auto levels = static_cast<std::size_t>(r.uint(4, "level count"));
  if (levels > 64) r.fail("implausible level count " + std::to_string(levels));

  ContourletCoefficients c;
  for (std::size_t i = 0; i < levels; ++i) {
    const auto d = static_cast<unsigned>(r.uint(1, "direction order"));
    if (d > kMaxDirectionOrder) r.fail("direction order " + std::to_string(d) + " out of range");
    c.level_spec.push_back(d);
  }

  // Expected grid sizes follow from the image size by ceil-halving.
  std::vector<std::pair<std::size_t, std::size_t>> dims{{height, width}};
  for (std::size_t i = 0; i < levels; ++i) dims.emplace_back(half_up(dims.back().first), half_up(dims.back().second));

  c.base = r.grid("base");
  if (c.base.height() != dims.back().first || c.base.width() != dims.back().second) {
    r.fail("base is " + c.base.shape_string() + ", inconsistent with a " + std::to_string(height) + "x" +
           std::to_string(width) + " image at " + std::to_string(levels) + " levels");
  }
  for (std::size_t j = 0; j < levels; ++j) {
    const auto [eh, ew] = dims[levels - 1 - j];
    DirectionalSubbands level;
    level.order = c.level_spec[j];
    const std::size_t count = std::size_t{1} << level.order;
    for (std::size_t k = 0; k < count; ++k) {
      ImageTensor s = r.grid("subband");
      if (s.height() != eh || s.width() != ew) {
        r.fail("subband at level " + std::to_string(j) + " is " + s.shape_string() + ", expected " +
               std::to_string(eh) + "x" + std::to_string(ew));
      }
      level.subbands.push_back(std::move(s));
    }
    c.directional.push_back(std::move(level));
  }
  if (!r.at_end()) r.fail("trailing bytes after last subband");
  return c;
}

void write_coefficients(const ContourletCoefficients& c, const std::filesystem::path& path) {
  const auto bytes = encode_coefficients(c);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

ContourletCoefficients read_coefficients(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_coefficients(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace irspec
