#include "irspec/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace irspec {

ImageTensor::ImageTensor(std::size_t height, std::size_t width, std::size_t channels, double fill)
    : height_(height), width_(width), channels_(channels), data_(height * width * channels, fill) {
  if (height == 0 || width == 0 || channels == 0) {
    throw ShapeError("image dimensions must be positive, got " + shape_string());
  }
  if (!std::isfinite(fill)) throw InvalidArgument("image fill value must be finite");
}

ImageTensor::ImageTensor(std::size_t height, std::size_t width, std::size_t channels,
                         std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (height == 0 || width == 0 || channels == 0) {
    throw ShapeError("image dimensions must be positive, got " + shape_string());
  }
  if (data_.size() != height * width * channels) {
    throw ShapeError("image data holds " + std::to_string(data_.size()) + " elements, expected " +
                     std::to_string(height * width * channels));
  }
  check_finite();
}

ImageTensor ImageTensor::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) throw ShapeError("from_rows: empty image");
  const std::size_t w = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * w);
  for (const auto& r : rows) {
    if (r.size() != w) throw ShapeError("from_rows: ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return ImageTensor(rows.size(), w, 1, std::move(data));
}

std::string ImageTensor::shape_string() const {
  std::ostringstream os;
  os << height_ << "x" << width_ << "x" << channels_;
  return os.str();
}

ImageTensor ImageTensor::channel(std::size_t c) const {
  if (c >= channels_) throw ShapeError("channel index out of range");
  ImageTensor out(height_, width_, 1);
  for (std::size_t i = 0; i < height_ * width_; ++i) out.data_[i] = data_[i * channels_ + c];
  return out;
}

void ImageTensor::set_channel(std::size_t c, const ImageTensor& plane) {
  if (c >= channels_ || plane.height_ != height_ || plane.width_ != width_ || plane.channels_ != 1) {
    throw ShapeError("set_channel: plane " + plane.shape_string() + " does not fit " + shape_string());
  }
  for (std::size_t i = 0; i < height_ * width_; ++i) data_[i * channels_ + c] = plane.data_[i];
}

void ImageTensor::check_finite() const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw InvalidArgument("non-finite value at element " + std::to_string(i));
    }
  }
}

void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
  }
}

ImageTensor operator+(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "add");
  ImageTensor out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
  return out;
}

ImageTensor operator-(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "subtract");
  ImageTensor out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bd[i];
  return out;
}

ImageTensor operator*(double s, const ImageTensor& a) {
  ImageTensor out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

double sum_of_squares(const ImageTensor& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v * v;
  return acc;
}

double max_abs_diff(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < ad.size(); ++i) m = std::max(m, std::abs(ad[i] - bd[i]));
  return m;
}

std::ptrdiff_t border_index(std::ptrdiff_t i, std::ptrdiff_t n, BorderPolicy policy) noexcept {
  if (i >= 0 && i < n) return i;
  switch (policy) {
    case BorderPolicy::zero:
      return -1;
    case BorderPolicy::replicate:
      return i < 0 ? 0 : n - 1;
    case BorderPolicy::symmetric: {
      if (n == 1) return 0;
      const std::ptrdiff_t period = 2 * (n - 1);
      std::ptrdiff_t r = i % period;
      if (r < 0) r += period;
      return r < n ? r : period - r;
    }
  }
  return -1;
}

ImageTensor extend_border(const ImageTensor& image, std::ptrdiff_t radius, BorderPolicy policy) {
  if (radius < 0) throw InvalidArgument("extend_border: radius must be >= 0");
  const auto h = static_cast<std::ptrdiff_t>(image.height());
  const auto w = static_cast<std::ptrdiff_t>(image.width());
  const std::size_t ch = image.channels();
  ImageTensor out(image.height() + 2 * radius, image.width() + 2 * radius, ch);
  for (std::ptrdiff_t y = -radius; y < h + radius; ++y) {
    const std::ptrdiff_t sy = border_index(y, h, policy);
    for (std::ptrdiff_t x = -radius; x < w + radius; ++x) {
      const std::ptrdiff_t sx = border_index(x, w, policy);
      if (sy < 0 || sx < 0) continue;
      for (std::size_t c = 0; c < ch; ++c) {
        out(y + radius, x + radius, c) = image(sy, sx, c);
      }
    }
  }
  return out;
}

// --- PGM -------------------------------------------------------------------

namespace {

class PgmHeaderReader {
 public:
  explicit PgmHeaderReader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  void expect_magic() {
    if (bytes_.size() < 2 || bytes_[0] != 'P' || bytes_[1] != '5') {
      fail("expected magic 'P5'");
    }
    pos_ = 2;
  }

  unsigned long read_number(const char* field) {
    skip_whitespace_and_comments();
    const std::size_t start = pos_;
    unsigned long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000UL) fail(std::string("value too large for ") + field);
      ++pos_;
    }
    if (pos_ == start) fail(std::string("expected decimal ") + field);
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void expect_single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      fail("expected whitespace after maxval");
    }
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("PGM parse error at byte offset " + std::to_string(pos_) + ": " + msg);
  }

 private:
  void skip_whitespace_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

ImageTensor decode_pgm(std::span<const unsigned char> bytes) {
  PgmHeaderReader reader(bytes);
  reader.expect_magic();
  const unsigned long width = reader.read_number("width");
  const unsigned long height = reader.read_number("height");
  const std::size_t maxval_offset = reader.offset();
  const unsigned long maxval = reader.read_number("maxval");
  if (width == 0 || height == 0) reader.fail("zero image dimension");
  if (maxval == 0) reader.fail("maxval must be positive");
  if (maxval > 255) {
    throw UnsupportedFormat("PGM maxval " + std::to_string(maxval) + " at byte offset " +
                            std::to_string(maxval_offset) + " exceeds 255 (16-bit PGM unsupported)");
  }
  reader.expect_single_whitespace();
  const std::size_t start = reader.offset();
  const std::size_t need = static_cast<std::size_t>(width) * height;
  if (bytes.size() - start < need) {
    throw ParseError("PGM parse error at byte offset " + std::to_string(bytes.size()) +
                     ": truncated pixel payload, expected " + std::to_string(need) + " bytes, found " +
                     std::to_string(bytes.size() - start));
  }
  std::vector<double> data(need);
  for (std::size_t i = 0; i < need; ++i) data[i] = bytes[start + i];
  return ImageTensor(height, width, 1, std::move(data));
}

unsigned char quantize_u8(double v) noexcept {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 255.0)));
}

std::vector<unsigned char> encode_pgm(const ImageTensor& image) {
  if (image.channels() != 1) {
    throw UnsupportedFormat("PGM output requires a single channel, got " + image.shape_string());
  }
  const std::string header =
      "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(header.size() + image.size());
  for (double v : image.data()) out.push_back(quantize_u8(v));
  return out;
}

ImageTensor load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_pgm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_pgm(const ImageTensor& image, const std::filesystem::path& path) {
  const auto bytes = encode_pgm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

// --- resampling --------------------------------------------------------------

double keys_cubic(double t) noexcept {
  constexpr double a = -0.5;
  const double x = std::abs(t);
  if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

namespace {

struct Taps {
  std::ptrdiff_t first = 0;
  std::vector<double> weights;
};

// One row of the resampling matrix per output sample.
std::vector<Taps> resample_taps(std::size_t out_len, double scale) {
  const double stretch = std::min(scale, 1.0);
  const double support = 2.0 / stretch;
  std::vector<Taps> rows(out_len);
  for (std::size_t o = 0; o < out_len; ++o) {
    const double center = (static_cast<double>(o) + 0.5) / scale - 0.5;
    const auto lo = static_cast<std::ptrdiff_t>(std::floor(center - support));
    const auto hi = static_cast<std::ptrdiff_t>(std::ceil(center + support));
    Taps& t = rows[o];
    t.first = lo;
    double total = 0.0;
    for (std::ptrdiff_t i = lo; i <= hi; ++i) {
      const double w = keys_cubic((center - static_cast<double>(i)) * stretch);
      t.weights.push_back(w);
      total += w;
    }
    for (double& w : t.weights) w /= total;
  }
  return rows;
}

}  // namespace

ImageTensor bicubic_resize(const ImageTensor& image, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("bicubic_resize: scale must be positive");
  const auto out_h = static_cast<std::size_t>(std::llround(static_cast<double>(image.height()) * scale));
  const auto out_w = static_cast<std::size_t>(std::llround(static_cast<double>(image.width()) * scale));
  if (out_h == 0 || out_w == 0) {
    throw InvalidArgument("bicubic_resize: scale " + std::to_string(scale) + " gives an empty output for " +
                          image.shape_string());
  }
  const auto h = static_cast<std::ptrdiff_t>(image.height());
  const auto w = static_cast<std::ptrdiff_t>(image.width());
  const std::size_t ch = image.channels();

  const auto col_taps = resample_taps(out_w, scale);
  ImageTensor horiz(image.height(), out_w, ch);
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      const Taps& t = col_taps[ox];
      for (std::size_t c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < t.weights.size(); ++k) {
          const auto sx = border_index(t.first + static_cast<std::ptrdiff_t>(k), w, BorderPolicy::symmetric);
          acc += t.weights[k] * image(y, sx, c);
        }
        horiz(y, ox, c) = acc;
      }
    }
  }

  const auto row_taps = resample_taps(out_h, scale);
  ImageTensor out(out_h, out_w, ch);
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    const Taps& t = row_taps[oy];
    for (std::size_t x = 0; x < out_w; ++x) {
      for (std::size_t c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < t.weights.size(); ++k) {
          const auto sy = border_index(t.first + static_cast<std::ptrdiff_t>(k), h, BorderPolicy::symmetric);
          acc += t.weights[k] * horiz(sy, x, c);
        }
        out(oy, x, c) = acc;
      }
    }
  }
  return out;
}

ImageTensor pixel_shuffle(const ImageTensor& features, std::size_t upscale) {
  if (upscale == 0) throw InvalidArgument("pixel_shuffle: upscale must be positive");
  const std::size_t s2 = upscale * upscale;
  if (features.channels() % s2 != 0) {
    throw ShapeError("pixel_shuffle: " + std::to_string(features.channels()) +
                     " channels not divisible by " + std::to_string(s2));
  }
  const std::size_t c_out = features.channels() / s2;
  ImageTensor out(features.height() * upscale, features.width() * upscale, c_out);
  for (std::size_t y = 0; y < features.height(); ++y) {
    for (std::size_t x = 0; x < features.width(); ++x) {
      for (std::size_t c = 0; c < c_out; ++c) {
        for (std::size_t dy = 0; dy < upscale; ++dy) {
          for (std::size_t dx = 0; dx < upscale; ++dx) {
            out(y * upscale + dy, x * upscale + dx, c) = features(y, x, c * s2 + dy * upscale + dx);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace irspec
