#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "irspec/error.hpp"

namespace irspec {

/// Dense H x W x C grid of doubles. Layout is row-major with the channel
/// innermost: index = (y * width + x) * channels + c.
///
/// Every stored element is finite; the constructors reject NaN/Inf.
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(std::size_t height, std::size_t width, std::size_t channels = 1, double fill = 0.0);
  ImageTensor(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data);

  /// Single-channel image from nested rows; all rows must have equal length.
  static ImageTensor from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t y, std::size_t x, std::size_t c = 0) noexcept {
    return data_[(y * width_ + x) * channels_ + c];
  }
  double operator()(std::size_t y, std::size_t x, std::size_t c = 0) const noexcept {
    return data_[(y * width_ + x) * channels_ + c];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  bool same_shape(const ImageTensor& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }
  std::string shape_string() const;

  /// Copy of channel c as a single-channel image.
  ImageTensor channel(std::size_t c) const;
  void set_channel(std::size_t c, const ImageTensor& plane);

  /// Throws InvalidArgument if any element is NaN or infinite.
  void check_finite() const;

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* what);

// Elementwise helpers used across modules.
ImageTensor operator+(const ImageTensor& a, const ImageTensor& b);
ImageTensor operator-(const ImageTensor& a, const ImageTensor& b);
ImageTensor operator*(double s, const ImageTensor& a);
double sum_of_squares(const ImageTensor& a);
double max_abs_diff(const ImageTensor& a, const ImageTensor& b);

enum class BorderPolicy {
  symmetric,  // mirror about the edge sample: [1,2,3] -> 3 2 | 1 2 3 | 2 1
  replicate,
  zero,
};

/// Maps an out-of-range coordinate back into [0, n) for the given policy.
/// Returns -1 for the zero policy when the coordinate falls outside.
std::ptrdiff_t border_index(std::ptrdiff_t i, std::ptrdiff_t n, BorderPolicy policy) noexcept;

/// Pads every side by `radius` samples. The interior is copied unchanged.
ImageTensor extend_border(const ImageTensor& image, std::ptrdiff_t radius,
                          BorderPolicy policy = BorderPolicy::symmetric);

// --- PGM (P5) interchange -------------------------------------------------

ImageTensor decode_pgm(std::span<const unsigned char> bytes);
std::vector<unsigned char> encode_pgm(const ImageTensor& image);

ImageTensor load_pgm(const std::filesystem::path& path);
void save_pgm(const ImageTensor& image, const std::filesystem::path& path);

/// Byte a value quantizes to on save: round(clamp(v, 0, 255)).
unsigned char quantize_u8(double v) noexcept;

// --- resampling -------------------------------------------------------------

/// Keys cubic convolution kernel with a = -0.5.
double keys_cubic(double t) noexcept;

/// Bicubic resize to round(H*scale) x round(W*scale). On downscale the
/// kernel is stretched by 1/scale (antialiasing); taps are renormalized to
/// sum to one and out-of-range samples use the symmetric border.
ImageTensor bicubic_resize(const ImageTensor& image, double scale);

/// Channel-to-space rearrangement: input channel (c*s*s + dy*s + dx) at
/// (y, x) lands at output (y*s + dy, x*s + dx, c).
ImageTensor pixel_shuffle(const ImageTensor& features, std::size_t upscale);

}  // namespace irspec
