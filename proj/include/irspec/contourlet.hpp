#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "irspec/image.hpp"
#include "irspec/matrix.hpp"

namespace irspec {

/// Odd-length, symmetric, unit-sum 1D low-pass filter used separably along
/// both axes.
class GaussianKernel {
 public:
  /// Throws InvalidArgument unless the taps are odd in number, symmetric and
  /// sum to one within 1e-12.
  explicit GaussianKernel(std::vector<double> taps);

  /// Burt-Adelson binomial [1 4 6 4 1] / 16.
  static GaussianKernel binomial5();

  std::span<const double> taps() const noexcept { return taps_; }
  std::size_t length() const noexcept { return taps_.size(); }
  std::size_t radius() const noexcept { return taps_.size() / 2; }

  /// Bypasses validation. Only the self-check negative control uses this.
  static GaussianKernel unchecked(std::vector<double> taps);

 private:
  struct NoCheck {};
  GaussianKernel(std::vector<double> taps, NoCheck) : taps_(std::move(taps)) {}
  std::vector<double> taps_;
};

/// levels[0] is the full-resolution high-pass layer; each following layer
/// is ceil-halved. base is the low-pass residual after the last layer.
struct LaplacianPyramid {
  std::vector<ImageTensor> levels;
  ImageTensor base;
};

/// 2^order subbands of one band-pass layer. Order 0 stores the layer itself
/// (directional filtering switched off for that level).
struct DirectionalSubbands {
  unsigned order = 0;
  std::vector<ImageTensor> subbands;

  std::size_t count() const noexcept { return subbands.size(); }
};

/// Contourlet coefficients. directional and level_spec run coarse to fine.
struct ContourletCoefficients {
  ImageTensor base;
  std::vector<DirectionalSubbands> directional;
  std::vector<unsigned> level_spec;

  std::size_t subband_count() const noexcept;
  std::size_t element_count() const noexcept;
};

inline const std::vector<unsigned> kDefaultLevelSpec{3, 3, 3, 3};

/// Separable low-pass filtering followed by keeping every second row and
/// column; output is ceil(H/2) x ceil(W/2).
ImageTensor gaussian_downsample(const ImageTensor& x, const GaussianKernel& h = GaussianKernel::binomial5(),
                                BorderPolicy policy = BorderPolicy::symmetric);

/// Zero-insertion upsampling to target_height x target_width followed by
/// separable filtering with 2h per axis.
ImageTensor gaussian_expand(const ImageTensor& g, std::size_t target_height, std::size_t target_width,
                            const GaussianKernel& h = GaussianKernel::binomial5(),
                            BorderPolicy policy = BorderPolicy::symmetric);

/// x_prev - gaussian_expand(g_i) for a g_i of the decimated shape.
ImageTensor laplacian_level(const ImageTensor& x_prev, const ImageTensor& g_i,
                            const GaussianKernel& h = GaussianKernel::binomial5());

LaplacianPyramid lp_decompose(const ImageTensor& x, std::size_t levels,
                              const GaussianKernel& h = GaussianKernel::binomial5());
ImageTensor lp_reconstruct(const LaplacianPyramid& p, const GaussianKernel& h = GaussianKernel::binomial5());

/// Wedge index of every DFT bin (row-major H x W, unshifted layout) for a
/// 2^order angular partition of [0, pi). Point-reflected bins share a wedge;
/// the DC bin and bins on a boundary go to the lower index.
std::vector<std::uint16_t> dfb_wedge_map(std::size_t height, std::size_t width, unsigned order);

DirectionalSubbands dfb_decompose(const ImageTensor& layer, unsigned order);
ImageTensor dfb_reconstruct(const DirectionalSubbands& s);

ContourletCoefficients contourlet_decompose(const ImageTensor& x,
                                            const std::vector<unsigned>& level_spec = kDefaultLevelSpec,
                                            const GaussianKernel& h = GaussianKernel::binomial5());
ImageTensor contourlet_reconstruct(const ContourletCoefficients& c,
                                   const GaussianKernel& h = GaussianKernel::binomial5());

/// Gate parameters for crg_fuse: g = logistic(weight * glia + bias) per pixel.
struct GateParams {
  Matrix weight;             // C x C
  std::vector<double> bias;  // C
};

/// spatial + g (.) spectral with g = logistic(affine(glia)).
ImageTensor crg_fuse(const ImageTensor& spatial, const ImageTensor& spectral, const ImageTensor& glia,
                     const GateParams& gate);

// --- CRG1 coefficient files -------------------------------------------------

std::vector<std::uint8_t> encode_coefficients(const ContourletCoefficients& c);
ContourletCoefficients decode_coefficients(std::span<const std::uint8_t> bytes);

void write_coefficients(const ContourletCoefficients& c, const std::filesystem::path& path);
ContourletCoefficients read_coefficients(const std::filesystem::path& path);

}  // namespace irspec
