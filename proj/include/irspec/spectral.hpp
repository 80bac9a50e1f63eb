#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "irspec/image.hpp"

namespace irspec {

using cplx = std::complex<double>;

/// Complex H x W frequency grid, row-major. `shifted` records whether the
/// zero frequency has been moved to the centre.
struct Spectrum {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<cplx> bins;
  bool shifted = false;

  cplx& at(std::size_t u, std::size_t v) { return bins[u * width + v]; }
  const cplx& at(std::size_t u, std::size_t v) const { return bins[u * width + v]; }
};

struct MagnitudeSpectrum {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> grid;
  bool shifted = false;
  bool normalized = false;
};

struct RadialHistogram {
  std::vector<double> bin_edges;  // nbins + 1 edges, 0 .. sqrt(2)/2 cycles/pixel
  std::vector<std::size_t> counts;
  std::vector<double> mean_log_magnitude;

  std::size_t bins() const noexcept { return counts.size(); }
};

/// F(u,v) = sum_x sum_y I(x,y) e^{-i2pi ux/H} e^{-i2pi vy/W}, x the row index.
Spectrum dft2(const ImageTensor& image);

/// Inverse of dft2 (includes the 1/(H W) factor); returns the complex field.
std::vector<cplx> idft2(const Spectrum& s);

/// Real part of idft2 as an image.
ImageTensor idft2_real(const Spectrum& s);

/// Moves bin (u, v) to ((u + H/2) mod H, (v + W/2) mod W).
Spectrum fftshift(const Spectrum& s);
/// Exact inverse of fftshift for any (including odd) dimensions.
Spectrum ifftshift(const Spectrum& s);

/// ln(1 + |F|).
MagnitudeSpectrum log_magnitude(const Spectrum& s);

inline constexpr double kNormalizeEpsilon = 1e-12;

/// (x - mean) / (population std + 1e-12); a constant grid maps to zeros.
MagnitudeSpectrum normalize_spectrum(const MagnitudeSpectrum& m);

/// dft2 -> fftshift -> log_magnitude -> normalize_spectrum.
MagnitudeSpectrum normalized_log_spectrum(const ImageTensor& image);

/// Mean over bins of (M_hr^norm - M_sr^norm)^2.
double spectral_fidelity_loss(const ImageTensor& hr, const ImageTensor& sr);

/// d spectral_fidelity_loss / d sr, same shape as sr.
ImageTensor spectral_fidelity_grad(const ImageTensor& hr, const ImageTensor& sr);

inline constexpr std::size_t kDefaultRadialBins = 64;

/// Radial aggregation of the shifted log-magnitude spectrum over normalized
/// radius sqrt((u/H)^2 + (v/W)^2) in [0, sqrt(2)/2].
RadialHistogram radial_spectrum(const ImageTensor& image, std::size_t nbins = kDefaultRadialBins);

/// Header `radius_lo,radius_hi,count,mean_log_mag`, %.17g numbers.
void write_radial_csv(std::ostream& os, const RadialHistogram& h);

}  // namespace irspec
