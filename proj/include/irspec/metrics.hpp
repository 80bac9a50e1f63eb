#pragma once

#include <limits>
#include <string>
#include <vector>

#include "irspec/image.hpp"

namespace irspec {

struct MetricReport {
  double psnr = std::numeric_limits<double>::infinity();  // dB, +inf when mse is ~0
  double mse = 0.0;
  double ssim = 1.0;
};

inline constexpr double kDefaultPeak = 255.0;

double mse(const ImageTensor& a, const ImageTensor& b);

/// 10 log10(peak^2 / mse); +infinity when mse < 1e-15.
double psnr(const ImageTensor& a, const ImageTensor& b, double peak = kDefaultPeak);
double psnr_from_mse(double mse, double peak = kDefaultPeak);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
};

/// Mean SSIM over all fully-contained 11x11 Gaussian windows (sigma 1.5),
/// averaged across channels.
double ssim(const ImageTensor& a, const ImageTensor& b, const SsimParams& params = {});

/// Normalized 1D Gaussian window used by ssim.
std::vector<double> ssim_window(int size, double sigma);

MetricReport compute_metrics(const ImageTensor& reference, const ImageTensor& test, double peak = kDefaultPeak);

/// {"psnr": <number|"inf">, "mse": <number>, "ssim": <number>}
std::string to_json(const MetricReport& r);

}  // namespace irspec
