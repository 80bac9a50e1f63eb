#include "irspec/metrics.hpp"

#include <cmath>
#include <vector>

#include "irspec/numfmt.hpp"

namespace irspec {

double mse(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "mse");
  auto ad = a.data();
  auto bd = b.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < ad.size(); ++i) {
    const double d = ad[i] - bd[i];
    acc += d * d;
  }
  return acc / static_cast<double>(ad.size());
}

double psnr_from_mse(double m, double peak) {
  if (!(peak > 0.0)) throw InvalidArgument("psnr: peak must be positive");
  if (m < 1e-15) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / m);
}

double psnr(const ImageTensor& a, const ImageTensor& b, double peak) { return psnr_from_mse(mse(a, b), peak); }

std::vector<double> ssim_window(int size, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(size));
  const double c = (size - 1) / 2.0;
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - c;
    w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

namespace {

// "valid" separable filtering of one plane: output (h-n+1) x (w-n+1).
std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t h, std::size_t w,
                                 const std::vector<double>& win) {
  const std::size_t n = win.size();
  const std::size_t oh = h - n + 1;
  const std::size_t ow = w - n + 1;
  std::vector<double> tmp(h * ow);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += win[k] * plane[y * w + x + k];
      tmp[y * ow + x] = acc;
    }
  std::vector<double> out(oh * ow);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += win[k] * tmp[(y + k) * ow + x];
      out[y * ow + x] = acc;
    }
  return out;
}

double ssim_plane(const ImageTensor& a, const ImageTensor& b, const SsimParams& p) {
  const std::size_t h = a.height();
  const std::size_t w = a.width();
  const auto win = ssim_window(p.window, p.sigma);
  const auto& x = a.values();
  const auto& y = b.values();
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mu_x = filter_valid(x, h, w, win);
  const auto mu_y = filter_valid(y, h, w, win);
  const auto e_xx = filter_valid(xx, h, w, win);
  const auto e_yy = filter_valid(yy, h, w, win);
  const auto e_xy = filter_valid(xy, h, w, win);

  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
  double acc = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double var_x = e_xx[i] - mu_x[i] * mu_x[i];
    const double var_y = e_yy[i] - mu_y[i] * mu_y[i];
    const double cov = e_xy[i] - mu_x[i] * mu_y[i];
    acc += ((2.0 * mu_x[i] * mu_y[i] + c1) * (2.0 * cov + c2)) /
           ((mu_x[i] * mu_x[i] + mu_y[i] * mu_y[i] + c1) * (var_x + var_y + c2));
  }
  return acc / static_cast<double>(mu_x.size());
}

}  // namespace

double ssim(const ImageTensor& a, const ImageTensor& b, const SsimParams& params) {
  require_same_shape(a, b, "ssim");
  const auto n = static_cast<std::size_t>(params.window);
  if (a.height() < n || a.width() < n) {
    throw DegenerateSizeError("ssim: image " + a.shape_string() + " is smaller than the " +
                              std::to_string(n) + "x" + std::to_string(n) + " window");
  }
  double acc = 0.0;
  for (std::size_t c = 0; c < a.channels(); ++c) {
    acc += a.channels() == 1 ? ssim_plane(a, b, params) : ssim_plane(a.channel(c), b.channel(c), params);
  }
  return acc / static_cast<double>(a.channels());
}

MetricReport compute_metrics(const ImageTensor& reference, const ImageTensor& test, double peak) {
  MetricReport r;
  r.mse = mse(reference, test);
  r.psnr = psnr_from_mse(r.mse, peak);
  r.ssim = ssim(reference, test);
  return r;
}

std::string to_json(const MetricReport& r) {
  const std::string psnr = std::isinf(r.psnr) ? std::string("\"inf\"") : fmt17(r.psnr);
  return "{\"psnr\": " + psnr + ", \"mse\": " + fmt17(r.mse) + ", \"ssim\": " + fmt17(r.ssim) + "}";
}

}  // namespace irspec
