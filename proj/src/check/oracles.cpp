#include "irspec/check/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace irspec::check {

ImageTensor random_image(Rng& rng, std::size_t height, std::size_t width, std::size_t channels, double lo,
                         double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  ImageTensor img(height, width, channels);
  for (double& v : img.data()) v = dist(rng);
  return img;
}

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
  std::normal_distribution<double> gauss(0.0, scale / std::sqrt(static_cast<double>(cols)));
  Matrix m(rows, cols);
  for (double& v : m.data()) v = gauss(rng);
  return m;
}

Spectrum naive_dft2(const ImageTensor& image) {
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  Spectrum s{h, w, std::vector<cplx>(h * w), false};
  for (std::size_t u = 0; u < h; ++u) {
    for (std::size_t v = 0; v < w; ++v) {
      cplx acc{};
      for (std::size_t x = 0; x < h; ++x) {
        for (std::size_t y = 0; y < w; ++y) {
          // Reduce the phase index first so the angle stays in [0, 2 pi).
          const double phase = 2.0 * std::numbers::pi *
                               (static_cast<double>((u * x) % h) / static_cast<double>(h) +
                                static_cast<double>((v * y) % w) / static_cast<double>(w));
          acc += image(x, y) * cplx(std::cos(phase), -std::sin(phase));
        }
      }
      s.bins[u * w + v] = acc;
    }
  }
  return s;
}

namespace {

std::vector<double> naive_normalized_spectrum(const ImageTensor& img) {
  const Spectrum f = naive_dft2(img);
  const std::size_t h = f.height;
  const std::size_t w = f.width;
  std::vector<double> m(h * w);
  for (std::size_t u = 0; u < h; ++u)
    for (std::size_t v = 0; v < w; ++v) {
      const std::size_t su = (u + h / 2) % h;
      const std::size_t sv = (v + w / 2) % w;
      m[su * w + sv] = std::log(1.0 + std::abs(f.bins[u * w + v]));
    }
  const double n = static_cast<double>(m.size());
  double mean = 0.0;
  for (double v : m) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : m) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  if (sd == 0.0) return std::vector<double>(m.size(), 0.0);
  for (double& v : m) v = (v - mean) / (sd + 1e-12);
  return m;
}

}  // namespace

double naive_spectral_fidelity_loss(const ImageTensor& hr, const ImageTensor& sr) {
  const auto a = naive_normalized_spectrum(hr);
  const auto b = naive_normalized_spectrum(sr);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

ImageTensor finite_difference_grad(const std::function<double(const ImageTensor&)>& f, const ImageTensor& x,
                                   double step) {
  ImageTensor g(x.height(), x.width(), x.channels());
  ImageTensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + step;
    const double fp = f(probe);
    probe.data()[i] = orig - step;
    const double fm = f(probe);
    probe.data()[i] = orig;
    g.data()[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

ImageTensor dense_correlate(const ImageTensor& in, const std::vector<std::vector<double>>& kernel) {
  const auto h = static_cast<std::ptrdiff_t>(in.height());
  const auto w = static_cast<std::ptrdiff_t>(in.width());
  const auto r = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  auto reflect = [](std::ptrdiff_t i, std::ptrdiff_t n) {
    if (n == 1) return std::ptrdiff_t{0};
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
    return i;
  };
  ImageTensor out(in.height(), in.width(), in.channels());
  for (std::ptrdiff_t y = 0; y < h; ++y)
    for (std::ptrdiff_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < in.channels(); ++c) {
        double acc = 0.0;
        for (std::ptrdiff_t i = -r; i <= r; ++i)
          for (std::ptrdiff_t j = -r; j <= r; ++j)
            acc += kernel[i + r][j + r] * in(reflect(y + i, h), reflect(x + j, w), c);
        out(y, x, c) = acc;
      }
  return out;
}

std::vector<std::vector<double>> outer(std::span<const double> a, std::span<const double> b, double gain) {
  std::vector<std::vector<double>> k(a.size(), std::vector<double>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) k[i][j] = gain * a[i] * b[j];
  return k;
}

attention::FeatureMap naive_sab(const attention::FeatureMap& x, const attention::AttentionParams& p) {
  const std::size_t ch = x.channels();
  const std::size_t k = p.window;
  const std::size_t dh = ch / p.heads;
  attention::FeatureMap concat(x.height(), x.width(), ch);
  auto lin = [&](const Matrix& wgt, std::size_t y, std::size_t xx, std::size_t o) {
    double acc = 0.0;
    for (std::size_t i = 0; i < ch; ++i) acc += wgt(o, i) * x(y, xx, i);
    return acc;
  };
  for (std::size_t wy = 0; wy < x.height(); wy += k)
    for (std::size_t wx = 0; wx < x.width(); wx += k)
      for (std::size_t head = 0; head < p.heads; ++head)
        for (std::size_t qi = 0; qi < k * k; ++qi) {
          const std::size_t qy = wy + qi / k, qx = wx + qi % k;
          std::vector<double> scores(k * k);
          for (std::size_t kj = 0; kj < k * k; ++kj) {
            const std::size_t ky = wy + kj / k, kx = wx + kj % k;
            double dot = 0.0;
            for (std::size_t c = head * dh; c < (head + 1) * dh; ++c)
              dot += lin(p.q_proj, qy, qx, c) * lin(p.k_proj, ky, kx, c);
            scores[kj] = dot / std::sqrt(static_cast<double>(dh));
          }
          const double mx = *std::max_element(scores.begin(), scores.end());
          double z = 0.0;
          for (double& s : scores) z += (s = std::exp(s - mx));
          for (std::size_t c = head * dh; c < (head + 1) * dh; ++c) {
            double acc = 0.0;
            for (std::size_t kj = 0; kj < k * k; ++kj)
              acc += scores[kj] / z * lin(p.v_proj, wy + kj / k, wx + kj % k, c);
            concat(qy, qx, c) = acc;
          }
        }
  attention::FeatureMap out(x.height(), x.width(), ch);
  for (std::size_t y = 0; y < x.height(); ++y)
    for (std::size_t xx = 0; xx < x.width(); ++xx)
      for (std::size_t o = 0; o < ch; ++o) {
        double acc = 0.0;
        for (std::size_t i = 0; i < ch; ++i) acc += p.out_proj(o, i) * concat(y, xx, i);
        out(y, xx, o) = acc;
      }
  return out;
}

attention::AttentionParams random_attention_params(Rng& rng, std::size_t channels, std::size_t heads,
                                                   std::size_t window, double alpha) {
  return {random_matrix(rng, channels, channels), random_matrix(rng, channels, channels),
          random_matrix(rng, channels, channels), random_matrix(rng, channels, channels),
          heads, alpha, window};
}

attention::SfnnParams random_sfnn_params(Rng& rng, std::size_t channels, std::size_t hidden) {
  attention::SfnnParams p;
  p.w1 = random_matrix(rng, 2 * hidden, channels);
  std::normal_distribution<double> gauss(0.0, 1.0 / 3.0);
  p.wd.resize(hidden);
  for (auto& k : p.wd)
    for (double& v : k) v = gauss(rng);
  p.w2 = random_matrix(rng, channels, hidden);
  return p;
}

attention::GliaParams random_glia_params(Rng& rng, std::size_t channels, std::size_t heads, std::size_t window,
                                         std::size_t tokens_per_window) {
  auto msa = [&] {
    return attention::MsaParams{random_matrix(rng, channels, channels), random_matrix(rng, channels, channels),
                                random_matrix(rng, channels, channels), random_matrix(rng, channels, channels),
                                heads};
  };
  auto mlp = [&] {
    return attention::MlpParams{random_matrix(rng, 2 * channels, channels), random_matrix(rng, channels, 2 * channels)};
  };
  attention::GliaParams p;
  p.token_conv.in_channels = channels;
  p.token_conv.out_channels = channels;
  p.token_conv.weights.resize(channels * channels * 9);
  std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(9.0 * static_cast<double>(channels)));
  for (double& v : p.token_conv.weights) v = gauss(rng);
  p.tokens_per_window = tokens_per_window;
  p.window = window;
  std::uniform_real_distribution<double> g(0.1, 1.0);
  p.gamma1 = g(rng);
  p.gamma2 = g(rng);
  p.gamma3 = g(rng);
  p.gamma4 = g(rng);
  p.token_msa = msa();
  p.token_mlp = mlp();
  p.joint_msa = msa();
  p.joint_mlp = mlp();
  return p;
}

Embedding basis(std::size_t dim, std::size_t i, double sign) {
  Embedding e(dim, 0.0);
  e.at(i) = sign;
  return e;
}

double top_energy_fraction(std::vector<double> coefficients, double fraction) {
  for (double& c : coefficients) c *= c;
  std::sort(coefficients.begin(), coefficients.end(), std::greater<>());
  double total = 0.0;
  for (double e : coefficients) total += e;
  if (total == 0.0) return 0.0;
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(coefficients.size()))));
  double top = 0.0;
  for (std::size_t i = 0; i < keep && i < coefficients.size(); ++i) top += coefficients[i];
  return top / total;
}

std::vector<double> haar_coefficients(const ImageTensor& image, std::size_t levels) {
  std::size_t h = image.height();
  std::size_t w = image.width();
  std::vector<double> a(image.data().begin(), image.data().end());
  const std::size_t stride = w;
  const double s = 1.0 / std::numbers::sqrt2;
  for (std::size_t l = 0; l < levels; ++l) {
    std::vector<double> tmp(h * w);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w / 2; ++x) {
        tmp[y * w + x] = s * (a[y * stride + 2 * x] + a[y * stride + 2 * x + 1]);
        tmp[y * w + w / 2 + x] = s * (a[y * stride + 2 * x] - a[y * stride + 2 * x + 1]);
      }
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t y = 0; y < h / 2; ++y) {
        a[y * stride + x] = s * (tmp[2 * y * w + x] + tmp[(2 * y + 1) * w + x]);
        a[(h / 2 + y) * stride + x] = s * (tmp[2 * y * w + x] - tmp[(2 * y + 1) * w + x]);
      }
    h /= 2;
    w /= 2;
  }
  return a;
}

ImageTensor straight_edge_image(std::size_t size, double angle_deg, double low, double high) {
  const double t = angle_deg * std::numbers::pi / 180.0;
  const double c = (static_cast<double>(size) - 1.0) / 2.0 + 0.3;
  ImageTensor img(size, size, 1, low);
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x) {
      const double side = -(static_cast<double>(x) - c) * std::sin(t) + (static_cast<double>(y) - c) * std::cos(t);
      if (side > 0.0) img(y, x) = high;
    }
  return img;
}

}  // namespace irspec::check
