#include "irspec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "irspec/fft.hpp"
#include "irspec/numfmt.hpp"

namespace irspec {

namespace {

void require_single_channel(const ImageTensor& image, const char* what) {
  if (image.channels() != 1) {
    throw ShapeError(std::string(what) + ": single-channel image required, got " + image.shape_string());
  }
}

Spectrum permuted(const Spectrum& s, std::size_t du, std::size_t dv) {
  Spectrum out{s.height, s.width, std::vector<cplx>(s.bins.size()), s.shifted};
  for (std::size_t u = 0; u < s.height; ++u) {
    const std::size_t nu = (u + du) % s.height;
    for (std::size_t v = 0; v < s.width; ++v) {
      out.bins[nu * s.width + (v + dv) % s.width] = s.bins[u * s.width + v];
    }
  }
  return out;
}

}  // namespace

Spectrum dft2(const ImageTensor& image) {
  require_single_channel(image, "dft2");
  Spectrum s{image.height(), image.width(), {}, false};
  s.bins.assign(image.data().begin(), image.data().end());
  fft::transform_2d(s.bins, s.height, s.width, fft::Direction::forward);
  return s;
}

std::vector<cplx> idft2(const Spectrum& s) {
  std::vector<cplx> field = s.bins;
  fft::transform_2d(field, s.height, s.width, fft::Direction::inverse);
  const double inv_n = 1.0 / static_cast<double>(s.height * s.width);
  for (auto& z : field) z *= inv_n;
  return field;
}

ImageTensor idft2_real(const Spectrum& s) {
  const auto field = idft2(s);
  ImageTensor out(s.height, s.width, 1);
  auto d = out.data();
  for (std::size_t i = 0; i < field.size(); ++i) d[i] = field[i].real();
  return out;
}

Spectrum fftshift(const Spectrum& s) {
  Spectrum out = permuted(s, s.height / 2, s.width / 2);
  out.shifted = true;
  return out;
}

Spectrum ifftshift(const Spectrum& s) {
  Spectrum out = permuted(s, s.height - s.height / 2, s.width - s.width / 2);
  out.shifted = false;
  return out;
}

MagnitudeSpectrum log_magnitude(const Spectrum& s) {
  MagnitudeSpectrum m{s.height, s.width, std::vector<double>(s.bins.size()), s.shifted, false};
  for (std::size_t i = 0; i < s.bins.size(); ++i) m.grid[i] = std::log1p(std::abs(s.bins[i]));
  return m;
}

MagnitudeSpectrum normalize_spectrum(const MagnitudeSpectrum& m) {
  MagnitudeSpectrum out = m;
  out.normalized = true;
  const auto& g = m.grid;
  if (g.empty()) return out;
  if (std::all_of(g.begin(), g.end(), [&](double v) { return v == g.front(); })) {
    std::fill(out.grid.begin(), out.grid.end(), 0.0);
    return out;
  }
  const double n = static_cast<double>(g.size());
  double mean = 0.0;
  for (double v : g) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : g) var += (v - mean) * (v - mean);
  const double denom = std::sqrt(var / n) + kNormalizeEpsilon;
  for (std::size_t i = 0; i < g.size(); ++i) out.grid[i] = (g[i] - mean) / denom;
  return out;
}

MagnitudeSpectrum normalized_log_spectrum(const ImageTensor& image) {
  return normalize_spectrum(log_magnitude(fftshift(dft2(image))));
}

double spectral_fidelity_loss(const ImageTensor& hr, const ImageTensor& sr) {
  require_single_channel(hr, "spectral_fidelity_loss");
  require_same_shape(hr, sr, "spectral_fidelity_loss");
  const auto mh = normalized_log_spectrum(hr);
  const auto ms = normalized_log_spectrum(sr);
  double acc = 0.0;
  for (std::size_t i = 0; i < mh.grid.size(); ++i) {
    const double d = mh.grid[i] - ms.grid[i];
    acc += d * d;
  }
  return acc / static_cast<double>(mh.grid.size());
}

ImageTensor spectral_fidelity_grad(const ImageTensor& hr, const ImageTensor& sr) {
  require_single_channel(hr, "spectral_fidelity_grad");
  require_same_shape(hr, sr, "spectral_fidelity_grad");

  // The shift permutes bins identically for both operands and the loss is a
  // mean over bins, so the backward pass runs on the unshifted layout.
  const Spectrum fs = dft2(sr);
  const auto mh = normalize_spectrum(log_magnitude(dft2(hr)));
  const auto ms_raw = log_magnitude(fs);
  const auto ms = normalize_spectrum(ms_raw);

  const std::size_t n = fs.bins.size();
  const double nd = static_cast<double>(n);

  // dL/dn
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = 2.0 / nd * (ms.grid[i] - mh.grid[i]);

  // Back through n = (m - mean) / (std + eps).
  std::vector<double> dm(n, 0.0);
  const auto& m = ms_raw.grid;
  const bool constant = std::all_of(m.begin(), m.end(), [&](double v) { return v == m.front(); });
  if (!constant) {
    double mean = 0.0;
    for (double v : m) mean += v;
    mean /= nd;
    double var = 0.0;
    for (double v : m) var += (v - mean) * (v - mean);
    const double sigma = std::sqrt(var / nd);
    const double denom = sigma + kNormalizeEpsilon;
    double g_mean = 0.0;
    double g_dot_c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      g_mean += g[i];
      g_dot_c += g[i] * (m[i] - mean);
    }
    g_mean /= nd;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = m[i] - mean;
      dm[i] = (g[i] - g_mean) / denom - g_dot_c * c / (nd * sigma * denom * denom);
    }
  }

  // Back through m = log1p(|F|) and |F|; |F| = 0 contributes nothing.
  Spectrum adj{fs.height, fs.width, std::vector<cplx>(n), false};
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = std::abs(fs.bins[i]);
    if (mag > 0.0) adj.bins[i] = (dm[i] / (1.0 + mag)) * (fs.bins[i] / mag);
  }

  // dL/dI(x) = Re sum_k G_k e^{+i w_k x} = N * Re(idft2(G)).
  const auto field = idft2(adj);
  ImageTensor grad(sr.height(), sr.width(), 1);
  auto gd = grad.data();
  for (std::size_t i = 0; i < n; ++i) gd[i] = nd * field[i].real();
  return grad;
}

RadialHistogram radial_spectrum(const ImageTensor& image, std::size_t nbins) {
  if (nbins == 0) throw InvalidArgument("radial_spectrum: nbins must be positive");
  const auto mag = log_magnitude(fftshift(dft2(image)));
  const double r_max = 0.5 * std::sqrt(2.0);

  RadialHistogram h;
  h.bin_edges.resize(nbins + 1);
  for (std::size_t i = 0; i <= nbins; ++i) {
    h.bin_edges[i] = r_max * static_cast<double>(i) / static_cast<double>(nbins);
  }
  h.bin_edges.back() = r_max;
  h.counts.assign(nbins, 0);
  h.mean_log_magnitude.assign(nbins, 0.0);

  const auto hh = static_cast<double>(mag.height);
  const auto ww = static_cast<double>(mag.width);
  const auto cu = static_cast<std::ptrdiff_t>(mag.height / 2);
  const auto cv = static_cast<std::ptrdiff_t>(mag.width / 2);
  for (std::size_t u = 0; u < mag.height; ++u) {
    const double fu = static_cast<double>(static_cast<std::ptrdiff_t>(u) - cu) / hh;
    for (std::size_t v = 0; v < mag.width; ++v) {
      const double fv = static_cast<double>(static_cast<std::ptrdiff_t>(v) - cv) / ww;
      const double r = std::sqrt(fu * fu + fv * fv);
      auto b = static_cast<std::size_t>(std::floor(r / r_max * static_cast<double>(nbins)));
      b = std::min(b, nbins - 1);
      ++h.counts[b];
      h.mean_log_magnitude[b] += mag.grid[u * mag.width + v];
    }
  }
  for (std::size_t b = 0; b < nbins; ++b) {
    if (h.counts[b] > 0) h.mean_log_magnitude[b] /= static_cast<double>(h.counts[b]);
  }
  return h;
}

void write_radial_csv(std::ostream& os, const RadialHistogram& h) {
  os << "radius_lo,radius_hi,count,mean_log_mag\n";
  for (std::size_t b = 0; b < h.bins(); ++b) {
    os << fmt17(h.bin_edges[b]) << ',' << fmt17(h.bin_edges[b + 1]) << ',' << h.counts[b] << ','
       << fmt17(h.mean_log_magnitude[b]) << '\n';
  }
}

}  // namespace irspec
