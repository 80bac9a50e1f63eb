#include "irspec/attention.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace irspec::attention {

namespace {

void require_square(const Matrix& m, std::size_t n, const char* what) {
  if (m.rows() != n || m.cols() != n) {
    throw ShapeError(std::string(what) + " must be " + std::to_string(n) + "x" + std::to_string(n) + ", got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void require_heads(std::size_t channels, std::size_t heads) {
  if (heads == 0 || channels % heads != 0) {
    throw ShapeError(std::to_string(channels) + " channels not divisible by " + std::to_string(heads) + " heads");
  }
}

void require_windows(const FeatureMap& x, std::size_t k) {
  if (k == 0 || x.height() % k != 0 || x.width() % k != 0) {
    throw ShapeError("feature map " + x.shape_string() + " is not divisible into " + std::to_string(k) + "x" +
                     std::to_string(k) + " windows");
  }
}

Matrix residual(const Matrix& base, double gamma, const Matrix& update) {
  Matrix out = base;
  auto o = out.data();
  auto u = update.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += gamma * u[i];
  return out;
}

}  // namespace

double gelu(double x) noexcept { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

void softmax_rows(Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      total += v;
    }
    for (double& v : row) v /= total;
  }
}

Matrix layer_norm_rows(const Matrix& tokens, double eps) {
  Matrix out(tokens.rows(), tokens.cols());
  const auto d = static_cast<double>(tokens.cols());
  for (std::size_t r = 0; r < tokens.rows(); ++r) {
    const auto in = tokens.row(r);
    double mean = 0.0;
    for (double v : in) mean += v;
    mean /= d;
    double var = 0.0;
    for (double v : in) var += (v - mean) * (v - mean);
    var /= d;
    const double inv = 1.0 / std::sqrt(var + eps);
    auto o = out.row(r);
    for (std::size_t c = 0; c < in.size(); ++c) o[c] = (in[c] - mean) * inv;
  }
  return out;
}

Matrix to_tokens(const FeatureMap& x) {
  return Matrix(x.height() * x.width(), x.channels(), x.values());
}

FeatureMap from_tokens(const Matrix& tokens, std::size_t height, std::size_t width) {
  if (tokens.rows() != height * width) throw ShapeError("from_tokens: token count does not match H*W");
  return FeatureMap(height, width, tokens.cols(), std::vector<double>(tokens.data().begin(), tokens.data().end()));
}

std::vector<FeatureMap> window_partition(const FeatureMap& x, std::size_t k) {
  require_windows(x, k);
  std::vector<FeatureMap> windows;
  const std::size_t ch = x.channels();
  for (std::size_t wy = 0; wy < x.height() / k; ++wy) {
    for (std::size_t wx = 0; wx < x.width() / k; ++wx) {
      FeatureMap w(k, k, ch);
      for (std::size_t y = 0; y < k; ++y)
        for (std::size_t xx = 0; xx < k; ++xx)
          for (std::size_t c = 0; c < ch; ++c) w(y, xx, c) = x(wy * k + y, wx * k + xx, c);
      windows.push_back(std::move(w));
    }
  }
  return windows;
}

FeatureMap window_merge(const std::vector<FeatureMap>& windows, std::size_t height, std::size_t width) {
  if (windows.empty()) throw ShapeError("window_merge: no windows");
  const std::size_t k = windows.front().height();
  const std::size_t ch = windows.front().channels();
  if (k == 0 || height % k != 0 || width % k != 0 || windows.size() != (height / k) * (width / k)) {
    throw ShapeError("window_merge: windows do not tile " + std::to_string(height) + "x" + std::to_string(width));
  }
  FeatureMap out(height, width, ch);
  const std::size_t per_row = width / k;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const FeatureMap& w = windows[i];
    if (w.height() != k || w.width() != k || w.channels() != ch) throw ShapeError("window_merge: ragged windows");
    const std::size_t wy = i / per_row;
    const std::size_t wx = i % per_row;
    for (std::size_t y = 0; y < k; ++y)
      for (std::size_t xx = 0; xx < k; ++xx)
        for (std::size_t c = 0; c < ch; ++c) out(wy * k + y, wx * k + xx, c) = w(y, xx, c);
  }
  return out;
}

Matrix multi_head_attention(const Matrix& tokens, const MsaParams& p, Trace* trace) {
  const std::size_t d = tokens.cols();
  require_heads(d, p.heads);
  require_square(p.q_proj, d, "q_proj");
  require_square(p.k_proj, d, "k_proj");
  require_square(p.v_proj, d, "v_proj");
  require_square(p.out_proj, d, "out_proj");

  const Matrix q = project_rows(tokens, p.q_proj);
  const Matrix k = project_rows(tokens, p.k_proj);
  const Matrix v = project_rows(tokens, p.v_proj);
  const std::size_t n = tokens.rows();
  const std::size_t dh = d / p.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Matrix heads_out(n, d);
  for (std::size_t h = 0; h < p.heads; ++h) {
    const std::size_t off = h * dh;
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double dot = 0.0;
        for (std::size_t c = 0; c < dh; ++c) dot += q(i, off + c) * k(j, off + c);
        a(i, j) = dot * scale;
      }
    softmax_rows(a);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < dh; ++c) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += a(i, j) * v(j, off + c);
        heads_out(i, off + c) = acc;
      }
    if (trace) trace->softmax.push_back(std::move(a));
  }
  return project_rows(heads_out, p.out_proj);
}

Matrix mlp(const Matrix& tokens, const MlpParams& p) {
  if (p.fc2.cols() != p.fc1.rows() || p.fc2.rows() != tokens.cols()) {
    throw ShapeError("mlp: fc1/fc2 shapes do not chain back to the token width");
  }
  Matrix hidden = project_rows(tokens, p.fc1);
  for (double& v : hidden.data()) v = gelu(v);
  return project_rows(hidden, p.fc2);
}

FeatureMap sab_forward(const FeatureMap& x, const AttentionParams& p, Trace* trace) {
  require_windows(x, p.window);
  const MsaParams msa{p.q_proj, p.k_proj, p.v_proj, p.out_proj, p.heads};
  auto windows = window_partition(x, p.window);
  for (auto& w : windows) {
    w = from_tokens(multi_head_attention(to_tokens(w), msa, trace), p.window, p.window);
  }
  return window_merge(windows, x.height(), x.width());
}

FeatureMap cab_forward(const FeatureMap& x, const AttentionParams& p, Trace* trace) {
  const std::size_t ch = x.channels();
  require_heads(ch, p.heads);
  require_square(p.q_proj, ch, "q_proj");
  require_square(p.k_proj, ch, "k_proj");
  require_square(p.v_proj, ch, "v_proj");
  require_square(p.out_proj, ch, "out_proj");
  if (!(p.alpha > 0.0)) throw InvalidArgument("cab_forward: alpha must be positive");

  const Matrix tokens = to_tokens(x);
  const Matrix q = project_rows(tokens, p.q_proj);
  const Matrix k = project_rows(tokens, p.k_proj);
  const Matrix v = project_rows(tokens, p.v_proj);
  const std::size_t n = tokens.rows();
  const std::size_t dh = ch / p.heads;

  Matrix heads_out(n, ch);
  for (std::size_t h = 0; h < p.heads; ++h) {
    const std::size_t off = h * dh;
    Matrix a(dh, dh);
    for (std::size_t i = 0; i < dh; ++i)
      for (std::size_t j = 0; j < dh; ++j) {
        double dot = 0.0;
        for (std::size_t t = 0; t < n; ++t) dot += q(t, off + i) * k(t, off + j);
        a(i, j) = dot / p.alpha;
      }
    softmax_rows(a);
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t i = 0; i < dh; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < dh; ++j) acc += a(i, j) * v(t, off + j);
        heads_out(t, off + i) = acc;
      }
    if (trace) trace->softmax.push_back(std::move(a));
  }
  return from_tokens(project_rows(heads_out, p.out_proj), x.height(), x.width());
}

FeatureMap sfnn_forward(const FeatureMap& x, const SfnnParams& p) {
  if (p.w1.cols() != x.channels()) throw ShapeError("sfnn_forward: w1 input width does not match channels");
  if (p.w1.rows() % 2 != 0) {
    throw ShapeError("sfnn_forward: expansion width " + std::to_string(p.w1.rows()) + " is odd");
  }
  const std::size_t half = p.w1.rows() / 2;
  if (p.wd.size() != half || p.w2.cols() != half || p.w2.rows() != x.channels()) {
    throw ShapeError("sfnn_forward: depth-wise or projection shapes do not match the expansion");
  }
  const auto h = static_cast<std::ptrdiff_t>(x.height());
  const auto w = static_cast<std::ptrdiff_t>(x.width());

  Matrix expanded = project_rows(to_tokens(x), p.w1);
  for (double& v : expanded.data()) v = gelu(v);

  Matrix gated(expanded.rows(), half);
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t xx = 0; xx < w; ++xx) {
      const auto t = static_cast<std::size_t>(y * w + xx);
      for (std::size_t c = 0; c < half; ++c) {
        double conv = 0.0;
        for (std::ptrdiff_t ky = -1; ky <= 1; ++ky) {
          const auto sy = border_index(y + ky, h, BorderPolicy::symmetric);
          for (std::ptrdiff_t kx = -1; kx <= 1; ++kx) {
            const auto sx = border_index(xx + kx, w, BorderPolicy::symmetric);
            conv += p.wd[c][(ky + 1) * 3 + (kx + 1)] * expanded(static_cast<std::size_t>(sy * w + sx), half + c);
          }
        }
        gated(t, c) = expanded(t, c) * conv;
      }
    }
  }
  return from_tokens(project_rows(gated, p.w2), x.height(), x.width());
}

FeatureMap conv3x3(const FeatureMap& x, const Conv3x3& conv, BorderPolicy policy) {
  if (conv.in_channels != x.channels() || conv.weights.size() != conv.out_channels * conv.in_channels * 9) {
    throw ShapeError("conv3x3: weights do not match " + std::to_string(x.channels()) + " input channels");
  }
  const auto h = static_cast<std::ptrdiff_t>(x.height());
  const auto w = static_cast<std::ptrdiff_t>(x.width());
  FeatureMap out(x.height(), x.width(), conv.out_channels);
  for (std::ptrdiff_t y = 0; y < h; ++y)
    for (std::ptrdiff_t xx = 0; xx < w; ++xx)
      for (std::size_t o = 0; o < conv.out_channels; ++o) {
        double acc = 0.0;
        for (std::size_t ky = 0; ky < 3; ++ky) {
          const auto sy = border_index(y + static_cast<std::ptrdiff_t>(ky) - 1, h, policy);
          if (sy < 0) continue;
          for (std::size_t kx = 0; kx < 3; ++kx) {
            const auto sx = border_index(xx + static_cast<std::ptrdiff_t>(kx) - 1, w, policy);
            if (sx < 0) continue;
            for (std::size_t i = 0; i < conv.in_channels; ++i) acc += conv.at(o, i, ky, kx) * x(sy, sx, i);
          }
        }
        out(y, xx, o) = acc;
      }
  return out;
}

FeatureMap glia_forward(const FeatureMap& x, const GliaParams& p, Trace* trace) {
  const std::size_t k = p.window;
  const std::size_t tokens_per_window = p.tokens_per_window;
  require_windows(x, k);
  if (tokens_per_window == 0 || (k * k) % tokens_per_window != 0) {
    throw ShapeError("glia_forward: " + std::to_string(tokens_per_window) + " tokens do not evenly pool a " +
                     std::to_string(k) + "x" + std::to_string(k) + " window");
  }
  const std::size_t d = x.channels();
  if (p.token_conv.out_channels != d) throw ShapeError("glia_forward: token conv must keep the channel count");
  const std::size_t group = k * k / tokens_per_window;

  auto layer_norm = [&](const Matrix& m) {
    Matrix ln = layer_norm_rows(m);
    if (trace) trace->layer_norm.push_back(ln);
    return ln;
  };

  // (1) local tokens: conv then average pooling over each window group.
  const auto windows_conv = window_partition(conv3x3(x, p.token_conv), k);
  const std::size_t n = windows_conv.size();
  Matrix tokens(n * tokens_per_window, d);
  for (std::size_t wi = 0; wi < n; ++wi) {
    const Matrix t = to_tokens(windows_conv[wi]);
    for (std::size_t pos = 0; pos < k * k; ++pos)
      for (std::size_t c = 0; c < d; ++c) tokens(wi * tokens_per_window + pos / group, c) += t(pos, c);
  }
  for (double& v : tokens.data()) v /= static_cast<double>(group);

  // (2) global mixing across all local tokens.
  tokens = residual(tokens, p.gamma1, multi_head_attention(layer_norm(tokens), p.token_msa, trace));
  tokens = residual(tokens, p.gamma2, mlp(layer_norm(tokens), p.token_mlp));

  // (3)-(4) per-window joint stage over [window tokens; local tokens], then split.
  auto windows = window_partition(x, k);
  for (std::size_t wi = 0; wi < n; ++wi) {
    const Matrix local = to_tokens(windows[wi]);
    Matrix joint(k * k + tokens_per_window, d);
    for (std::size_t r = 0; r < k * k; ++r)
      for (std::size_t c = 0; c < d; ++c) joint(r, c) = local(r, c);
    for (std::size_t l = 0; l < tokens_per_window; ++l)
      for (std::size_t c = 0; c < d; ++c) joint(k * k + l, c) = tokens(wi * tokens_per_window + l, c);

    joint = residual(joint, p.gamma3, multi_head_attention(layer_norm(joint), p.joint_msa, trace));
    joint = residual(joint, p.gamma4, mlp(layer_norm(joint), p.joint_mlp));

    Matrix back(k * k, d);
    for (std::size_t r = 0; r < k * k; ++r)
      for (std::size_t c = 0; c < d; ++c) back(r, c) = joint(r, c);
    for (std::size_t l = 0; l < tokens_per_window; ++l)
      for (std::size_t c = 0; c < d; ++c) tokens(wi * tokens_per_window + l, c) = joint(k * k + l, c);
    windows[wi] = from_tokens(back, k, k);
  }

  // (5) nearest-neighbour upsampling of the tokens added to the window tokens.
  for (std::size_t wi = 0; wi < n; ++wi) {
    FeatureMap& w = windows[wi];
    for (std::size_t pos = 0; pos < k * k; ++pos)
      for (std::size_t c = 0; c < d; ++c) w(pos / k, pos % k, c) += tokens(wi * tokens_per_window + pos / group, c);
  }
  return window_merge(windows, x.height(), x.width());
}

}  // namespace irspec::attention
