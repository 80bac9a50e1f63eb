#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "irspec/image.hpp"
#include "irspec/matrix.hpp"

// Forward-only reference passes of the window/channel attention, gated
// feed-forward and global-local token blocks. Toy-scale, no batching, no
// biases; meant for shape and invariant checks rather than speed.
namespace irspec::attention {

/// H x W x C feature map; same storage as an image.
using FeatureMap = ImageTensor;

struct AttentionParams {
  Matrix q_proj;  // C x C each
  Matrix k_proj;
  Matrix v_proj;
  Matrix out_proj;
  std::size_t heads = 1;
  double alpha = 1.0;      // channel-attention temperature
  std::size_t window = 1;  // spatial window side
};

struct SfnnParams {
  Matrix w1;                               // 2C' x C expansion
  std::vector<std::array<double, 9>> wd;   // C' depth-wise 3x3 kernels, row-major
  Matrix w2;                               // C x C' projection
};

struct MsaParams {
  Matrix q_proj;  // d x d each
  Matrix k_proj;
  Matrix v_proj;
  Matrix out_proj;
  std::size_t heads = 1;
};

struct MlpParams {
  Matrix fc1;  // hidden x d
  Matrix fc2;  // d x hidden
};

/// Dense 3x3 convolution weights indexed [out][in][ky][kx].
struct Conv3x3 {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::vector<double> weights;

  double at(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) const {
    return weights[((o * in_channels + i) * 3 + ky) * 3 + kx];
  }
};

struct GliaParams {
  Conv3x3 token_conv;               // d -> d
  std::size_t tokens_per_window = 1;
  std::size_t window = 1;
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double gamma3 = 1.0;
  double gamma4 = 1.0;
  MsaParams token_msa;
  MlpParams token_mlp;
  MsaParams joint_msa;
  MlpParams joint_mlp;
};

/// Optional sink for intermediates, in evaluation order.
struct Trace {
  std::vector<Matrix> softmax;     // every attention weight matrix
  std::vector<Matrix> layer_norm;  // every layer-norm output (one token per row)
};

inline constexpr double kLayerNormEpsilon = 1e-5;

double gelu(double x) noexcept;

void softmax_rows(Matrix& m);

/// Per-row zero mean / unit variance, no affine parameters.
Matrix layer_norm_rows(const Matrix& tokens, double eps = kLayerNormEpsilon);

/// Feature map as an (H*W) x C token matrix and back.
Matrix to_tokens(const FeatureMap& x);
FeatureMap from_tokens(const Matrix& tokens, std::size_t height, std::size_t width);

/// k x k windows in row-major window order.
std::vector<FeatureMap> window_partition(const FeatureMap& x, std::size_t k);
FeatureMap window_merge(const std::vector<FeatureMap>& windows, std::size_t height, std::size_t width);

/// Scaled dot-product multi-head self-attention over the rows of `tokens`,
/// scale 1/sqrt(d/heads), heads concatenated then out-projected.
Matrix multi_head_attention(const Matrix& tokens, const MsaParams& p, Trace* trace = nullptr);

/// fc2(GELU(fc1 x)) per token.
Matrix mlp(const Matrix& tokens, const MlpParams& p);

/// Window self-attention: per k x k window and head,
/// softmax(Q K^T / sqrt(C/h)) V; heads concatenated then out-projected.
FeatureMap sab_forward(const FeatureMap& x, const AttentionParams& p, Trace* trace = nullptr);

/// Transposed (channel) attention: per head A = softmax(Q_c^T K_c / alpha)
/// is (C/h) x (C/h) and the output is V_c A^T; heads concatenated then
/// out-projected.
FeatureMap cab_forward(const FeatureMap& x, const AttentionParams& p, Trace* trace = nullptr);

/// w2 (X'_1 (.) dw3x3(X'_2)) with [X'_1, X'_2] = GELU(w1 x) split along
/// channels; symmetric border for the depth-wise convolution.
FeatureMap sfnn_forward(const FeatureMap& x, const SfnnParams& p);

/// Global-local interactive attention:
///   C   = avgpool(conv3x3(x))                     n*L tokens
///   C'  = C + g1 MSA(LN(C)),  C'' = C' + g2 MLP(LN(C'))
///   per window: Xw = [window tokens; its L tokens]
///   Xw' = Xw + g3 MSA(LN(Xw)), Xw'' = Xw' + g4 MLP(LN(Xw'))
///   split, then out = nearest_upsample(C) + window tokens.
/// A window's k*k positions (row-major) are pooled into L equal groups, and
/// upsampling hands each position back the token of its group.
FeatureMap glia_forward(const FeatureMap& x, const GliaParams& p, Trace* trace = nullptr);

FeatureMap conv3x3(const FeatureMap& x, const Conv3x3& conv, BorderPolicy policy = BorderPolicy::symmetric);

}  // namespace irspec::attention
