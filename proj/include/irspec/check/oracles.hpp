#pragma once

// Slow, direct implementations used to cross-check the fast paths. Nothing
// here calls into the code it verifies: the DFT is an explicit double sum,
// convolutions are dense loops over explicitly padded grids, and gradients
// are central differences.

#include <cstdint>
#include <functional>
#include <random>

#include "irspec/attention.hpp"
#include "irspec/image.hpp"
#include "irspec/prompt_loss.hpp"
#include "irspec/spectral.hpp"

namespace irspec::check {

using Rng = std::mt19937_64;

ImageTensor random_image(Rng& rng, std::size_t height, std::size_t width, std::size_t channels = 1,
                         double lo = 0.0, double hi = 1.0);
Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0);

/// F(u,v) = sum_x sum_y I(x,y) exp(-2 pi i (ux/H + vy/W)), O(N^4).
Spectrum naive_dft2(const ImageTensor& image);

/// The loss evaluated step by step: naive DFT, explicit index shift,
/// ln(1+|F|), population statistics, mean squared difference.
double naive_spectral_fidelity_loss(const ImageTensor& hr, const ImageTensor& sr);

/// Central differences of f around x.
ImageTensor finite_difference_grad(const std::function<double(const ImageTensor&)>& f, const ImageTensor& x,
                                   double step);

/// Dense 2D correlation of a zero-padded-free, explicitly reflected input:
/// out(y,x) = sum_{i,j} kernel(i,j) * in(reflect(y+i-r), reflect(x+j-r)).
ImageTensor dense_correlate(const ImageTensor& in, const std::vector<std::vector<double>>& kernel);

/// Outer product of 1D taps.
std::vector<std::vector<double>> outer(std::span<const double> a, std::span<const double> b, double gain = 1.0);

/// Naive attention loops for one window/head at a time.
attention::FeatureMap naive_sab(const attention::FeatureMap& x, const attention::AttentionParams& p);

attention::AttentionParams random_attention_params(Rng& rng, std::size_t channels, std::size_t heads,
                                                   std::size_t window, double alpha = 1.0);
attention::SfnnParams random_sfnn_params(Rng& rng, std::size_t channels, std::size_t hidden);
attention::GliaParams random_glia_params(Rng& rng, std::size_t channels, std::size_t heads, std::size_t window,
                                         std::size_t tokens_per_window);

/// Provider that maps every image to one fixed embedding; text prompts are
/// not supported.
class FixedImageEmbedder final : public EmbeddingProvider {
 public:
  explicit FixedImageEmbedder(Embedding e) : e_(std::move(e)) {}
  std::size_t dimension() const override { return e_.size(); }
  Embedding image_embed(const ImageTensor&) const override { return e_; }
  Embedding text_embed(std::string_view) const override {
    throw InvalidArgument("FixedImageEmbedder has no text encoder");
  }

 private:
  Embedding e_;
};

/// Unit basis vector e_i scaled by `sign`.
Embedding basis(std::size_t dim, std::size_t i, double sign = 1.0);

/// Energy fraction captured by the largest `fraction` of the coefficients.
double top_energy_fraction(std::vector<double> coefficients, double fraction);

/// Orthonormal 2D Haar analysis, `levels` deep; returns every coefficient.
std::vector<double> haar_coefficients(const ImageTensor& image, std::size_t levels);

/// Step edge through the image centre at `angle_deg` from the x axis.
ImageTensor straight_edge_image(std::size_t size, double angle_deg, double low = 0.0, double high = 255.0);

}  // namespace irspec::check
