#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "irspec/image.hpp"

namespace irspec {

using Embedding = std::vector<double>;

/// Image and text encoders sharing one latent space. Implementations return
/// unit-norm vectors, are deterministic, and must tolerate concurrent calls.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dimension() const = 0;
  virtual Embedding image_embed(const ImageTensor& image) const = 0;
  virtual Embedding text_embed(std::string_view prompt) const = 0;
};

/// Deterministic stand-in for pretrained encoders.
///
/// Images: a fixed feature vector of intensity and gradient statistics is
/// pushed through a seeded Gaussian projection and normalized, so similar
/// images land close together. Text: the prompt bytes are hashed together
/// with the seed into an RNG that draws a Gaussian vector, then normalized.
class StubEmbedder final : public EmbeddingProvider {
 public:
  explicit StubEmbedder(std::uint64_t seed = 0, std::size_t dimension = 64);

  std::size_t dimension() const override { return dimension_; }
  Embedding image_embed(const ImageTensor& image) const override;
  Embedding text_embed(std::string_view prompt) const override;

  static std::vector<double> image_statistics(const ImageTensor& image);

 private:
  std::uint64_t seed_;
  std::size_t dimension_;
  std::vector<double> projection_;  // dimension x features
};

/// Embedded positive/negative prompts. Both unit-norm and not identical.
struct PromptPair {
  Embedding positive;
  Embedding negative;

  static PromptPair embed(const EmbeddingProvider& provider, std::string_view positive_text,
                          std::string_view negative_text);
};

/// Throws InvalidArgument unless the pair satisfies its invariants.
void validate(const PromptPair& prompts);

Embedding normalized(std::span<const double> v);

/// e^{cos(image, text)}.
double sim(std::span<const double> image_emb, std::span<const double> text_emb);

/// SIM(I, T_pos) / (SIM(I, T_neg) + SIM(I, T_pos)).
double classify_prob(std::span<const double> image_emb, const PromptPair& prompts);

inline constexpr double kProbabilityClamp = 1e-7;

/// Binary cross-entropy with y_hat clamped to [1e-7, 1 - 1e-7]; label is 0 (LR) or 1 (HR).
double bce_prompt_loss(double y_hat, int label);

/// (1/N) sum_i SIM(I_i, T_neg) / SIM(I_i, T_pos).
double degradation_loss(std::span<const ImageTensor> images, const PromptPair& prompts,
                        const EmbeddingProvider& provider);

// Training alternates two stages. Prompt refinement tunes the prompt pair
// against prompt_stage_loss (HR images labelled 1, LR images labelled 0)
// with the network frozen; network fine-tuning then freezes the prompts and
// minimizes total_loss, whose degradation term pulls SR outputs toward the
// positive prompt. This toolkit evaluates both losses; it does not optimize.

/// Mean BCE over HR (label 1) and LR (label 0) images.
double prompt_stage_loss(std::span<const ImageTensor> hr_images, std::span<const ImageTensor> lr_images,
                         const PromptPair& prompts, const EmbeddingProvider& provider);

/// Feature extractor for the perceptual term (e.g. a VGG trunk). Not shipped.
class PerceptualExtractor {
 public:
  virtual ~PerceptualExtractor() = default;
  virtual std::vector<double> features(const ImageTensor& image) const = 0;
};

struct LossWeights {
  double spectral = 1.0;
  double degradation = 1.0;
  double pixel = 1.0;
  double perceptual = 1.0;
};

struct LossBreakdown {
  double spectral = 0.0;
  double degradation = 0.0;
  double pixel = 0.0;
  double perceptual = 0.0;
  double total = 0.0;
};

/// Weighted L_SF + L_degrad + L_pixel + L_perceptual for one HR/SR pair.
/// The perceptual term is the mean squared feature difference when an
/// extractor is supplied and 0 otherwise.
LossBreakdown total_loss(const ImageTensor& hr, const ImageTensor& sr, const PromptPair& prompts,
                         const EmbeddingProvider& provider, const LossWeights& weights = {},
                         const PerceptualExtractor* perceptual = nullptr);

}  // namespace irspec
