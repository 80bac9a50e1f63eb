#include "irspec/prompt_loss.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "irspec/metrics.hpp"
#include "irspec/spectral.hpp"

namespace irspec {

namespace {

constexpr std::size_t kImageFeatures = 8;

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

Embedding normalized(std::span<const double> v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("cannot normalize a zero or non-finite vector");
  Embedding out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

StubEmbedder::StubEmbedder(std::uint64_t seed, std::size_t dimension)
    : seed_(seed), dimension_(dimension), projection_(dimension * kImageFeatures) {
  if (dimension == 0) throw InvalidArgument("StubEmbedder: dimension must be positive");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss;
  for (double& w : projection_) w = gauss(rng);
}

std::vector<double> StubEmbedder::image_statistics(const ImageTensor& image) {
  const auto d = image.data();
  const double n = static_cast<double>(d.size());
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= n;
  double var = 0.0, lo = d.front(), hi = d.front();
  for (double v : d) {
    var += (v - mean) * (v - mean);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double stddev = std::sqrt(var / n);

  double gx = 0.0, gy = 0.0;
  std::size_t nx = 0, ny = 0;
  for (std::size_t y = 0; y < image.height(); ++y)
    for (std::size_t x = 0; x < image.width(); ++x)
      for (std::size_t c = 0; c < image.channels(); ++c) {
        if (x + 1 < image.width()) {
          gx += std::abs(image(y, x + 1, c) - image(y, x, c));
          ++nx;
        }
        if (y + 1 < image.height()) {
          gy += std::abs(image(y + 1, x, c) - image(y, x, c));
          ++ny;
        }
      }
  gx = nx ? gx / static_cast<double>(nx) : 0.0;
  gy = ny ? gy / static_cast<double>(ny) : 0.0;

  // Scaled to the 8-bit range; the constant term keeps the vector nonzero.
  return {1.0, mean / 255.0, stddev / 255.0, lo / 255.0, hi / 255.0, gx / 255.0, gy / 255.0,
          (gx + gy) / (stddev + 1.0)};
}

Embedding StubEmbedder::image_embed(const ImageTensor& image) const {
  const auto f = image_statistics(image);
  Embedding e(dimension_, 0.0);
  for (std::size_t i = 0; i < dimension_; ++i)
    for (std::size_t j = 0; j < kImageFeatures; ++j) e[i] += projection_[i * kImageFeatures + j] * f[j];
  return normalized(e);
}

Embedding StubEmbedder::text_embed(std::string_view prompt) const {
  std::mt19937_64 rng(fnv1a(prompt, fnv1a(std::to_string(seed_))));
  std::normal_distribution<double> gauss;
  Embedding e(dimension_);
  for (double& x : e) x = gauss(rng);
  return normalized(e);
}

PromptPair PromptPair::embed(const EmbeddingProvider& provider, std::string_view positive_text,
                             std::string_view negative_text) {
  PromptPair p{provider.text_embed(positive_text), provider.text_embed(negative_text)};
  validate(p);
  return p;
}

void validate(const PromptPair& prompts) {
  if (prompts.positive.size() != prompts.negative.size()) throw InvalidArgument("prompt embeddings differ in dimension");
  for (const auto* v : {&prompts.positive, &prompts.negative}) {
    if (std::abs(norm(*v) - 1.0) > 1e-9) throw InvalidArgument("prompt embeddings must be unit-norm");
  }
  if (prompts.positive == prompts.negative) throw InvalidArgument("positive and negative prompts are identical");
}

double sim(std::span<const double> image_emb, std::span<const double> text_emb) {
  if (image_emb.size() != text_emb.size()) {
    throw InvalidArgument("sim: embedding dimensions differ (" + std::to_string(image_emb.size()) + " vs " +
                          std::to_string(text_emb.size()) + ")");
  }
  const double na = norm(image_emb);
  const double nb = norm(text_emb);
  if (!(na > 0.0) || !(nb > 0.0)) throw InvalidArgument("sim: zero embedding vector");
  double dot = 0.0;
  for (std::size_t i = 0; i < image_emb.size(); ++i) dot += image_emb[i] * text_emb[i];
  const double cosine = std::clamp(dot / (na * nb), -1.0, 1.0);
  return std::exp(cosine);
}

double classify_prob(std::span<const double> image_emb, const PromptPair& prompts) {
  const double pos = sim(image_emb, prompts.positive);
  const double neg = sim(image_emb, prompts.negative);
  // Both sides are snapped so that large = 1 - small holds exactly in floating
  // point (each subtraction is exact once large >= 0.5). Swapping the prompts
  // then returns exactly 1 - y_hat.
  const double total = pos + neg;
  const double large = 1.0 - std::min(pos, neg) / total;
  const double small = 1.0 - large;
  return pos <= neg ? small : large;
}

double bce_prompt_loss(double y_hat, int label) {
  if (label != 0 && label != 1) throw InvalidArgument("bce_prompt_loss: label must be 0 or 1");
  if (std::isnan(y_hat)) throw InvalidArgument("bce_prompt_loss: y_hat is NaN");
  const double p = std::clamp(y_hat, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double degradation_loss(std::span<const ImageTensor> images, const PromptPair& prompts,
                        const EmbeddingProvider& provider) {
  if (images.empty()) throw InvalidArgument("degradation_loss: empty batch");
  double acc = 0.0;
  for (const auto& img : images) {
    const Embedding e = provider.image_embed(img);
    acc += sim(e, prompts.negative) / sim(e, prompts.positive);
  }
  return acc / static_cast<double>(images.size());
}

double prompt_stage_loss(std::span<const ImageTensor> hr_images, std::span<const ImageTensor> lr_images,
                         const PromptPair& prompts, const EmbeddingProvider& provider) {
  if (hr_images.empty() && lr_images.empty()) throw InvalidArgument("prompt_stage_loss: no images");
  double acc = 0.0;
  for (const auto& img : hr_images) acc += bce_prompt_loss(classify_prob(provider.image_embed(img), prompts), 1);
  for (const auto& img : lr_images) acc += bce_prompt_loss(classify_prob(provider.image_embed(img), prompts), 0);
  return acc / static_cast<double>(hr_images.size() + lr_images.size());
}

LossBreakdown total_loss(const ImageTensor& hr, const ImageTensor& sr, const PromptPair& prompts,
                         const EmbeddingProvider& provider, const LossWeights& weights,
                         const PerceptualExtractor* perceptual) {
  require_same_shape(hr, sr, "total_loss");
  LossBreakdown b;
  b.spectral = spectral_fidelity_loss(hr, sr);
  b.degradation = degradation_loss(std::span<const ImageTensor>(&sr, 1), prompts, provider);
  b.pixel = mse(hr, sr);
  if (perceptual != nullptr) {
    const auto fh = perceptual->features(hr);
    const auto fs = perceptual->features(sr);
    if (fh.size() != fs.size() || fh.empty()) throw ShapeError("total_loss: perceptual feature sizes differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < fh.size(); ++i) acc += (fh[i] - fs[i]) * (fh[i] - fs[i]);
    b.perceptual = acc / static_cast<double>(fh.size());
  }
  b.total = weights.spectral * b.spectral + weights.degradation * b.degradation + weights.pixel * b.pixel +
            weights.perceptual * b.perceptual;
  return b;
}

}  // namespace irspec
