#include <cmath>
#include <numbers>

#include "doctest.h"
#include "irspec/check/oracles.hpp"
#include "irspec/metrics.hpp"
#include "irspec/prompt_loss.hpp"
#include "irspec/spectral.hpp"

using namespace irspec;
using check::basis;
using check::Rng;

namespace {

constexpr double kE = std::numbers::e;

// Provider that picks the image embedding from a table, indexed by pixel (0, 0).
class TableEmbedder final : public EmbeddingProvider {
 public:
  explicit TableEmbedder(std::vector<Embedding> table) : table_(std::move(table)) {}
  std::size_t dimension() const override { return table_.front().size(); }
  Embedding image_embed(const ImageTensor& image) const override {
    return table_.at(static_cast<std::size_t>(image(0, 0)));
  }
  Embedding text_embed(std::string_view) const override { return basis(dimension(), 0); }

 private:
  std::vector<Embedding> table_;
};

class SumFeatures final : public PerceptualExtractor {
 public:
  std::vector<double> features(const ImageTensor& image) const override {
    double s = 0.0;
    for (double v : image.data()) s += v;
    return {s, image(0, 0)};
  }
};

}  // namespace

TEST_CASE("sim") {
  const auto a = basis(4, 0);
  CHECK(sim(a, a) == doctest::Approx(kE).epsilon(1e-15));
  CHECK(sim(a, basis(4, 1)) == 1.0);
  CHECK(sim(a, basis(4, 0, -1.0)) == doctest::Approx(1.0 / kE).epsilon(1e-15));
  // Unnormalized inputs are fine; only the angle matters.
  CHECK(sim(std::vector<double>{3, 0}, std::vector<double>{0.5, 0}) == doctest::Approx(kE));
  CHECK_THROWS_AS(sim(a, basis(3, 0)), InvalidArgument);
  CHECK_THROWS_AS(sim(a, std::vector<double>(4, 0.0)), InvalidArgument);
}

TEST_CASE("classification probability") {
  const PromptPair orth{basis(3, 1), basis(3, 2)};
  CHECK(classify_prob(basis(3, 0), orth) == 0.5);

  const PromptPair anti{basis(3, 0), basis(3, 0, -1.0)};
  const double y = classify_prob(basis(3, 0), anti);
  CHECK(std::abs(y - kE / (kE + 1.0 / kE)) <= 1e-9);
  CHECK(std::abs(y - 0.880797) <= 1e-6);

  SUBCASE("swap symmetry is exact") {
    Rng rng(50);
    std::normal_distribution<double> g;
    for (int i = 0; i < 200; ++i) {
      Embedding a(8), b(8), img(8);
      for (std::size_t k = 0; k < 8; ++k) {
        a[k] = g(rng);
        b[k] = g(rng);
        img[k] = g(rng);
      }
      const PromptPair p{normalized(a), normalized(b)};
      const PromptPair s{p.negative, p.positive};
      const double yp = classify_prob(img, p);
      const double ys = classify_prob(img, s);
      CHECK(ys == 1.0 - yp);
      CHECK(yp == 1.0 - ys);
      CHECK(yp > 0.0);
      CHECK(yp < 1.0);
    }
  }
}

TEST_CASE("binary cross-entropy") {
  CHECK(bce_prompt_loss(0.5, 0) == doctest::Approx(std::log(2.0)));
  CHECK(bce_prompt_loss(0.5, 1) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(bce_prompt_loss(1.0, 1) == doctest::Approx(-std::log(1.0 - 1e-7)));
  CHECK(bce_prompt_loss(1.0, 1) < 1e-6);
  CHECK(std::isfinite(bce_prompt_loss(0.0, 1)));
  CHECK(bce_prompt_loss(0.0, 1) == doctest::Approx(-std::log(1e-7)));
  CHECK(bce_prompt_loss(0.880797, 1) == doctest::Approx(0.126928).epsilon(1e-5));
  CHECK_THROWS_AS(bce_prompt_loss(0.5, 2), InvalidArgument);
  CHECK_THROWS_AS(bce_prompt_loss(NAN, 1), InvalidArgument);
}

TEST_CASE("degradation loss") {
  const ImageTensor img0(4, 4, 1, 0.0);
  const ImageTensor img1(4, 4, 1, 1.0);
  const PromptPair anti{basis(3, 0), basis(3, 0, -1.0)};

  SUBCASE("equidistant images give 1") {
    const check::FixedImageEmbedder p(basis(3, 2));
    const ImageTensor batch[] = {img0, img1};
    CHECK(degradation_loss(batch, anti, p) == 1.0);
  }
  SUBCASE("antipodal single image") {
    const check::FixedImageEmbedder p(basis(3, 0));
    CHECK(std::abs(degradation_loss(std::span(&img0, 1), anti, p) - std::exp(-2.0)) <= 1e-9);
  }
  SUBCASE("batch of two is the mean") {
    const TableEmbedder p({basis(3, 0), normalized(std::vector<double>{1, 1, 0})});
    const double a = degradation_loss(std::span(&img0, 1), anti, p);
    const double b = degradation_loss(std::span(&img1, 1), anti, p);
    const ImageTensor batch[] = {img0, img1};
    CHECK(degradation_loss(batch, anti, p) == (a + b) / 2.0);
  }
  SUBCASE("empty batch") {
    const check::FixedImageEmbedder p(basis(3, 0));
    CHECK_THROWS_AS(degradation_loss({}, anti, p), InvalidArgument);
  }
}

TEST_CASE("stub embedder") {
  const StubEmbedder e(7, 32);
  Rng rng(51);
  const ImageTensor img = check::random_image(rng, 8, 8, 1, 0.0, 255.0);

  const auto v = e.image_embed(img);
  double n = 0.0;
  for (double x : v) n += x * x;
  CHECK(std::abs(std::sqrt(n) - 1.0) <= 1e-9);
  CHECK(v == e.image_embed(img));
  CHECK(v == StubEmbedder(7, 32).image_embed(img));

  const auto t = e.text_embed("a sharp infrared image");
  n = 0.0;
  for (double x : t) n += x * x;
  CHECK(std::abs(std::sqrt(n) - 1.0) <= 1e-9);
  CHECK(t == e.text_embed("a sharp infrared image"));
  CHECK(t != e.text_embed("a blurry infrared image"));
  CHECK(t != StubEmbedder(8, 32).text_embed("a sharp infrared image"));

  const auto pair = PromptPair::embed(e, "sharp", "blurry");
  CHECK_NOTHROW(validate(pair));
  CHECK_THROWS_AS(PromptPair::embed(e, "same", "same"), InvalidArgument);
  CHECK_THROWS_AS(validate(PromptPair{basis(3, 0), std::vector<double>{2, 0, 0}}), InvalidArgument);
  CHECK_THROWS_AS(StubEmbedder(0, 0), InvalidArgument);
}

TEST_CASE("prompt stage loss") {
  const ImageTensor hr(4, 4, 1, 0.0);
  const ImageTensor lr(4, 4, 1, 1.0);
  const TableEmbedder p({basis(3, 0), basis(3, 0, -1.0)});
  const PromptPair anti{basis(3, 0), basis(3, 0, -1.0)};
  // Both images are classified correctly with probability e/(e+1/e).
  const double want = -std::log(kE / (kE + 1.0 / kE));
  CHECK(prompt_stage_loss(std::span(&hr, 1), std::span(&lr, 1), anti, p) == doctest::Approx(want).epsilon(1e-14));
  CHECK_THROWS_AS(prompt_stage_loss({}, {}, anti, p), InvalidArgument);
}

TEST_CASE("total loss") {
  Rng rng(52);
  const PromptPair orth{basis(3, 1), basis(3, 2)};
  const check::FixedImageEmbedder eq(basis(3, 0));
  const ImageTensor hr = check::random_image(rng, 8, 8, 1, 0.0, 255.0);

  SUBCASE("sr = hr with equidistant prompts") {
    const LossBreakdown b = total_loss(hr, hr, orth, eq);
    CHECK(b.spectral == 0.0);
    CHECK(b.pixel == 0.0);
    CHECK(b.degradation == 1.0);
    CHECK(b.perceptual == 0.0);
    CHECK(b.total == 1.0);
  }
  SUBCASE("zero weights") {
    const ImageTensor sr = check::random_image(rng, 8, 8, 1, 0.0, 255.0);
    const SumFeatures f;
    CHECK(total_loss(hr, sr, orth, eq, LossWeights{0, 0, 0, 0}, &f).total == 0.0);
  }
  SUBCASE("recomposition from module calls") {
    const ImageTensor hr1 = check::random_image(rng, 8, 8);
    const ImageTensor sr = check::random_image(rng, 8, 8);
    const StubEmbedder stub(3, 16);
    const auto prompts = PromptPair::embed(stub, "clean", "degraded");
    const SumFeatures f;
    const LossWeights w{0.5, 2.0, 0.25, 0.125};
    const LossBreakdown b = total_loss(hr1, sr, prompts, stub, w, &f);
    const auto fh = f.features(hr1);
    const auto fs = f.features(sr);
    const double perceptual = ((fh[0] - fs[0]) * (fh[0] - fs[0]) + (fh[1] - fs[1]) * (fh[1] - fs[1])) / 2.0;
    const double want = 0.5 * spectral_fidelity_loss(hr1, sr) +
                        2.0 * degradation_loss(std::span(&sr, 1), prompts, stub) + 0.25 * mse(hr1, sr) +
                        0.125 * perceptual;
    CHECK(std::abs(b.total - want) <= 1e-12);
  }
  SUBCASE("shape mismatch") { CHECK_THROWS_AS(total_loss(hr, ImageTensor(4, 4), orth, eq), ShapeError); }
}
