#include <cmath>

#include "doctest.h"
#include "irspec/check/oracles.hpp"
#include "irspec/metrics.hpp"

using namespace irspec;
using check::Rng;

namespace {

ImageTensor plus(const ImageTensor& x, double d) {
  ImageTensor y = x;
  for (double& v : y.data()) v += d;
  return y;
}

// Per-window SSIM evaluated directly from the definition.
double naive_ssim(const ImageTensor& a, const ImageTensor& b) {
  const int n = 11;
  const double sigma = 1.5;
  double w[n][n];
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2.0 * sigma * sigma));
      total += w[i][j];
    }
  const double c1 = std::pow(0.01 * 255.0, 2);
  const double c2 = std::pow(0.03 * 255.0, 2);
  double acc = 0.0;
  int windows = 0;
  for (std::size_t y0 = 0; y0 + n <= a.height(); ++y0)
    for (std::size_t x0 = 0; x0 + n <= a.width(); ++x0) {
      double mx = 0, my = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          mx += w[i][j] / total * a(y0 + i, x0 + j);
          my += w[i][j] / total * b(y0 + i, x0 + j);
        }
      double vx = 0, vy = 0, cxy = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double dx = a(y0 + i, x0 + j) - mx;
          const double dy = b(y0 + i, x0 + j) - my;
          vx += w[i][j] / total * dx * dx;
          vy += w[i][j] / total * dy * dy;
          cxy += w[i][j] / total * dx * dy;
        }
      acc += (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++windows;
    }
  return acc / windows;
}

}  // namespace

TEST_CASE("mse") {
  Rng rng(30);
  const ImageTensor x = check::random_image(rng, 12, 9, 1, 0.0, 255.0);
  CHECK(mse(x, x) == 0.0);
  CHECK(mse(ImageTensor(4, 4, 1, 10.0), ImageTensor(4, 4, 1, 26.0)) == 256.0);

  const ImageTensor y = check::random_image(rng, 12, 9, 1, 0.0, 255.0);
  double naive = 0.0;
  for (std::size_t r = 0; r < 12; ++r)
    for (std::size_t c = 0; c < 9; ++c) naive += (x(r, c) - y(r, c)) * (x(r, c) - y(r, c));
  CHECK(std::abs(mse(x, y) - naive / 108.0) <= 1e-12);
  CHECK_THROWS_AS(mse(x, ImageTensor(9, 12)), ShapeError);
}

TEST_CASE("psnr") {
  Rng rng(31);
  const ImageTensor x = check::random_image(rng, 16, 16, 1, 20.0, 230.0);
  CHECK(std::isinf(psnr(x, x)));
  CHECK(psnr(x, x) > 0.0);

  const double p16 = psnr(x, plus(x, 16.0));
  CHECK(std::abs(p16 - 24.0486) <= 1e-3);
  CHECK(std::abs(p16 - 10.0 * std::log10(65025.0 / 256.0)) <= 1e-9);

  const double p8 = psnr(x, plus(x, 8.0));
  CHECK(std::abs((p8 - p16) - 20.0 * std::log10(2.0)) <= 1e-9);

  CHECK(psnr(x, plus(x, 1.0), 1.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(psnr(x, x, 0.0), InvalidArgument);
}

TEST_CASE("ssim") {
  Rng rng(32);
  const ImageTensor x = check::random_image(rng, 16, 16, 1, 0.0, 255.0);

  CHECK(std::abs(ssim(x, x) - 1.0) <= 1e-12);
  CHECK(ssim(x, ImageTensor(16, 16, 1, 128.0)) < 1.0);

  const ImageTensor y = check::random_image(rng, 16, 16, 1, 0.0, 255.0);
  CHECK(std::abs(ssim(x, y) - naive_ssim(x, y)) <= 1e-9);

  SUBCASE("window") {
    const auto w = ssim_window(11, 1.5);
    double s = 0.0;
    for (double v : w) s += v;
    CHECK(std::abs(s - 1.0) <= 1e-15);
    CHECK(w[5] > w[4]);
    CHECK(w[0] == w[10]);
  }
  SUBCASE("too small") { CHECK_THROWS_AS(ssim(ImageTensor(10, 20), ImageTensor(10, 20)), DegenerateSizeError); }
  SUBCASE("channels are averaged") {
    const ImageTensor a = check::random_image(rng, 12, 12, 2, 0.0, 255.0);
    const ImageTensor b = check::random_image(rng, 12, 12, 2, 0.0, 255.0);
    const double want = (ssim(a.channel(0), b.channel(0)) + ssim(a.channel(1), b.channel(1))) / 2.0;
    CHECK(std::abs(ssim(a, b) - want) <= 1e-15);
  }
}

TEST_CASE("metric report json") {
  Rng rng(33);
  const ImageTensor x = check::random_image(rng, 16, 16, 1, 20.0, 230.0);
  CHECK(to_json(compute_metrics(x, x)) == "{\"psnr\": \"inf\", \"mse\": 0, \"ssim\": 1}");

  const MetricReport r = compute_metrics(x, plus(x, 16.0));
  CHECK(r.mse == doctest::Approx(256.0));
  const std::string j = to_json(r);
  CHECK(j.rfind("{\"psnr\": 24.04", 0) == 0);
  CHECK(j.find("\"mse\": 256") != std::string::npos);
}
