#include "irspec/check/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "irspec/attention.hpp"
#include "irspec/check/oracles.hpp"
#include "irspec/contourlet.hpp"
#include "irspec/metrics.hpp"
#include "irspec/numfmt.hpp"
#include "irspec/prompt_loss.hpp"
#include "irspec/spectral.hpp"

namespace irspec::check {

namespace {

const char* symbol(Relation r) {
  switch (r) {
    case Relation::at_most:
      return "<=";
    case Relation::at_least:
      return ">=";
    case Relation::equals:
      return "==";
    case Relation::greater_than:
      return ">";
  }
  return "?";
}

// Separate stream per criterion so adding a check never shifts another's data.
Rng stream(const CheckOptions& opt, std::uint64_t salt) { return Rng(opt.seed * 0x9E3779B97F4A7C15ULL + salt); }

}  // namespace

CheckResult make_result(std::string criterion, std::string name, double measured, Relation rel, double threshold) {
  bool ok = false;
  switch (rel) {
    case Relation::at_most:
      ok = measured <= threshold;
      break;
    case Relation::at_least:
      ok = measured >= threshold;
      break;
    case Relation::equals:
      ok = measured == threshold;
      break;
    case Relation::greater_than:
      ok = measured > threshold;
      break;
  }
  return {std::move(criterion), std::move(name), measured, rel, threshold, ok};
}

std::vector<CheckResult> check_contourlet_reconstruction(const CheckOptions& opt) {
  const char* crit = "contourlet perfect reconstruction";
  Rng rng = stream(opt, 1);
  const GaussianKernel analysis = GaussianKernel::binomial5();
  const GaussianKernel synthesis =
      opt.corrupt_kernel ? GaussianKernel::unchecked({0.0725, 0.25, 0.355, 0.25, 0.0725}) : analysis;

  double ct_err = 0.0;
  double lp_err = 0.0;
  for (std::size_t i = 0; i < opt.pr_images; ++i) {
    const ImageTensor x = random_image(rng, 64, 64);
    for (std::size_t levels = 1; levels <= 4; ++levels) {
      lp_err = std::max(lp_err, max_abs_diff(lp_reconstruct(lp_decompose(x, levels, analysis), synthesis), x));
      for (unsigned d = 1; d <= 4; ++d) {
        const std::vector<unsigned> spec(levels, d);
        const auto coeffs = contourlet_decompose(x, spec, analysis);
        ct_err = std::max(ct_err, max_abs_diff(contourlet_reconstruct(coeffs, synthesis), x));
      }
    }
  }
  return {make_result(crit, "max abs error, L 1..4 x d 1..4, 64x64", ct_err, Relation::at_most, 1e-6),
          make_result(crit, "laplacian pyramid alone, max abs error", lp_err, Relation::at_most, 1e-9)};
}

std::vector<CheckResult> check_dft_oracle(const CheckOptions& opt) {
  const char* crit = "dft oracle equivalence";
  Rng rng = stream(opt, 2);
  double dft_err = 0.0;
  double parseval = 0.0;
  for (int i = 0; i < 20; ++i) {
    const ImageTensor x = random_image(rng, 8, 8);
    const Spectrum fast = dft2(x);
    const Spectrum slow = naive_dft2(x);
    double spec_energy = 0.0;
    for (std::size_t k = 0; k < fast.bins.size(); ++k) {
      dft_err = std::max(dft_err, std::abs(fast.bins[k] - slow.bins[k]));
      spec_energy += std::norm(fast.bins[k]);
    }
    const double spatial = 64.0 * sum_of_squares(x);
    parseval = std::max(parseval, std::abs(spec_energy - spatial) / spatial);
  }
  return {make_result(crit, "fast vs naive double sum, 20 random 8x8, max abs error", dft_err, Relation::at_most, 1e-9),
          make_result(crit, "parseval relative error", parseval, Relation::at_most, 1e-6)};
}

std::vector<CheckResult> check_spectral_fidelity(const CheckOptions& opt) {
  const char* crit = "spectral fidelity loss";
  Rng rng = stream(opt, 3);
  std::vector<CheckResult> out;

  const ImageTensor same = random_image(rng, 16, 16);
  out.push_back(make_result(crit, "L_SF(I, I)", spectral_fidelity_loss(same, same), Relation::equals, 0.0));

  double pipeline_err = 0.0;
  for (int i = 0; i < 10; ++i) {
    const ImageTensor a = random_image(rng, 16, 16);
    const ImageTensor b = random_image(rng, 16, 16);
    pipeline_err = std::max(pipeline_err, std::abs(spectral_fidelity_loss(a, b) - naive_spectral_fidelity_loss(a, b)));
  }
  out.push_back(make_result(crit, "pipeline vs naive oracle, random 16x16, max abs error", pipeline_err, Relation::at_most,
                     1e-9));

  double grad_rel = 0.0;
  for (int i = 0; i < 5; ++i) {
    const ImageTensor hr = random_image(rng, 8, 8);
    const ImageTensor sr = random_image(rng, 8, 8);
    const ImageTensor analytic = spectral_fidelity_grad(hr, sr);
    const ImageTensor numeric = finite_difference_grad(
        [&](const ImageTensor& s) { return spectral_fidelity_loss(hr, s); }, sr, 1e-5);
    for (std::size_t k = 0; k < analytic.size(); ++k) {
      const double a = analytic.data()[k];
      const double f = numeric.data()[k];
      const double scale = std::max(std::abs(a), std::abs(f));
      if (scale > 0.0) grad_rel = std::max(grad_rel, std::abs(a - f) / scale);
    }
  }
  out.push_back(make_result(crit, "gradient vs central differences (h=1e-5), max relative error", grad_rel,
                     Relation::at_most, 1e-4));
  return out;
}

std::vector<CheckResult> check_metric_sanity(const CheckOptions& opt) {
  const char* crit = "metric sanity";
  Rng rng = stream(opt, 4);
  const ImageTensor x = random_image(rng, 32, 32, 1, 16.0, 239.0);
  ImageTensor shifted = x;
  for (double& v : shifted.data()) v += 16.0;

  const double expected_psnr = 10.0 * std::log10(65025.0 / 256.0);
  const double p = psnr(x, shifted, 255.0);

  const ImageTensor y = random_image(rng, 32, 32, 1, 0.0, 255.0);
  double naive = 0.0;
  for (std::size_t r = 0; r < x.height(); ++r)
    for (std::size_t c = 0; c < x.width(); ++c) naive += (x(r, c) - y(r, c)) * (x(r, c) - y(r, c));
  naive /= static_cast<double>(x.size());

  return {make_result(crit, "psnr uniform-16 difference vs 24.0486 dB, abs error", std::abs(p - 24.0486), Relation::at_most,
               1e-3),
          make_result(crit, "psnr uniform-16 vs closed form, abs error", std::abs(p - expected_psnr), Relation::at_most, 1e-9),
          make_result(crit, "|ssim(x, x) - 1|", std::abs(ssim(x, x) - 1.0), Relation::at_most, 1e-12),
          make_result(crit, "mse vs naive loop, abs error", std::abs(mse(x, y) - naive), Relation::at_most, 1e-12)};
}

std::vector<CheckResult> check_attention_invariants(const CheckOptions& opt) {
  using namespace attention;
  const char* crit = "attention invariants";
  Rng rng = stream(opt, 5);
  std::uniform_int_distribution<int> pick(0, 1 << 20);

  double row_err = 0.0;
  double entry_violations = 0.0;
  double shape_failures = 0.0;
  auto audit = [&](const Trace& t) {
    for (const Matrix& a : t.softmax) {
      for (std::size_t r = 0; r < a.rows(); ++r) {
        const auto row = a.row(r);
        row_err = std::max(row_err, std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0));
        for (double v : row) {
          if (!(v > 0.0 && v < 1.0) && row.size() > 1) entry_violations += 1.0;
        }
      }
    }
  };

  const std::size_t windows[] = {1, 2, 4};
  const std::size_t channel_choices[] = {2, 4, 6, 8};
  for (int cfg = 0; cfg < 10; ++cfg) {
    const std::size_t k = windows[pick(rng) % 3];
    const std::size_t ch = channel_choices[pick(rng) % 4];
    const std::size_t heads = (ch % 2 == 0 && pick(rng) % 2) ? 2 : 1;
    const std::size_t h = k * (1 + pick(rng) % 3);
    const std::size_t w = k * (1 + pick(rng) % 3);
    const std::size_t tokens = (k * k) % 2 == 0 && pick(rng) % 2 ? 2 : 1;
    const FeatureMap x = random_image(rng, h, w, ch, -1.0, 1.0);

    Trace trace;
    const auto ap = random_attention_params(rng, ch, heads, k, static_cast<double>(h * w));
    const auto sp = random_sfnn_params(rng, ch, ch);
    const auto gp = random_glia_params(rng, ch, heads, k, tokens);
    for (const FeatureMap& y : {sab_forward(x, ap, &trace), cab_forward(x, ap, &trace), sfnn_forward(x, sp),
                                glia_forward(x, gp, &trace)}) {
      if (!y.same_shape(x)) shape_failures += 1.0;
    }
    audit(trace);
  }

  // Spatial permutation equivariance of channel attention.
  const FeatureMap x = random_image(rng, 6, 5, 4, -1.0, 1.0);
  const auto ap = random_attention_params(rng, 4, 2, 1, 8.0);
  std::vector<std::size_t> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto permute = [&](const FeatureMap& m) {
    FeatureMap out(m.height(), m.width(), m.channels());
    for (std::size_t i = 0; i < perm.size(); ++i)
      for (std::size_t c = 0; c < m.channels(); ++c) out.data()[i * m.channels() + c] = m.data()[perm[i] * m.channels() + c];
    return out;
  };
  const double equivariance = max_abs_diff(cab_forward(permute(x), ap), permute(cab_forward(x, ap)));

  // All residual updates disabled and the token path zeroed.
  auto gp = random_glia_params(rng, 4, 2, 2, 1);
  gp.gamma1 = gp.gamma2 = gp.gamma3 = gp.gamma4 = 0.0;
  std::fill(gp.token_conv.weights.begin(), gp.token_conv.weights.end(), 0.0);
  const FeatureMap gx = random_image(rng, 4, 6, 4, -1.0, 1.0);
  const double glia_identity = max_abs_diff(glia_forward(gx, gp), gx);

  return {make_result(crit, "softmax rows, max |sum - 1|", row_err, Relation::at_most, 1e-12),
          make_result(crit, "softmax entries outside (0, 1)", entry_violations, Relation::equals, 0.0),
          make_result(crit, "shape changes over 10 random configurations x 4 blocks", shape_failures, Relation::equals, 0.0),
          make_result(crit, "cab spatial permutation equivariance, max abs error", equivariance, Relation::at_most, 1e-12),
          make_result(crit, "glia with zero gammas and token path, max abs deviation from input", glia_identity,
               Relation::equals, 0.0)};
}

std::vector<CheckResult> check_prompt_algebra(const CheckOptions& opt) {
  const char* crit = "prompt-loss algebra";
  Rng rng = stream(opt, 6);
  constexpr std::size_t dim = 16;
  const double e = std::numbers::e;

  const PromptPair orthogonal{basis(dim, 1), basis(dim, 2)};
  const double equidistant = classify_prob(basis(dim, 0), orthogonal);

  const PromptPair antipodal{basis(dim, 0), basis(dim, 0, -1.0)};
  const double y_anti = classify_prob(basis(dim, 0), antipodal);

  const FixedImageEmbedder provider(basis(dim, 0));
  const ImageTensor dummy(4, 4, 1, 0.0);
  const double degrad = degradation_loss(std::span<const ImageTensor>(&dummy, 1), antipodal, provider);

  double swap_mismatches = 0.0;
  std::normal_distribution<double> gauss;
  for (int i = 0; i < 1000; ++i) {
    Embedding a(dim), b(dim), img(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      a[k] = gauss(rng);
      b[k] = gauss(rng);
      img[k] = gauss(rng);
    }
    const PromptPair p{normalized(a), normalized(b)};
    const PromptPair swapped{p.negative, p.positive};
    const double y = classify_prob(img, p);
    const double y_swapped = classify_prob(img, swapped);
    if (y_swapped != 1.0 - y || y != 1.0 - y_swapped) swap_mismatches += 1.0;
  }

  return {make_result(crit, "equidistant y_hat", equidistant, Relation::equals, 0.5),
          make_result(crit, "antipodal y_hat vs e/(e+1/e), abs error", std::abs(y_anti - e / (e + 1.0 / e)), Relation::at_most,
               1e-9),
          make_result(crit, "antipodal degradation loss vs e^-2, abs error", std::abs(degrad - std::exp(-2.0)),
               Relation::at_most, 1e-9),
          make_result(crit, "swap symmetry mismatches over 1000 random pairs", swap_mismatches, Relation::equals, 0.0)};
}

std::vector<CheckResult> check_energy_concentration(const CheckOptions& /*opt*/) {
  const char* crit = "energy concentration";
  const ImageTensor edge = straight_edge_image(64, 30.0);
  const auto coeffs = contourlet_decompose(edge, kDefaultLevelSpec);
  std::vector<double> all(coeffs.base.data().begin(), coeffs.base.data().end());
  for (const auto& level : coeffs.directional)
    for (const auto& s : level.subbands) all.insert(all.end(), s.data().begin(), s.data().end());
  const double contourlet = top_energy_fraction(std::move(all), 0.01);
  const double separable = top_energy_fraction(haar_coefficients(edge, 2), 0.01);
  return {make_result(crit, "top-1% energy fraction, contourlet [3,3,3,3] vs 2-level separable Haar", contourlet,
               Relation::greater_than, separable)};
}

std::vector<CheckResult> run_all_checks(const CheckOptions& opt) {
  std::vector<CheckResult> all;
  for (auto* fn : {check_contourlet_reconstruction, check_dft_oracle, check_spectral_fidelity, check_metric_sanity,
                   check_attention_invariants, check_prompt_algebra, check_energy_concentration}) {
    auto part = fn(opt);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

void print_results(std::ostream& os, const std::vector<CheckResult>& results) {
  for (const auto& r : results) {
    os << (r.passed ? "PASS " : "FAIL ") << r.criterion << " / " << r.name << ": " << fmt17(r.measured) << ' '
       << symbol(r.relation) << ' ' << fmt17(r.threshold) << '\n';
  }
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

}  // namespace irspec::check
