// irspec command-line front end.
//
// Exit codes: 0 success, 1 usage or input error, 2 self-check failure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "irspec/check/selfcheck.hpp"
#include "irspec/contourlet.hpp"
#include "irspec/error.hpp"
#include "irspec/image.hpp"
#include "irspec/metrics.hpp"
#include "irspec/numfmt.hpp"
#include "irspec/spectral.hpp"

namespace fs = std::filesystem;
using namespace irspec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitSelfcheck = 2;

struct DecomposeArgs {
  std::string input, output;
  std::size_t levels = 0;
  std::vector<unsigned> dirs;
};

struct ReconstructArgs {
  std::string coeffs, output, reference;
};

struct DegradeArgs {
  std::string input, output;
  int scale = 0;
};

struct MetricsArgs {
  std::string reference, test;
  double peak = kDefaultPeak;
};

struct SpectrumArgs {
  std::string reference, test, csv;
  std::size_t bins = kDefaultRadialBins;
};

struct SelfcheckArgs {
  std::uint64_t seed = check::CheckOptions{}.seed;
  bool corrupt_kernel = false;
};

double energy(const DirectionalSubbands& s) {
  double e = 0.0;
  for (const auto& b : s.subbands) e += sum_of_squares(b);
  return e;
}

int cmd_decompose(DecomposeArgs a) {
  if (a.levels == 0 && a.dirs.empty()) a.dirs = kDefaultLevelSpec;
  if (a.dirs.empty()) a.dirs.assign(a.levels, 3);
  if (a.levels == 0) a.levels = a.dirs.size();
  if (a.dirs.size() != a.levels) {
    throw InvalidArgument("--dirs lists " + std::to_string(a.dirs.size()) + " orders but --levels is " +
                          std::to_string(a.levels));
  }
  const ImageTensor img = load_pgm(a.input);
  const auto coeffs = contourlet_decompose(img, a.dirs);
  write_coefficients(coeffs, a.output);

  std::cout << "levels: " << coeffs.directional.size() << '\n';
  std::cout << "directional_subbands: " << coeffs.subband_count() << '\n';
  std::cout << "base: " << coeffs.base.height() << 'x' << coeffs.base.width()
            << " energy " << fmt17(sum_of_squares(coeffs.base)) << '\n';
  for (std::size_t l = 0; l < coeffs.directional.size(); ++l) {
    const auto& s = coeffs.directional[l];
    std::cout << "level " << l << ": order " << s.order << ", " << s.count() << " subbands, "
              << s.subbands.front().height() << 'x' << s.subbands.front().width() << ", energy "
              << fmt17(energy(s)) << '\n';
  }
  return kExitOk;
}

int cmd_reconstruct(const ReconstructArgs& a) {
  const auto coeffs = read_coefficients(a.coeffs);
  const ImageTensor out = contourlet_reconstruct(coeffs);
  save_pgm(out, a.output);
  std::cout << "size: " << out.height() << 'x' << out.width() << '\n';
  if (!a.reference.empty()) {
    const ImageTensor ref = load_pgm(a.reference);
    require_same_shape(ref, out, "reconstruct --reference");
    // Against both the in-memory result and what was actually written.
    const double raw = psnr(ref, out);
    const double written = psnr(ref, load_pgm(a.output));
    std::cout << "psnr: " << (std::isinf(written) ? std::string("inf") : fmt17(written)) << '\n';
    std::cout << "psnr_unquantized: " << (std::isinf(raw) ? std::string("inf") : fmt17(raw)) << '\n';
  }
  return kExitOk;
}

ImageTensor degrade_one(const fs::path& in, const fs::path& out, int scale) {
  const ImageTensor lr = bicubic_resize(load_pgm(in), 1.0 / scale);
  save_pgm(lr, out);
  return lr;
}

int cmd_degrade(const DegradeArgs& a) {
  if (a.scale != 2 && a.scale != 4) throw InvalidArgument("--scale must be 2 or 4");
  if (fs::is_directory(a.input)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(a.input)) {
      if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    fs::create_directories(a.output);
    for (const auto& f : files) {
      const ImageTensor lr = degrade_one(f, fs::path(a.output) / f.filename(), a.scale);
      std::cout << f.filename().string() << ": " << lr.height() << 'x' << lr.width() << '\n';
    }
    return kExitOk;
  }
  const ImageTensor lr = degrade_one(a.input, a.output, a.scale);
  std::cout << "size: " << lr.height() << 'x' << lr.width() << '\n';
  return kExitOk;
}

int cmd_metrics(const MetricsArgs& a) {
  if (!(a.peak > 0.0) || !std::isfinite(a.peak)) throw InvalidArgument("--peak must be positive");
  const ImageTensor ref = load_pgm(a.reference);
  const ImageTensor test = load_pgm(a.test);
  std::cout << to_json(compute_metrics(ref, test, a.peak)) << '\n';
  return kExitOk;
}

int cmd_spectrum(const SpectrumArgs& a) {
  const ImageTensor ref = load_pgm(a.reference);
  const ImageTensor test = load_pgm(a.test);
  require_same_shape(ref, test, "spectrum");
  const auto hr = radial_spectrum(ref, a.bins);
  const auto ht = radial_spectrum(test, a.bins);

  std::ofstream csv(a.csv);
  if (!csv) throw IoError("cannot open " + a.csv + " for writing");
  csv << "radius_lo,radius_hi,count,ref_mean_log_mag,test_mean_log_mag\n";
  for (std::size_t b = 0; b < hr.bins(); ++b) {
    csv << fmt17(hr.bin_edges[b]) << ',' << fmt17(hr.bin_edges[b + 1]) << ',' << hr.counts[b] << ','
        << fmt17(hr.mean_log_magnitude[b]) << ',' << fmt17(ht.mean_log_magnitude[b]) << '\n';
  }
  if (!csv) throw IoError("failed writing " + a.csv);
  std::cout << "spectral_fidelity_loss: " << fmt17(spectral_fidelity_loss(ref, test)) << '\n';
  return kExitOk;
}

int cmd_selfcheck(const SelfcheckArgs& a) {
  check::CheckOptions opt;
  opt.seed = a.seed;
  opt.corrupt_kernel = a.corrupt_kernel;
  const auto results = check::run_all_checks(opt);
  check::print_results(std::cout, results);
  const bool ok = check::all_passed(results);
  std::cout << (ok ? "selfcheck: all checks passed" : "selfcheck: FAILED") << '\n';
  return ok ? kExitOk : kExitSelfcheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contourlet, spectral and metric toolkit for infrared super-resolution experiments"};
  app.require_subcommand(1);

  DecomposeArgs dec;
  auto* c_dec = app.add_subcommand("decompose", "Contourlet-decompose a PGM into a CRG1 coefficient file");
  c_dec->add_option("input", dec.input, "Input PGM")->required();
  c_dec->add_option("output", dec.output, "Output coefficient file")->required();
  c_dec->add_option("--levels", dec.levels, "Pyramid levels (default: number of --dirs, or 4)");
  c_dec->add_option("--dirs", dec.dirs, "Direction orders per level, coarse to fine, comma separated")
      ->delimiter(',');

  ReconstructArgs rec;
  auto* c_rec = app.add_subcommand("reconstruct", "Invert a CRG1 coefficient file to a PGM");
  c_rec->add_option("coeffs", rec.coeffs, "Coefficient file")->required();
  c_rec->add_option("output", rec.output, "Output PGM")->required();
  c_rec->add_option("--reference", rec.reference, "PGM to report PSNR against");

  DegradeArgs deg;
  auto* c_deg = app.add_subcommand("degrade", "Bicubic downscale by 2 or 4 (file or directory of .pgm)");
  c_deg->add_option("input", deg.input, "Input PGM or directory")->required();
  c_deg->add_option("output", deg.output, "Output PGM or directory")->required();
  c_deg->add_option("--scale", deg.scale, "Downscale factor")->required()->check(CLI::IsMember({2, 4}));

  MetricsArgs met;
  auto* c_met = app.add_subcommand("metrics", "PSNR / MSE / SSIM report as JSON");
  c_met->add_option("reference", met.reference, "Reference PGM")->required();
  c_met->add_option("test", met.test, "Test PGM")->required();
  c_met->add_option("--peak", met.peak, "Peak signal value for PSNR");

  SpectrumArgs spe;
  auto* c_spe = app.add_subcommand("spectrum", "Radial log-spectrum histograms and spectral fidelity loss");
  c_spe->add_option("reference", spe.reference, "Reference PGM")->required();
  c_spe->add_option("test", spe.test, "Test PGM")->required();
  c_spe->add_option("csv", spe.csv, "Output CSV")->required();
  c_spe->add_option("--bins", spe.bins, "Radial bins")->check(CLI::PositiveNumber);

  SelfcheckArgs sel;
  auto* c_sel = app.add_subcommand("selfcheck", "Run the numerical acceptance suite");
  c_sel->add_option("--seed", sel.seed, "Random seed");
  c_sel->add_flag("--corrupt-kernel", sel.corrupt_kernel, "Reconstruct with a perturbed kernel")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*c_dec) return cmd_decompose(dec);
    if (*c_rec) return cmd_reconstruct(rec);
    if (*c_deg) return cmd_degrade(deg);
    if (*c_met) return cmd_metrics(met);
    if (*c_spe) return cmd_spectrum(spe);
    if (*c_sel) return cmd_selfcheck(sel);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
