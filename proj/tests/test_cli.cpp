// Drives the irspec executable end to end through the shell.

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "irspec/check/oracles.hpp"
#include "irspec/contourlet.hpp"
#include "irspec/image.hpp"
#include "irspec/spectral.hpp"

namespace fs = std::filesystem;
using namespace irspec;

namespace {

const fs::path kWork = fs::temp_directory_path() / "irspec_cli_test";
const std::string kStock = std::string(IRSPEC_TEST_DATA) + "/stock_64.pgm";

struct Run {
  int code = -1;
  std::string out;  // stdout and stderr interleaved
};

Run cli(const std::string& args) {
  fs::create_directories(kWork);
  const fs::path log = kWork / "last.log";
  const std::string cmd = std::string("\"") + IRSPEC_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string path(const std::string& name) { return "\"" + (kWork / name).string() + "\""; }
fs::path file(const std::string& name) { return kWork / name; }

std::string field(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
  }
  return {};
}

double number(const std::string& s) { return s == "inf" ? INFINITY : std::strtod(s.c_str(), nullptr); }

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(cli("").code == 1);
  CHECK(cli("--help").code == 0);
  CHECK(cli("decompose --help").code == 0);
  CHECK(cli("frobnicate").code == 1);
  CHECK(cli("metrics onlyone.pgm").code == 1);
  CHECK(cli("degrade in.pgm out.pgm --scale 3").code == 1);
  CHECK(cli("spectrum a.pgm b.pgm c.csv --bins 0").code == 1);
  CHECK(cli("decompose " + kStock + " " + path("x.crg") + " -l 2").code == 1);
  const Run mismatch = cli("decompose \"" + kStock + "\" " + path("x.crg") + " --levels 2 --dirs 1,2,3");
  CHECK(mismatch.code == 1);
  CHECK(mismatch.out.find("--dirs") != std::string::npos);
}

TEST_CASE("decompose") {
  SUBCASE("4 levels of order 3") {
    const Run r = cli("decompose \"" + kStock + "\" " + path("d4.crg") + " --levels 4 --dirs 3,3,3,3");
    REQUIRE(r.code == 0);
    CHECK(field(r.out, "directional_subbands") == "32");
    const auto c = read_coefficients(file("d4.crg"));
    CHECK(c.subband_count() == 32);
    CHECK(c.base.height() == 4);
    CHECK(r.out.find("level 3: order 3, 8 subbands, 64x64, energy ") != std::string::npos);
  }
  SUBCASE("1 level of order 1") {
    const Run r = cli("decompose \"" + kStock + "\" " + path("d1.crg") + " --levels 1 --dirs 1");
    REQUIRE(r.code == 0);
    CHECK(field(r.out, "directional_subbands") == "2");
    CHECK(read_coefficients(file("d1.crg")).subband_count() == 2);
  }
  SUBCASE("defaults to the standard spec") {
    REQUIRE(cli("decompose \"" + kStock + "\" " + path("dd.crg")).code == 0);
    CHECK(read_coefficients(file("dd.crg")).level_spec == kDefaultLevelSpec);
  }
  SUBCASE("too many levels for the image") {
    const Run r = cli("decompose \"" + kStock + "\" " + path("bad.crg") + " --levels 7 --dirs 1,1,1,1,1,1,1");
    CHECK(r.code == 1);
    CHECK(r.out.find("error:") != std::string::npos);
  }
  SUBCASE("missing input") { CHECK(cli("decompose " + path("nope.pgm") + " " + path("n.crg")).code == 1); }
}

TEST_CASE("reconstruct") {
  REQUIRE(cli("decompose \"" + kStock + "\" " + path("rt.crg") + " --levels 4 --dirs 1,2,3,4").code == 0);

  SUBCASE("round trip psnr") {
    const Run r = cli("reconstruct " + path("rt.crg") + " " + path("rt.pgm") + " --reference \"" + kStock + "\"");
    REQUIRE(r.code == 0);
    CHECK(number(field(r.out, "psnr")) >= 48.0);
    CHECK(number(field(r.out, "psnr_unquantized")) >= 100.0);
    CHECK(load_pgm(file("rt.pgm")) == load_pgm(kStock));
  }
  SUBCASE("without a reference only the size is reported") {
    const Run r = cli("reconstruct " + path("rt.crg") + " " + path("rt2.pgm"));
    REQUIRE(r.code == 0);
    CHECK(field(r.out, "psnr").empty());
    CHECK(field(r.out, "size") == "64x64");
  }
  SUBCASE("zeroed coefficients give a black image") {
    auto c = read_coefficients(file("rt.crg"));
    for (double& v : c.base.data()) v = 0.0;
    for (auto& l : c.directional)
      for (auto& s : l.subbands)
        for (double& v : s.data()) v = 0.0;
    write_coefficients(c, file("zero.crg"));
    REQUIRE(cli("reconstruct " + path("zero.crg") + " " + path("zero.pgm")).code == 0);
    CHECK(load_pgm(file("zero.pgm")) == ImageTensor(64, 64, 1, 0.0));
  }
  SUBCASE("truncated and corrupt files") {
    const auto size = fs::file_size(file("rt.crg"));
    fs::copy_file(file("rt.crg"), file("trunc.crg"), fs::copy_options::overwrite_existing);
    fs::resize_file(file("trunc.crg"), size - 9);
    const Run t = cli("reconstruct " + path("trunc.crg") + " " + path("t.pgm"));
    CHECK(t.code == 1);
    CHECK(t.out.find("format error") != std::string::npos);

    {
      std::fstream f(file("trunc.crg"), std::ios::in | std::ios::out | std::ios::binary);
      f.write("XRG1", 4);
    }
    const Run m = cli("reconstruct " + path("trunc.crg") + " " + path("t.pgm"));
    CHECK(m.code == 1);
    CHECK(m.out.find("magic") != std::string::npos);
  }
  SUBCASE("reference of the wrong size") {
    save_pgm(ImageTensor(8, 8), file("small.pgm"));
    CHECK(cli("reconstruct " + path("rt.crg") + " " + path("r.pgm") + " --reference " + path("small.pgm")).code == 1);
  }
}

TEST_CASE("degrade") {
  SUBCASE("shape and equality with the library") {
    const Run r = cli("degrade \"" + kStock + "\" " + path("lr4.pgm") + " --scale 4");
    REQUIRE(r.code == 0);
    const ImageTensor lr = load_pgm(file("lr4.pgm"));
    CHECK(lr.height() == 16);
    CHECK(lr.width() == 16);
    const ImageTensor lib = bicubic_resize(load_pgm(kStock), 0.25);
    CHECK(lr == decode_pgm(encode_pgm(lib)));
  }
  SUBCASE("constant in, constant out") {
    save_pgm(ImageTensor(32, 24, 1, 77.0), file("const.pgm"));
    REQUIRE(cli("degrade " + path("const.pgm") + " " + path("const_lr.pgm") + " --scale 2").code == 0);
    CHECK(load_pgm(file("const_lr.pgm")) == ImageTensor(16, 12, 1, 77.0));
  }
  SUBCASE("directory mode, sorted output") {
    fs::remove_all(file("batch_in"));
    fs::remove_all(file("batch_out"));
    fs::create_directories(file("batch_in"));
    save_pgm(ImageTensor(8, 8, 1, 10.0), file("batch_in/b.pgm"));
    save_pgm(ImageTensor(16, 8, 1, 20.0), file("batch_in/a.pgm"));
    const Run r = cli("degrade " + path("batch_in") + " " + path("batch_out") + " --scale 2");
    REQUIRE(r.code == 0);
    CHECK(r.out == "a.pgm: 8x4\nb.pgm: 4x4\n");
    CHECK(load_pgm(file("batch_out/a.pgm")) == ImageTensor(8, 4, 1, 20.0));
  }
}

TEST_CASE("metrics") {
  SUBCASE("identical files") {
    const Run r = cli("metrics \"" + kStock + "\" \"" + kStock + "\"");
    REQUIRE(r.code == 0);
    CHECK(r.out == "{\"psnr\": \"inf\", \"mse\": 0, \"ssim\": 1}\n");
  }
  SUBCASE("uniform difference of 16") {
    ImageTensor img = load_pgm(kStock);
    for (double& v : img.data()) v += 16.0;
    save_pgm(img, file("plus16.pgm"));
    const Run r = cli("metrics \"" + kStock + "\" " + path("plus16.pgm"));
    REQUIRE(r.code == 0);
    const auto psnr_pos = r.out.find("\"psnr\": ") + 8;
    CHECK(std::abs(std::strtod(r.out.c_str() + psnr_pos, nullptr) - 24.0486) <= 1e-3);
    CHECK(r.out.find("\"mse\": 256,") != std::string::npos);

    const Run peak = cli("metrics \"" + kStock + "\" " + path("plus16.pgm") + " --peak 16");
    REQUIRE(peak.code == 0);
    CHECK(peak.out.rfind("{\"psnr\": 0,", 0) == 0);
  }
  SUBCASE("mismatched sizes") {
    save_pgm(ImageTensor(32, 32), file("m32.pgm"));
    const Run r = cli("metrics \"" + kStock + "\" " + path("m32.pgm"));
    CHECK(r.code == 1);
    CHECK(r.out.find("error:") != std::string::npos);
  }
}

TEST_CASE("spectrum") {
  SUBCASE("identical inputs") {
    const Run r = cli("spectrum \"" + kStock + "\" \"" + kStock + "\" " + path("same.csv") + " --bins 16");
    REQUIRE(r.code == 0);
    CHECK(std::abs(number(field(r.out, "spectral_fidelity_loss"))) <= 1e-12);
    const auto rows = lines_of(file("same.csv"));
    REQUIRE(rows.size() == 17);
    CHECK(rows[0] == "radius_lo,radius_hi,count,ref_mean_log_mag,test_mean_log_mag");
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto cols = split(rows[i], ',');
      REQUIRE(cols.size() == 5);
      CHECK(cols[3] == cols[4]);
    }
  }
  SUBCASE("blurred test loses high-frequency magnitude") {
    const ImageTensor ref = load_pgm(kStock);
    save_pgm(bicubic_resize(bicubic_resize(ref, 0.5), 2.0), file("blur.pgm"));
    const Run r = cli("spectrum \"" + kStock + "\" " + path("blur.pgm") + " " + path("blur.csv") + " --bins 16");
    REQUIRE(r.code == 0);
    CHECK(number(field(r.out, "spectral_fidelity_loss")) > 0.0);
    const auto rows = lines_of(file("blur.csv"));
    double deficit_top = 0.0;
    for (std::size_t i = 13; i <= 16; ++i) {
      const auto cols = split(rows[i], ',');
      deficit_top += number(cols[3]) - number(cols[4]);
    }
    CHECK(deficit_top > 0.0);
  }
  SUBCASE("one bin") {
    REQUIRE(cli("spectrum \"" + kStock + "\" \"" + kStock + "\" " + path("one.csv") + " --bins 1").code == 0);
    const auto rows = lines_of(file("one.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(split(rows[1], ',')[2] == "4096");
  }
}

TEST_CASE("selfcheck") {
  const Run a = cli("selfcheck --seed 7");
  const Run b = cli("selfcheck --seed 7");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("PASS contourlet perfect reconstruction") != std::string::npos);
  CHECK(a.out.find("FAIL") == std::string::npos);

  const Run bad = cli("selfcheck --corrupt-kernel");
  CHECK(bad.code == 2);
  CHECK(bad.out.find("FAIL contourlet perfect reconstruction") != std::string::npos);
}
