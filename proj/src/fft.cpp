#include "irspec/fft.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <unordered_map>
#include <utility>

namespace irspec::fft {

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

namespace {

// Forward twiddles exp(-2 pi i k / n) for k < n / 2; the inverse uses conjugates.
const std::vector<cplx>& twiddles(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::vector<cplx>> cache;
  auto [it, inserted] = cache.try_emplace(n);
  if (inserted) {
    it->second.resize(n / 2);
    // Evaluated directly rather than by recurrence to keep rounding error flat in n.
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      it->second[k] = {std::cos(ang), std::sin(ang)};
    }
  }
  return it->second;
}

void radix2(std::span<cplx> a, Direction dir) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const auto& tw = twiddles(n);
  const bool inverse = dir == Direction::inverse;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        // Plain product; std::complex operator* adds inf/nan recovery we do not need.
        const double wr = tw[k * stride].real();
        const double wi = inverse ? -tw[k * stride].imag() : tw[k * stride].imag();
        const cplx b = a[i + k + half];
        const cplx v{b.real() * wr - b.imag() * wi, b.real() * wi + b.imag() * wr};
        const cplx u = a[i + k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

struct ChirpPlan {
  std::size_t m = 0;
  std::vector<cplx> chirp;     // exp(sign * i * pi * k^2 / n)
  std::vector<cplx> kernel_f;  // transform of the conjugate chirp, zero padded to m
};

const ChirpPlan& chirp_plan(std::size_t n, Direction dir) {
  thread_local std::map<std::pair<std::size_t, Direction>, ChirpPlan> cache;
  auto [it, inserted] = cache.try_emplace({n, dir});
  ChirpPlan& p = it->second;
  if (!inserted) return p;

  p.m = 1;
  while (p.m < 2 * n - 1) p.m <<= 1;
  const double sign = dir == Direction::forward ? -1.0 : 1.0;
  p.chirp.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 reduced mod 2n keeps the angle small.
    const std::size_t k2 = (k * k) % (2 * n);
    const double ang = sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    p.chirp[k] = {std::cos(ang), std::sin(ang)};
  }
  p.kernel_f.assign(p.m, cplx{});
  p.kernel_f[0] = std::conj(p.chirp[0]);
  for (std::size_t k = 1; k < n; ++k) p.kernel_f[k] = p.kernel_f[p.m - k] = std::conj(p.chirp[k]);
  radix2(p.kernel_f, Direction::forward);
  return p;
}

void bluestein(std::span<cplx> a, Direction dir) {
  const std::size_t n = a.size();
  const ChirpPlan& p = chirp_plan(n, dir);
  std::vector<cplx> x(p.m);
  for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * p.chirp[k];
  radix2(x, Direction::forward);
  for (std::size_t k = 0; k < p.m; ++k) x[k] *= p.kernel_f[k];
  radix2(x, Direction::inverse);
  const double inv_m = 1.0 / static_cast<double>(p.m);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * inv_m * p.chirp[k];
}

}  // namespace

void transform(std::span<cplx> data, Direction dir) {
  if (data.size() <= 1) return;
  if (is_power_of_two(data.size())) {
    radix2(data, dir);
  } else {
    bluestein(data, dir);
  }
}

void transform_2d(std::span<cplx> grid, std::size_t rows, std::size_t cols, Direction dir) {
  for (std::size_t r = 0; r < rows; ++r) transform(grid.subspan(r * cols, cols), dir);
  std::vector<cplx> column(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) column[r] = grid[r * cols + c];
    transform(column, dir);
    for (std::size_t r = 0; r < rows; ++r) grid[r * cols + c] = column[r];
  }
}

}  // namespace irspec::fft
