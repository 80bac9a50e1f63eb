#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace irspec::fft {

using cplx = std::complex<double>;

enum class Direction { forward, inverse };

/// Unnormalized in-place DFT of any length. Powers of two take the iterative
/// radix-2 path; other lengths go through Bluestein's chirp-z convolution.
/// forward uses e^{-i 2 pi k n / N}; inverse uses the conjugate kernel and
/// does NOT divide by N.
void transform(std::span<cplx> data, Direction dir);

/// Row-major 2D DFT over a rows x cols grid (unnormalized in both directions).
void transform_2d(std::span<cplx> grid, std::size_t rows, std::size_t cols, Direction dir);

bool is_power_of_two(std::size_t n) noexcept;

}  // namespace irspec::fft
