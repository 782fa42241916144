#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace polydeconv::fft {

using Complex = std::complex<double>;

bool is_power_of_two(std::size_t n) noexcept;
std::size_t next_power_of_two(std::size_t n) noexcept;

/// In-place iterative radix-2 transform; data.size() must be a power of two.
/// Forward uses e^{-2 pi i jk/N}, inverse e^{+2 pi i jk/N}; neither scales.
void radix2(std::span<Complex> data, bool inverse);

/// Unnormalized DFT of any length (Bluestein chirp-z for non powers of two).
std::vector<Complex> forward(std::span<const Complex> data);
/// Inverse DFT of any length including the 1/N factor.
std::vector<Complex> inverse(std::span<const Complex> data);

}  // namespace polydeconv::fft
