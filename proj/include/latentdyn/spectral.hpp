#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace latentdyn {

/// In-place iterative radix-2 DFT, X_k = sum_n x_n exp(-2 pi i k n / N).
/// N must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& buf);

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

enum class Window { Hann, Rect };

Window parse_window(std::string_view name);
std::string_view window_name(Window w) noexcept;
/// Periodic window of length n.
std::vector<double> make_window(Window w, std::size_t n);

struct WelchOptions {
  std::size_t segment_len = 256;
  double overlap = 0.5;
  Window window = Window::Hann;
};

struct Psd {
  std::vector<double> freqs;  // cycles/step, 0 .. 0.5
  std::vector<double> psd;    // one-sided density
  std::size_t segments = 0;
};

/// Welch estimate: mean of windowed periodograms over segments with hop
/// segment_len * (1 - overlap). Scaled as a one-sided density in
/// cycles/step, so sum(psd) / segment_len is the signal power.
Psd welch_psd(std::span<const double> x, const WelchOptions& opt = {});

/// Total power sum(psd) * df of a one-sided density on a uniform grid.
double psd_mass(const Psd& p);

struct SpectralReport {
  std::vector<double> freqs;
  std::vector<double> psd;
  double dominant_freq = 0.0;
  double spectral_entropy = 0.0;
  double band_ratio = 0.0;
  bool band_ratio_infinite = false;
  double cutoff = 0.1;
  double low_energy = 0.0;
  double high_energy = 0.0;
};

/// Shannon entropy of the non-DC bins normalized to a distribution, divided
/// by log of their count. Zero when the non-DC power vanishes.
double spectral_entropy(std::span<const double> psd);

/// Metrics over an existing spectrum; freqs[0] must be the DC bin.
SpectralReport spectral_metrics(std::vector<double> freqs, std::vector<double> psd, double cutoff);

SpectralReport analyze_spectrum(std::span<const double> x, double cutoff = 0.1, const WelchOptions& opt = {});

}  // namespace latentdyn
