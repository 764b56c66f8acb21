#include "latentdyn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "latentdyn/error.hpp"

namespace latentdyn {

void fft_inplace(std::vector<std::complex<double>>& buf) {
  const std::size_t n = buf.size();
  if (!is_power_of_two(n)) fail(ErrorCode::Precondition, "FFT length " + std::to_string(n) + " is not a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(buf[i], buf[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    // Twiddles evaluated directly, not by recurrence.
    std::vector<std::complex<double>> tw(half);
    for (std::size_t k = 0; k < half; ++k) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
      tw[k] = {std::cos(ang), std::sin(ang)};
    }
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const auto u = buf[start + k];
        const auto v = buf[start + k + half] * tw[k];
        buf[start + k] = u + v;
        buf[start + k + half] = u - v;
      }
    }
  }
}

Window parse_window(std::string_view name) {
  if (name == "hann") return Window::Hann;
  if (name == "rect") return Window::Rect;
  fail(ErrorCode::Precondition, "unknown window '" + std::string(name) + "' (expected hann or rect)");
}

std::string_view window_name(Window w) noexcept { return w == Window::Hann ? "hann" : "rect"; }

std::vector<double> make_window(Window w, std::size_t n) {
  std::vector<double> out(n, 1.0);
  if (w == Window::Hann) {
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    }
  }
  return out;
}

Psd welch_psd(std::span<const double> x, const WelchOptions& opt) {
  const std::size_t len = opt.segment_len;
  if (!is_power_of_two(len) || len < 8) {
    fail(ErrorCode::Precondition, "segment length " + std::to_string(len) + " must be a power of two >= 8");
  }
  if (!(opt.overlap >= 0.0 && opt.overlap < 1.0)) {
    fail(ErrorCode::Precondition, "overlap " + std::to_string(opt.overlap) + " outside [0, 1)");
  }
  if (x.size() < len) {
    fail(ErrorCode::SeriesTooShort,
         "series of length " + std::to_string(x.size()) + " shorter than segment length " + std::to_string(len));
  }

  const auto noverlap = static_cast<std::size_t>(std::floor(static_cast<double>(len) * opt.overlap));
  const std::size_t hop = std::max<std::size_t>(1, len - noverlap);
  const auto window = make_window(opt.window, len);
  double window_power = 0.0;
  for (double w : window) window_power += w * w;

  const std::size_t bins = len / 2 + 1;
  Psd out;
  out.freqs.resize(bins);
  out.psd.assign(bins, 0.0);
  for (std::size_t k = 0; k < bins; ++k) out.freqs[k] = static_cast<double>(k) / static_cast<double>(len);

  std::vector<std::complex<double>> buf(len);
  for (std::size_t start = 0; start + len <= x.size(); start += hop) {
    for (std::size_t i = 0; i < len; ++i) buf[i] = {x[start + i] * window[i], 0.0};
    fft_inplace(buf);
    for (std::size_t k = 0; k < bins; ++k) {
      double p = std::norm(buf[k]) / window_power;
      if (k != 0 && k != len / 2) p *= 2.0;
      out.psd[k] += p;
    }
    ++out.segments;
  }
  for (auto& p : out.psd) p /= static_cast<double>(out.segments);
  return out;
}

double psd_mass(const Psd& p) {
  if (p.freqs.size() < 2) return 0.0;
  const double df = p.freqs[1] - p.freqs[0];
  double s = 0.0;
  for (double v : p.psd) s += v;
  return s * df;
}

double spectral_entropy(std::span<const double> psd) {
  if (psd.size() < 2) return 0.0;
  double total = 0.0;
  for (std::size_t i = 1; i < psd.size(); ++i) total += psd[i];
  const std::size_t count = psd.size() - 1;
  if (total <= 0.0 || count < 2) return 0.0;
  double h = 0.0;
  for (std::size_t i = 1; i < psd.size(); ++i) {
    const double p = psd[i] / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  const double e = h / std::log(static_cast<double>(count));
  return std::clamp(e, 0.0, 1.0);
}

SpectralReport spectral_metrics(std::vector<double> freqs, std::vector<double> psd, double cutoff) {
  if (!(cutoff > 0.0 && cutoff < 0.5)) {
    fail(ErrorCode::Precondition, "cutoff " + std::to_string(cutoff) + " outside (0, 0.5)");
  }
  if (freqs.size() != psd.size() || freqs.size() < 2 || freqs[0] != 0.0) {
    fail(ErrorCode::Precondition, "spectrum needs matching freqs/psd arrays starting at DC");
  }
  SpectralReport r;
  r.cutoff = cutoff;

  std::size_t best = 1;
  for (std::size_t i = 1; i < psd.size(); ++i) {
    if (psd[i] > psd[best]) best = i;
    if (freqs[i] <= cutoff) {
      r.low_energy += psd[i];
    } else {
      r.high_energy += psd[i];
    }
  }
  r.dominant_freq = (r.low_energy + r.high_energy) > 0.0 ? freqs[best] : 0.0;
  r.spectral_entropy = spectral_entropy(psd);
  if (r.high_energy > 0.0) {
    r.band_ratio = r.low_energy / r.high_energy;
  } else {
    r.band_ratio = std::numeric_limits<double>::infinity();
    r.band_ratio_infinite = true;
  }
  r.freqs = std::move(freqs);
  r.psd = std::move(psd);
  return r;
}

SpectralReport analyze_spectrum(std::span<const double> x, double cutoff, const WelchOptions& opt) {
  if (!(cutoff > 0.0 && cutoff < 0.5)) {
    fail(ErrorCode::Precondition, "cutoff " + std::to_string(cutoff) + " outside (0, 0.5)");
  }
  auto p = welch_psd(x, opt);
  return spectral_metrics(std::move(p.freqs), std::move(p.psd), cutoff);
}

}  // namespace latentdyn
