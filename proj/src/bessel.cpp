#include "latgram/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <string>

#include "latgram/error.hpp"

namespace latgram::bessel {
namespace {

// Below this argument every order is summed from its power series.
constexpr double kSeriesLimit = 12.0;

// Above this argument (and z >= kHankelOrderFactor * n^2) the large-argument
// expansion converges to machine precision within a handful of terms.
constexpr double kHankelLimit = 2000.0;
constexpr double kHankelOrderFactor = 25.0;

constexpr double kRescale = 1e250;

void check_argument(double z) {
  if (!(z >= 0.0))
    throw InvalidArgument("Bessel argument must be non-negative, got " +
                          std::to_string(z));
}

// log of e^{-z} (z/2)^n / n!, the scaled leading series term. Requires z > 0.
double log_leading_term(int n, double z) {
  return n * std::log(0.5 * z) - std::lgamma(n + 1.0) - z;
}

// sum_{k>=0} (z^2/4)^k n! / (k! (n+k)!), the series normalised by its
// leading term; always >= 1.
double series_tail(int n, double z) {
  const double q = 0.25 * z * z;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 100000; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k + n));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

double scaled_series(int n, double z) {
  if (z == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(log_leading_term(n, z)) * series_tail(n, z);
}

// Hankel expansion of e^{-z} I_n(z) for z much larger than n^2.
double scaled_hankel(int n, double z) {
  const double mu = 4.0 * static_cast<double>(n) * static_cast<double>(n);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (k * 8.0 * z);
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

bool hankel_applies(int n, double z) {
  return z >= kHankelLimit &&
         z >= kHankelOrderFactor * static_cast<double>(n) * static_cast<double>(n);
}

// Start order for backward recurrence. I_k(z) decays roughly like
// exp(-k^2 / 2z) for k < z and faster beyond, so the offset below leaves the
// discarded tail many orders of magnitude under double precision.
int miller_start(int n_max, double z) {
  return n_max + 20 + static_cast<int>(std::ceil(std::sqrt(120.0 * std::max(z, 1.0))));
}

// Miller backward recurrence I_{k-1} = (2k/z) I_k + I_{k+1}, normalised with
// e^{-z} [I_0 + 2 sum_k I_k] = 1. Writes e^{-z} I_k for k < out.size().
void scaled_miller(double z, std::span<double> out) {
  const int n_max = static_cast<int>(out.size()) - 1;
  const int start = miller_start(n_max, z);
  const double two_over_z = 2.0 / z;
  double above = 0.0;   // f_{k+1}
  double current = 1e-300;  // f_k
  double sum = 0.0;     // 2 * sum_{j > k} f_j, accumulated as we go
  std::fill(out.begin(), out.end(), 0.0);
  for (int k = start; k >= 1; --k) {
    if (k <= n_max) out[static_cast<std::size_t>(k)] = current;
    sum += 2.0 * current;
    const double below = k * two_over_z * current + above;
    above = current;
    current = below;
    if (current > kRescale) {
      current /= kRescale;
      above /= kRescale;
      sum /= kRescale;
      for (int j = k; j <= n_max; ++j) out[static_cast<std::size_t>(j)] /= kRescale;
    }
  }
  out[0] = current;
  sum += current;
  for (auto& v : out) v /= sum;
}

}  // namespace

double i_scaled(int n, double z) {
  check_argument(z);
  n = std::abs(n);
  if (z == 0.0) return n == 0 ? 1.0 : 0.0;
  if (z <= std::max(kSeriesLimit, 2.0 * n)) return scaled_series(n, z);
  if (hankel_applies(n, z)) return scaled_hankel(n, z);
  std::vector<double> seq(static_cast<std::size_t>(n) + 1);
  scaled_miller(z, seq);
  return seq.back();
}

double log_i_scaled(int n, double z) {
  check_argument(z);
  n = std::abs(n);
  if (z == 0.0)
    return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (z <= std::max(kSeriesLimit, 2.0 * n))
    return log_leading_term(n, z) + std::log(series_tail(n, z));
  // Outside the series region z > 2n, where the scaled value stays far above
  // the underflow threshold.
  return std::log(i_scaled(n, z));
}

double i(int n, double z) {
  check_argument(z);
  n = std::abs(n);
  if (z == 0.0) return n == 0 ? 1.0 : 0.0;
  const double scaled = i_scaled(n, z);
  if (scaled == 0.0) {
    // Underflowed scaled value; the unscaled one may still be representable.
    const double v = std::exp(log_i_scaled(n, z) + z);
    if (std::isinf(v)) throw RangeError("I_n(z) overflows; use i_scaled");
    return v;
  }
  const double v = z < 700.0 ? scaled * std::exp(z) : std::exp(std::log(scaled) + z);
  if (std::isinf(v))
    throw RangeError("I_" + std::to_string(n) + "(" + std::to_string(z) +
                     ") overflows a double; use i_scaled");
  return v;
}

void i_scaled_sequence(double z, std::span<double> out) {
  check_argument(z);
  if (out.empty()) return;
  const int n_max = static_cast<int>(out.size()) - 1;
  if (z == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = 1.0;
    return;
  }
  if (z <= kSeriesLimit) {
    for (int k = 0; k <= n_max; ++k) out[static_cast<std::size_t>(k)] = scaled_series(k, z);
    return;
  }
  if (hankel_applies(n_max, z)) {
    for (int k = 0; k <= n_max; ++k) out[static_cast<std::size_t>(k)] = scaled_hankel(k, z);
    return;
  }
  scaled_miller(z, out);
}

std::vector<double> i_scaled_sequence(int n_max, double z) {
  if (n_max < 0) throw InvalidArgument("n_max must be non-negative");
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1);
  i_scaled_sequence(z, out);
  return out;
}

}  // namespace latgram::bessel
