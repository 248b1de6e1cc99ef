#pragma once

// Counter-based pseudo-random generation: every stream is a pure function of
// (key, position), so parallel and serial runs produce identical draws.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>

namespace psdc {

namespace detail {

// splitmix64 finalizer (Steele/Lea/Flood; public domain reference constants).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

// Derives an independent subkey, e.g. one per Monte Carlo trial.
inline std::uint64_t subkey(std::uint64_t key, std::uint64_t index) {
  return detail::mix64(detail::mix64(key ^ 0x5851f42d4c957f2dull) + index);
}

// Stateless-core counter generator: output i of stream `key` is
// mix64(key + i*gamma), evaluated lazily through next().
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key), pos_(0) {}

  std::uint64_t next_u64() { return detail::mix64(key_ + 0x9e3779b97f4a7c15ull * ++pos_); }

  // Uniform on (0,1); never returns an exact endpoint.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  // Standard normal via inverse CDF (Acklam's rational approximation plus one
  // Halley refinement through erfc; absolute error far below 1e-9).
  double next_normal() { return normal_icdf(next_uniform()); }

  std::complex<double> next_complex_normal() {
    // NORMAL_C(0,1): real and imaginary parts iid NORMAL_R(0, 1/2).
    const double s = std::sqrt(0.5);
    double re = next_normal();
    double im = next_normal();
    return {s * re, s * im};
  }

  static double normal_icdf(double p);

 private:
  std::uint64_t key_;
  std::uint64_t pos_;
};

inline double CounterRng::normal_icdf(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley step against Phi(x) - p expressed through erfc.
  const double inv_sqrt2 = 0.70710678118654752440;
  const double sqrt_2pi = 2.50662827463100050242;
  double e = 0.5 * std::erfc(-x * inv_sqrt2) - p;
  double u = e * sqrt_2pi * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

}  // namespace psdc
