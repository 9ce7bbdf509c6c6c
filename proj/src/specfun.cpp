#include "qpsense/specfun.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qpsense/error.hpp"

namespace qps::specfun {
namespace {

constexpr double kEps = 1e-17;
constexpr int kMaxSeriesTerms = 500;
constexpr int kMaxFractionTerms = 100000;
constexpr double kMaxModulus = 1e4;
// exp(x) overflows a double just above 709.78.
constexpr double kMaxExponent = 700.0;

void check_order(int order) {
  if (order != 0 && order != 1) {
    throw DomainError("unsupported Bessel order " + std::to_string(order) + " (only 0 and 1)");
  }
}

template <class T>
T finite_or_throw(T value, const char* what) {
  if constexpr (std::is_same_v<T, complex>) {
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
      throw RangeError(std::string(what) + ": non-finite result");
    }
  } else {
    if (!std::isfinite(value)) throw RangeError(std::string(what) + ": non-finite result");
  }
  return value;
}

// Power series I_n(z) = sum_k (z/2)^{2k+n} / (k! (k+n)!).
complex i_series(int n, complex z) {
  const complex t = 0.25 * z * z;
  complex term = (n == 0) ? complex(1.0) : 0.5 * z;
  complex sum = term;
  for (int k = 1; k < kMaxSeriesTerms; ++k) {
    term *= t / (double(k) * double(k + n));
    sum += term;
    if (std::abs(term) <= kEps * std::abs(sum)) break;
  }
  return sum;
}

// Hankel-type sums S(+-) = sum_k (-+1)^k a_k(n) / z^k of the large-argument
// expansion. Summation stops once terms stop shrinking.
struct AsymptoticSums {
  complex alternating;
  complex plain;
};

AsymptoticSums i_asymptotic_sums(int n, complex z) {
  const double mu = 4.0 * n * n;
  const complex inv_z = 1.0 / z;
  complex term(1.0);
  AsymptoticSums s{complex(1.0), complex(1.0)};
  double last = 1.0;
  for (int k = 1; k < kMaxSeriesTerms; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (8.0 * k) * inv_z;
    const double mag = std::abs(term);
    if (mag >= last) break;
    last = mag;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    s.alternating += sign * term;
    s.plain += term;
    if (mag <= kEps) break;
  }
  return s;
}

// e^{-z} sqrt(2 pi z) I_n(z) for Re z >= 0, |z| >= kSeriesRadius. The
// recessive e^{-2z} branch is kept off the real axis so the expansion stays
// accurate for complex arguments; on the axis the two sector choices
// average to zero.
complex i_asymptotic_scaled(int n, complex z) {
  const AsymptoticSums s = i_asymptotic_sums(n, z);
  if (z.imag() == 0.0) return s.alternating;
  const double sector = (z.imag() > 0.0) ? 1.0 : -1.0;
  const double parity = (n == 0) ? 1.0 : -1.0;
  const complex i(0.0, 1.0);
  return s.alternating + sector * parity * i * std::exp(-2.0 * z) * s.plain;
}

struct KPair {
  complex k0;
  complex k1;
};

// Logarithmic series, accurate for |z| <= kLogSeriesRadius.
KPair k_log_series(complex z) {
  constexpr double gamma = std::numbers::egamma;
  const complex t = 0.25 * z * z;
  const complex log_half = std::log(0.5 * z);

  // sum_{k>=1} H_k t^k / (k!)^2
  complex term0(1.0);
  complex sum0(0.0);
  double harmonic = 0.0;
  // sum_{k>=0} (psi(k+1) + psi(k+2)) t^k / (k! (k+1)!)
  complex term1(1.0);
  complex sum1 = (-gamma + (-gamma + 1.0)) * term1;
  for (int k = 1; k < kMaxSeriesTerms; ++k) {
    harmonic += 1.0 / k;
    term0 *= t / (double(k) * double(k));
    term1 *= t / (double(k) * double(k + 1));
    const complex add0 = harmonic * term0;
    const complex add1 = (2.0 * (-gamma) + harmonic + (harmonic + 1.0 / (k + 1))) * term1;
    sum0 += add0;
    sum1 += add1;
    if (std::abs(add0) <= kEps * std::abs(sum0) && std::abs(add1) <= kEps * std::abs(sum1)) break;
  }
  const complex k0 = -(log_half + gamma) * i_series(0, z) + sum0;
  const complex k1 = 1.0 / z + log_half * i_series(1, z) - 0.25 * z * sum1;
  return {k0, k1};
}

// Temme's continued fraction (CF2) with Steed's summation, Re z > 0. Returns
// K_0 and the ratio K_1/K_0; K_0 itself may underflow to zero for large z,
// the ratio never does.
struct KFraction {
  complex k0;
  complex ratio;
};

KFraction k_continued_fraction(complex z) {
  complex b = 2.0 * (1.0 + z);
  complex d = 1.0 / b;
  complex h = d;
  complex delh = d;
  complex q1(0.0);
  complex q2(1.0);
  const double a1 = 0.25;
  complex q(a1);
  complex c(a1);
  double a = -a1;
  complex s = 1.0 + q * delh;
  int i = 1;
  for (; i < kMaxFractionTerms; ++i) {
    a -= 2.0 * i;
    c = -a * c / (i + 1.0);
    const complex qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const complex dels = q * delh;
    s += dels;
    if (std::abs(dels) <= 1e-16 * std::abs(s)) break;
  }
  if (i == kMaxFractionTerms) throw ConvergenceError("bessel_k: continued fraction did not converge");
  h *= a1;
  const complex k0 = std::sqrt(std::numbers::pi / (2.0 * z)) * std::exp(-z) / s;
  const complex ratio = (z + 0.5 - h) / z;
  return {k0, ratio};
}

void check_k_branch(complex z) {
  if (!(z.real() > 0.0)) throw BranchError("bessel_k: requires Re z > 0");
}

void check_i_argument(complex z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw DomainError("bessel_i: non-finite argument");
  }
  if (std::abs(z) > kMaxModulus) throw DomainError("bessel_i: |z| exceeds 1e4");
}

// Miller backward recurrence normalised by J_0 + 2 sum J_{2m} = 1.
std::pair<double, double> j_miller(double x) {
  int start = static_cast<int>(x + 20.0 + 10.0 * std::cbrt(x));
  start += start % 2;
  double next = 0.0;
  double cur = 1e-30;
  double sum = 2.0 * cur;
  double j1 = 0.0;
  for (int k = start; k >= 1; --k) {
    const double prev = (2.0 * k / x) * cur - next;
    next = cur;
    cur = prev;
    const int index = k - 1;
    if (index == 1) j1 = cur;
    if (index == 0) {
      sum += cur;
    } else if (index % 2 == 0) {
      sum += 2.0 * cur;
    }
    if (std::abs(cur) > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      sum *= 1e-250;
      j1 *= 1e-250;
    }
  }
  return {cur / sum, j1 / sum};
}

std::pair<double, double> j_series(double x) {
  const double t = -0.25 * x * x;
  double term0 = 1.0;
  double term1 = 0.5 * x;
  double sum0 = term0;
  double sum1 = term1;
  for (int k = 1; k < kMaxSeriesTerms; ++k) {
    term0 *= t / (double(k) * double(k));
    term1 *= t / (double(k) * double(k + 1));
    sum0 += term0;
    sum1 += term1;
    if (std::abs(term0) <= kEps * std::abs(sum0) && std::abs(term1) <= kEps * std::abs(sum1)) break;
  }
  return {sum0, sum1};
}

std::pair<double, double> j_pair(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("bessel_j: requires finite x >= 0");
  return (x < 8.0) ? j_series(x) : j_miller(x);
}

}  // namespace

double bessel_j(int order, double x) {
  check_order(order);
  const auto [j0, j1] = j_pair(x);
  return order == 0 ? j0 : j1;
}

double bessel_j_ratio(double x) {
  const auto [j0, j1] = j_pair(x);
  if (j0 == 0.0) throw DomainError("bessel_j_ratio: J_0 vanishes");
  return finite_or_throw(j1 / j0, "bessel_j_ratio");
}

complex bessel_i(int order, complex z) {
  check_order(order);
  check_i_argument(z);
  if (std::abs(z) < kSeriesRadius) return finite_or_throw(i_series(order, z), "bessel_i");

  // I_n(-z) = (-1)^n I_n(z) moves the argument into the right half-plane.
  const bool flip = z.real() < 0.0;
  const complex w = flip ? -z : z;
  if (w.real() > kMaxExponent) throw RangeError("bessel_i: exp-scaled magnitude overflows");
  const complex value =
      std::exp(w) / std::sqrt(2.0 * std::numbers::pi * w) * i_asymptotic_scaled(order, w);
  const double sign = (flip && order == 1) ? -1.0 : 1.0;
  return finite_or_throw(sign * value, "bessel_i");
}

complex bessel_k(int order, complex z) {
  check_order(order);
  check_k_branch(z);
  if (std::abs(z) <= kLogSeriesRadius) {
    const KPair k = k_log_series(z);
    return finite_or_throw(order == 0 ? k.k0 : k.k1, "bessel_k");
  }
  const KFraction f = k_continued_fraction(z);
  return finite_or_throw(order == 0 ? f.k0 : f.k0 * f.ratio, "bessel_k");
}

complex bessel_i_ratio(complex z) {
  check_i_argument(z);
  if (std::abs(z) < kSeriesRadius) {
    return finite_or_throw(i_series(1, z) / i_series(0, z), "bessel_i_ratio");
  }
  const bool flip = z.real() < 0.0;
  const complex w = flip ? -z : z;
  const complex ratio = i_asymptotic_scaled(1, w) / i_asymptotic_scaled(0, w);
  return finite_or_throw(flip ? -ratio : ratio, "bessel_i_ratio");
}

complex bessel_k_ratio(complex z) {
  check_k_branch(z);
  if (std::abs(z) <= kLogSeriesRadius) {
    const KPair k = k_log_series(z);
    return finite_or_throw(k.k1 / k.k0, "bessel_k_ratio");
  }
  return finite_or_throw(k_continued_fraction(z).ratio, "bessel_k_ratio");
}

}  // namespace qps::specfun
