#pragma once

// Bessel kernels for the nanowire characteristic equations.
//
// Orders 0 and 1 only. Complex arguments use std::complex<double>; every
// function throws rather than returning a non-finite value.

#include <complex>

namespace qps::specfun {

using complex = std::complex<double>;

/// Modulus below which the modified Bessel functions use their power series.
inline constexpr double kSeriesRadius = 12.0;

/// Modulus at or below which K_p uses the logarithmic series; above it the
/// Temme/Steed continued fraction is used.
inline constexpr double kLogSeriesRadius = 2.0;

/// Bessel function of the first kind J_p(x), p in {0, 1}, x >= 0.
double bessel_j(int order, double x);

/// Modified Bessel function I_p(z), p in {0, 1}, |z| <= 1e4.
complex bessel_i(int order, complex z);

/// Modified Bessel function K_p(z), p in {0, 1}, principal branch Re z > 0.
complex bessel_k(int order, complex z);

/// I_1(z)/I_0(z) without forming either factor, so arguments whose I_p
/// overflow (large metal radii) remain usable.
complex bessel_i_ratio(complex z);

/// K_1(z)/K_0(z), Re z > 0, free of the e^{-z} underflow of the factors.
complex bessel_k_ratio(complex z);

/// J_1(x)/J_0(x) for x >= 0 (throws DomainError at a zero of J_0).
double bessel_j_ratio(double x);

}  // namespace qps::specfun
