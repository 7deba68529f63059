#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "scar/gaussian.hpp"

namespace scar {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

inline constexpr std::size_t kKlDefaultPoints = 10000;
inline constexpr double kKlDefaultHalfWidth = 8.0;  // in approximate sigmas

/// KL(p || q) for an exact density p against a Gaussian approximation q,
/// by composite Simpson quadrature over `domain`.
///
/// The integrand is taken as 0 wherever p < 1e-300. n_points must be at
/// least 1000 and is rounded up to an odd count.
double kl_divergence_numeric(const std::function<double(double)>& exact_pdf,
                             const Gaussian& approx, Interval domain,
                             std::size_t n_points = kKlDefaultPoints);

/// Default quadrature domain: approx.mu +/- 8 approx.sigma.
Interval default_kl_domain(const Gaussian& approx);

/// Density of c / G for G ~ g, c > 0, evaluated by change of variables.
double inverse_gaussian_pdf(double x, double c, const Gaussian& g) noexcept;

/// One row of the inverse-approximation KL sweep.
struct KlSweepPoint {
    double ratio = 0.0;  // mu_G / sigma_G
    Gaussian approx;
    double kl = 0.0;
};

/// KL divergence of inverse_approx(c, N(mu_g, mu_g/ratio)) against the exact
/// c/G density for every ratio given.
std::vector<KlSweepPoint> inverse_kl_sweep(const std::vector<double>& ratios,
                                           double c = 1.0, double mu_g = 20.0,
                                           std::size_t n_points = kKlDefaultPoints);

}  // namespace scar
