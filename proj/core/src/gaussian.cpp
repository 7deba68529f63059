#include "scar/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "scar/errors.hpp"

namespace scar {

namespace {

// sigma <= mu / 3, written so that a value produced by adjust_floor
// (sigma = mu / 3) passes the check bit-exactly.
bool clear_of_zero(const Gaussian& g) noexcept {
    return g.mu >= 0.0 && g.sigma <= g.mu / kBoundSigmas;
}

std::string describe(const Gaussian& g) {
    return "N(" + std::to_string(g.mu) + ", " + std::to_string(g.sigma) + ")";
}

}  // namespace

Gaussian add(const Gaussian& a, const Gaussian& b) noexcept {
    return {a.mu + b.mu, std::hypot(a.sigma, b.sigma)};
}

Gaussian sub(const Gaussian& a, const Gaussian& b) noexcept {
    return {a.mu - b.mu, std::hypot(a.sigma, b.sigma)};
}

Gaussian scale(const Gaussian& a, double k) noexcept {
    return {k * a.mu, std::abs(k) * a.sigma};
}

Gaussian inverse_approx(double c, const Gaussian& g) {
    if (!(g.mu > 0.0))
        throw ApproximationError("inverse_approx: denominator mean must be positive, got " +
                                 describe(g));
    return {c / g.mu, g.sigma * std::abs(c) / (g.mu * g.mu)};
}

Gaussian ratio_approx(const Gaussian& e, const Gaussian& f) {
    if (!(f.mu > 0.0))
        throw ApproximationError("ratio_approx: denominator mean must be positive, got " +
                                 describe(f));
    if (f.degenerate())
        return scale(e, 1.0 / f.mu);

    const double b = f.mu / f.sigma;
    if (!(b > kRatioDenominatorLimit))
        throw ApproximationError("ratio_approx: denominator mu/sigma = " + std::to_string(b) +
                                 " outside validity region (> 4), F = " + describe(f));

    if (e.degenerate())
        return inverse_approx(e.mu, f);
    const double a = e.mu / e.sigma;
    if (a >= kRatioNumeratorLimit)
        return inverse_approx(e.mu, f);

    // Marsaglia's fitted moments for a < 2.5, b > 4, rho = 0.
    const double r = f.sigma / e.sigma;
    const double mu = a / (r * (1.01 * b - 0.2713));
    const double spread = (a * a + 1.0) / (b * b + 0.108 * b - 3.795) - r * r * mu * mu;
    return {mu, std::sqrt(std::max(0.0, spread)) / r};
}

Gaussian product_approx(const Gaussian& e, const Gaussian& f) noexcept {
    // sigma_E^2 sigma_F^2 (1 + delta_E^2 + delta_F^2), expanded so that a
    // degenerate factor reduces to scale() instead of dividing by zero.
    const double var = e.variance() * f.variance() + e.mu * e.mu * f.variance() +
                       f.mu * f.mu * e.variance();
    return {e.mu * f.mu, std::sqrt(var)};
}

double expected_positive(const Gaussian& g) noexcept {
    if (g.degenerate())
        return std::max(0.0, g.mu);
    const double z = g.mu / (g.sigma * std::numbers::sqrt2);
    // 1 + erf(z) == erfc(-z), which keeps precision in the lower tail.
    const double value = 0.5 * g.mu * std::erfc(-z) +
                         g.sigma * std::numbers::inv_sqrtpi / std::numbers::sqrt2 *
                             std::exp(-z * z);
    return std::max(value, std::max(0.0, g.mu));
}

Gaussian adjust_floor(const Gaussian& g) noexcept {
    if (clear_of_zero(g))
        return g;
    const double mu = expected_positive(g);
    return {mu, mu / kBoundSigmas};
}

Gaussian adjust_ceiling(const Gaussian& g, double cap) noexcept {
    const Gaussian headroom{cap - g.mu, g.sigma};
    if (clear_of_zero(headroom))
        return g;
    const Gaussian adjusted = adjust_floor(headroom);
    return {cap - adjusted.mu, adjusted.sigma};
}

Gaussian adjust_both(const Gaussian& g, double cap) noexcept {
    return adjust_ceiling(adjust_floor(g), cap);
}

double normal_pdf(double x, const Gaussian& g) noexcept {
    const double z = (x - g.mu) / g.sigma;
    return std::exp(-0.5 * z * z) / (g.sigma * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace scar
