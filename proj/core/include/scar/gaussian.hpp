#pragma once


namespace scar {

/// Independent Gaussian quantity described by its first two moments.
///
/// sigma == 0 is a valid, deterministic value; every operation below accepts
/// it. Covariance between derived quantities is never tracked.
struct Gaussian {
    double mu = 0.0;
    double sigma = 0.0;

    static constexpr Gaussian constant(double value) noexcept { return {value, 0.0}; }

    constexpr bool degenerate() const noexcept { return sigma == 0.0; }
    constexpr double variance() const noexcept { return sigma * sigma; }

    friend constexpr bool operator==(const Gaussian&, const Gaussian&) = default;
};

/// Mean kept this many standard deviations clear of a physical bound.
inline constexpr double kBoundSigmas = 3.0;

/// Smallest mu/sigma for which inverse_approx is considered usable.
inline constexpr double kInverseMinRatio = 4.0;

/// Marsaglia ratio approximation is used only for mu_E/sigma_E below this.
inline constexpr double kRatioNumeratorLimit = 2.5;
/// ... and requires mu_F/sigma_F above this.
inline constexpr double kRatioDenominatorLimit = 4.0;

Gaussian add(const Gaussian& a, const Gaussian& b) noexcept;
Gaussian sub(const Gaussian& a, const Gaussian& b) noexcept;
Gaussian scale(const Gaussian& a, double k) noexcept;

inline Gaussian operator+(const Gaussian& a, const Gaussian& b) noexcept { return add(a, b); }
inline Gaussian operator-(const Gaussian& a, const Gaussian& b) noexcept { return sub(a, b); }
inline Gaussian operator*(const Gaussian& a, double k) noexcept { return scale(a, k); }
inline Gaussian operator*(double k, const Gaussian& a) noexcept { return scale(a, k); }

/// Gaussian approximation of c / G. Throws ApproximationError if g.mu <= 0.
Gaussian inverse_approx(double c, const Gaussian& g);

/// Gaussian approximation of E / F for independent E, F.
///
/// Uses Marsaglia's fitted moments when mu_E/sigma_E < 2.5 and otherwise
/// treats E as the constant mu_E and defers to inverse_approx. A
/// deterministic denominator reduces to scale(e, 1/f.mu). Throws
/// ApproximationError for f.mu <= 0 or mu_F/sigma_F <= 4.
Gaussian ratio_approx(const Gaussian& e, const Gaussian& f);

/// Moments of E * F for independent E, F (the mean is exact).
Gaussian product_approx(const Gaussian& e, const Gaussian& f) noexcept;

/// Expected value of max(0, X) for X ~ g.
double expected_positive(const Gaussian& g) noexcept;

/// Re-centres g at E[max(0, X)] with sigma = mu/3 when its mean lies within
/// three standard deviations of zero. Otherwise g is returned unchanged.
Gaussian adjust_floor(const Gaussian& g) noexcept;

/// Mirror of adjust_floor about an upper bound: cap - adjust_floor(cap - g).
Gaussian adjust_ceiling(const Gaussian& g, double cap) noexcept;

/// adjust_floor followed by adjust_ceiling.
Gaussian adjust_both(const Gaussian& g, double cap) noexcept;

double normal_pdf(double x, const Gaussian& g) noexcept;

}  // namespace scar
