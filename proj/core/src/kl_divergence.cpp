#include "scar/kl_divergence.hpp"

#include <cmath>
#include <numbers>

#include "scar/errors.hpp"

namespace scar {

namespace {

double log_normal_pdf(double x, const Gaussian& g) noexcept {
    const double z = (x - g.mu) / g.sigma;
    return -0.5 * z * z - std::log(g.sigma * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

double kl_divergence_numeric(const std::function<double(double)>& exact_pdf,
                             const Gaussian& approx, Interval domain, std::size_t n_points) {
    if (!(domain.hi > domain.lo) || !std::isfinite(domain.lo) || !std::isfinite(domain.hi))
        throw ValidationError("kl_divergence_numeric: empty or inverted domain");
    if (n_points < 1000)
        throw ValidationError("kl_divergence_numeric: need at least 1000 points");
    if (!(approx.sigma > 0.0))
        throw ValidationError("kl_divergence_numeric: approximation must have sigma > 0");

    if (n_points % 2 == 0)
        ++n_points;
    const std::size_t intervals = n_points - 1;
    const double h = (domain.hi - domain.lo) / static_cast<double>(intervals);

    auto integrand = [&](double x) {
        const double p = exact_pdf(x);
        if (!(p >= 1e-300))
            return 0.0;
        return p * (std::log(p) - log_normal_pdf(x, approx));
    };

    double sum = integrand(domain.lo) + integrand(domain.hi);
    for (std::size_t k = 1; k < intervals; ++k) {
        const double x = domain.lo + h * static_cast<double>(k);
        sum += (k % 2 == 1 ? 4.0 : 2.0) * integrand(x);
    }
    return sum * h / 3.0;
}

Interval default_kl_domain(const Gaussian& approx) {
    return {approx.mu - kKlDefaultHalfWidth * approx.sigma,
            approx.mu + kKlDefaultHalfWidth * approx.sigma};
}

double inverse_gaussian_pdf(double x, double c, const Gaussian& g) noexcept {
    if (x <= 0.0)
        return 0.0;
    // I = c/G  =>  G = c/I, |dG/dI| = c / I^2
    return normal_pdf(c / x, g) * c / (x * x);
}

std::vector<KlSweepPoint> inverse_kl_sweep(const std::vector<double>& ratios, double c,
                                           double mu_g, std::size_t n_points) {
    std::vector<KlSweepPoint> out;
    out.reserve(ratios.size());
    for (double ratio : ratios) {
        const Gaussian g{mu_g, mu_g / ratio};
        const Gaussian approx = inverse_approx(c, g);
        const double kl = kl_divergence_numeric(
            [&](double x) { return inverse_gaussian_pdf(x, c, g); }, approx,
            default_kl_domain(approx), n_points);
        out.push_back({ratio, approx, kl});
    }
    return out;
}

}  // namespace scar
