#include "nekstab/envelope.hpp"

#include <cmath>
#include <stdexcept>

namespace nekstab::envelope {

double k_schedule(double eps, double gamma, const Constants& c) {
    if (!(gamma > 0)) throw std::domain_error("k_schedule: gamma must be positive");
    if (!(eps > 0 && eps <= c.eps0)) throw std::domain_error("k_schedule: eps must lie in (0, eps0]");
    return c.K0 * std::pow(c.eps0 / eps, gamma);
}

namespace {

// Admissible ranges carry a whisker of relative slack so that decimal
// approximations of exact boundaries (e.g. 0.1666667 for 1/6) stay usable.
bool in_range(double x, double max) { return x > 0 && x <= max * (1.0 + 1e-6); }

} // namespace

double exponent_analytic(int n, double gamma) {
    if (n < 2) throw std::domain_error("exponent_analytic: n must be >= 2");
    if (!in_range(gamma, 1.0 / (2.0 * n))) throw std::domain_error("exponent_analytic: gamma out of (0, 1/(2n)]");
    return (1.0 - 2.0 * gamma) / (2.0 * (n - 1));
}

GevreyExponents exponent_gevrey(int n, double alpha, double gamma) {
    if (n < 2) throw std::domain_error("exponent_gevrey: n must be >= 2");
    if (!(alpha >= 1.0)) throw std::domain_error("exponent_gevrey: alpha must be >= 1");
    const double gmax = 1.0 / (5.0 * (n - 1) * (n - 1));
    if (!in_range(gamma, gmax)) throw std::domain_error("exponent_gevrey: gamma out of (0, 1/(5(n-1)^2)]");
    const double a = (1.0 - 5.0 * gamma * (n - 1) * (n - 1)) / (2.0 * alpha * (n - 1));
    const double b = (1.0 - gamma * (n - 1) * (3 * n - 1)) / (2.0 * (n - 1));
    return {a, b};
}

std::vector<Threshold> check_thresholds(int n, double eps, double K, Regularity reg, const Constants& c) {
    if (!(K >= 1.0)) throw std::domain_error("check_thresholds: K must be >= 1");
    if (!(eps >= 0.0)) throw std::domain_error("check_thresholds: eps must be nonnegative");
    std::vector<Threshold> out;
    auto add = [&out](std::string name, std::string formula, double lhs, double rhs) {
        out.push_back({std::move(name), std::move(formula), lhs, rhs, lhs < rhs});
    };
    if (reg == Regularity::analytic) {
        add("order_condition", "eps*K^(2n) < 1", eps * std::pow(K, 2.0 * n), 1.0);
    } else {
        const double e = 5.0 * (n - 1) * (n - 1);
        add("order_condition", "eps*K^(5(n-1)^2) < c7", eps * std::pow(K, e), c.c7);
    }
    add("frequency_map_margin", "K^-2 < C*rho0/32", 1.0 / (K * K), c.C * c.rho0 / 32.0);
    add("energy_drift_margin", "eps*K^2 < 16", eps * K * K, 16.0);
    return out;
}

namespace {

StabilityPrediction make_prediction(int n, double eps, double gamma, double radius_coeff, double radius_exp,
                                    double time_exp, double log_c2, double c3, Regularity reg, const Constants& c) {
    StabilityPrediction p;
    p.radius_exponent = radius_exp;
    p.confinement_radius = radius_coeff * std::pow(eps, radius_exp);
    p.time_log_exponent = time_exp;
    p.log_time = log_c2 + c3 * std::pow(eps, -time_exp);
    p.gamma = gamma;
    p.K = k_schedule(eps, gamma, c);
    p.thresholds = check_thresholds(n, eps, p.K, reg, c);
    p.shape_only = true;
    return p;
}

} // namespace

StabilityPrediction predict_analytic(int n, double delta, double eps, const Constants& c) {
    if (n < 2) throw std::domain_error("predict_analytic: n must be >= 2");
    const double dmax = 1.0 / (2.0 * n * (n - 1));
    if (!in_range(delta, dmax)) throw std::domain_error("predict_analytic: delta out of (0, 1/(2n(n-1))]");
    if (!(eps > 0 && eps <= c.eps0)) throw std::domain_error("predict_analytic: eps must lie in (0, eps0]");
    const double gamma = delta * (n - 1);
    const double time_exp = 1.0 / (2.0 * (n - 1)) - delta;
    return make_prediction(n, eps, gamma, c.c1, delta * (n - 1), time_exp, std::log(c.c2), c.c3,
                           Regularity::analytic, c);
}

StabilityPrediction predict_gevrey(int n, double alpha, double delta, double eps, const Constants& c) {
    if (n < 2) throw std::domain_error("predict_gevrey: n must be >= 2");
    if (!(alpha >= 1.0)) throw std::domain_error("predict_gevrey: alpha must be >= 1");
    const double dmax = 1.0 / (2.0 * alpha * n * (n - 1));
    if (!in_range(delta, dmax)) throw std::domain_error("predict_gevrey: delta out of (0, 1/(2 alpha n(n-1))]");
    if (!(eps > 0 && eps <= c.eps0)) throw std::domain_error("predict_gevrey: eps must lie in (0, eps0]");
    const double gamma = 2.0 * delta / (5.0 * (n - 1));
    const double time_exp = 1.0 / (2.0 * alpha * (n - 1)) - delta;
    return make_prediction(n, eps, gamma, c.c1p, 2.0 * delta / (5.0 * (n - 1)), time_exp, std::log(c.c2p), c.c3p,
                           Regularity::gevrey, c);
}

LocalExponents local_exponents(int n, int multiplicity, double alpha) {
    if (n < 2) throw std::domain_error("local_exponents: n must be >= 2");
    if (!(alpha >= 1.0)) throw std::domain_error("local_exponents: alpha must be >= 1");
    if (multiplicity < 0 || multiplicity >= n) throw std::domain_error("local_exponents: multiplicity out of [0, n)");
    const double span = 2.0 * (n - multiplicity);
    return {1.0 / (alpha * span), 1.0 / span};
}

} // namespace nekstab::envelope
