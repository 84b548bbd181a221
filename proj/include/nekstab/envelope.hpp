#pragma once

#include <string>
#include <vector>

namespace nekstab::envelope {

/// Stable constants of the envelope formulas. None are pinned by theory;
/// they all default to 1 and act as calibration knobs, so every prediction
/// carries a shape_only flag until someone calibrates them.
struct Constants {
    double K0 = 1.0, eps0 = 1.0;
    double c1 = 1.0, c2 = 1.0, c3 = 1.0, c4 = 1.0, c5 = 1.0;      // analytic case
    double c1p = 1.0, c2p = 1.0, c3p = 1.0, c4p = 1.0, c5p = 1.0; // Gevrey case
    double rho0 = 1.0, C = 1.0; // frequency-map constants
    double c7 = 1.0;            // strictness constant standing in for "<<"
};

enum class Regularity { analytic, gevrey };

/// K = K0 (eps0 / eps)^gamma. Requires 0 < eps <= eps0 and gamma > 0.
double k_schedule(double eps, double gamma, const Constants& c);

/// a_gamma = (1 - 2 gamma) / (2(n-1)), for n >= 2 and 0 < gamma <= 1/(2n);
/// always lies in [1/(2n), 1/(2(n-1))).
double exponent_analytic(int n, double gamma);

struct GevreyExponents {
    double a = 0.0;
    double b = 0.0;
};

/// a_gamma = (1 - 5 gamma (n-1)^2) / (2 alpha (n-1)),
/// b_gamma = (1 - gamma (n-1)(3n-1)) / (2(n-1)),
/// for n >= 2, alpha >= 1, 0 < gamma <= 1/(5(n-1)^2).
GevreyExponents exponent_gevrey(int n, double alpha, double gamma);

struct Threshold {
    std::string name;
    std::string formula;
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = false;
};

/// Literal evaluation of the validity inequalities:
///   order condition      eps K^(2n) < 1            (analytic)
///   order condition      eps K^(5(n-1)^2) < c7     (gevrey)
///   frequency-map margin K^-2 < C rho0 / 32
///   energy-drift margin  eps K^2 < 16
std::vector<Threshold> check_thresholds(int n, double eps, double K, Regularity reg, const Constants& c);

struct StabilityPrediction {
    double confinement_radius = 0.0;
    double radius_exponent = 0.0;
    double time_log_exponent = 0.0; // the a in exp(eps^-a)
    double log_time = 0.0;          // ln of the time bound
    double gamma = 0.0;             // schedule exponent equivalent to delta
    double K = 0.0;                 // schedule value at eps
    std::vector<Threshold> thresholds;
    bool shape_only = true; // constants uncalibrated
};

/// Radius c1 eps^(delta(n-1)), time exponent 1/(2(n-1)) - delta,
/// log-time ln c2 + c3 eps^-a. Requires 0 < delta <= 1/(2n(n-1)).
StabilityPrediction predict_analytic(int n, double delta, double eps, const Constants& c);

/// Radius c1' eps^(2 delta / (5(n-1))), time exponent 1/(2 alpha (n-1)) - delta.
/// Requires 0 < delta <= 1/(2 alpha n (n-1)).
StabilityPrediction predict_gevrey(int n, double alpha, double delta, double eps, const Constants& c);

struct LocalExponents {
    double a = 0.0;
    double b = 0.0;
};

/// Near a resonance of multiplicity m: a_m = 1/(2 alpha (n-m)),
/// b_m = 1/(2(n-m)), for 0 <= m < n.
LocalExponents local_exponents(int n, int multiplicity, double alpha);

} // namespace nekstab::envelope
