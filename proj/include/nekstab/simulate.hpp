#pragma once

#include "nekstab/hamiltonian.hpp"
#include "nekstab/resonance.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nekstab::sim {

using ham::Vec;

enum class Scheme { implicit_midpoint, composed4 };

struct IntegratorConfig {
    Scheme scheme = Scheme::implicit_midpoint;
    double dt = 1e-2;
    double fp_tol = 1e-12;
    int fp_max_iters = 50;
    int sample_stride = 1;      // record every k-th step
    double energy_slack = 1e-6; // integrator allowance in the h-deviation monitor
};

struct State {
    Vec theta; // angles in [0,1)
    Vec I;
};

struct FieldValue {
    Vec dtheta;
    Vec dI;
};

/// Canonical equations of H = h + eps f:
/// dtheta = grad h(I) + eps grad_I f, dI = -eps grad_theta f.
FieldValue hamiltonian_vector_field(const ham::SystemSpec& spec, const State& state);

/// One integrator step. Implicit midpoint solves z' = z + dt X((z+z')/2) by
/// fixed-point iteration; composed4 chains three midpoint substeps with the
/// triple-jump coefficients (1/(2-2^(1/3)), negative middle step). Angles are
/// reduced mod 1 afterwards. Throws step_error on fixed-point failure.
State step(const ham::SystemSpec& spec, const State& state, const IntegratorConfig& cfg, double t = 0.0);

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<double> energy; // H along the samples
    std::vector<double> drift;  // running sup_s<=t |I(s) - I0|_sup
    std::vector<resonance::ResonanceEvent> events;
    bool escaped = false;
    bool censored = false;
    bool energy_ok = true;        // h-deviation stayed within 2 eps + slack
    double max_drift = 0.0;
    double max_h_deviation = 0.0; // max |h(I(t)) - h(I0)|
    double max_energy_error = 0.0; // max |H(t) - H(0)|
    std::vector<std::string> warnings;

    int dim() const { return states.empty() ? 0 : static_cast<int>(states.front().I.size()); }
};

/// Integrates to time T (or escape from B(0,R)), sampling at the configured
/// stride, running the resonance detector on consecutive step frequencies,
/// and monitoring drift plus the energy-argument bound
/// |h(I(t)) - h(I0)| <= 2 eps + energy_slack. A nonnegative rho_stop ends
/// the run once the drift reaches it (record.censored reports the outcome).
TrajectoryRecord integrate(const ham::SystemSpec& spec, const State& s0, double T, const IntegratorConfig& cfg,
                           const std::optional<resonance::DetectorConfig>& detector = std::nullopt,
                           double rho_stop = -1.0);

struct StabilityTime {
    double T = 0.0;
    bool censored = false;
    double max_drift = 0.0;
    std::size_t crossings = 0;
};

/// First time the action drift reaches rho, censored at T_max.
/// Requires 0 < rho < R/2.
StabilityTime stability_time(const ham::SystemSpec& spec, const State& s0, double rho, double T_max,
                             const IntegratorConfig& cfg,
                             const std::optional<resonance::DetectorConfig>& detector = std::nullopt);

struct SweepRow {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    double T = 0.0;
    bool censored = false;
    double max_drift = 0.0;
    std::size_t crossings = 0;
    bool failed = false;
    std::string error;
};

struct SweepAggregate {
    double epsilon = 0.0;
    double median_T = 0.0;
    bool censored = false;
    int n_censored = 0;
    int n_failed = 0;
};

struct FitResult {
    double a_estimate = 0.0;
    double intercept = 0.0;
    double residual = 0.0; // RMS of the linear fit in (ln 1/eps, ln ln T)
    int points_used = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows; // ordered by (eps index, seed index)
    std::vector<SweepAggregate> aggregates;
    std::optional<FitResult> fit;
    std::string fit_note;
};

struct SweepConfig {
    std::vector<double> eps_list; // positive, strictly decreasing
    double rho = 0.1;
    double T_max = 1e6;
    std::vector<std::uint64_t> seeds;
    int workers = 1;
    Vec I0; // initial actions, fixed across the sweep
    std::optional<resonance::DetectorConfig> detector;
};

/// One stability-time row per (eps, seed), fanned out over a worker pool;
/// initial angles come from the seeded splitmix64 generator, so results are
/// identical for any worker count. Per-row failures are recorded and the
/// sweep continues. Medians per eps feed the exponent fit when at least
/// three non-censored aggregates with T > 1 exist.
SweepResult sweep(const ham::SystemSpec& spec_template, const SweepConfig& scfg, const IntegratorConfig& cfg);

/// Analytic table T(eps) = exp(eps^-a), bypassing integration.
SweepResult synthetic_sweep(double a, const std::vector<double>& eps_list);

/// Least-squares slope of ln ln T against ln(1/eps) over non-censored rows
/// with T > 1; needs >= 3 points and a non-degenerate table.
FitResult fit_exponent(const std::vector<std::pair<double, double>>& eps_T);

std::uint64_t splitmix64(std::uint64_t& state);
Vec seeded_angles(std::uint64_t seed, int n);

} // namespace nekstab::sim
