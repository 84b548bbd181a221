#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace nekstab::resonance {

using KVec = std::vector<long long>;

struct DetectorConfig {
    double K = 10.0;    // order cutoff, >= 1; candidates satisfy |p| + q <= floor(K)
    double tol = 1e-6;  // relative residual tolerance for |k.w| / (|k|_1 |w|_sup)
    std::uint64_t enum_budget = 20'000'000;
};

struct ResonanceEvent {
    double time = 0.0;
    KVec k;                // q e_i - p e_j, sign-canonical (first nonzero > 0)
    double residual = 0.0; // |k . w| at the detection point
    int i = 0;
    int j = 0;
};

long long ell1(const KVec& k);
double sup_norm(const std::vector<double>& v);

/// Component-wise w_i / |w|_sup; lies in [-1,1]^n with a unit component.
std::vector<double> ratio_coordinates(const std::vector<double>& omega);

/// Reduced fractions p/q with q >= 1, |p| + q <= max_cost and p/q in the
/// closed interval [lo, hi], sorted by (|p| + q, q, p).
std::vector<std::pair<long long, long long>> rationals_in_interval(double lo, double hi, long long max_cost,
                                                                   std::uint64_t budget = 20'000'000);

/// Scans one step of a sampled frequency path for a simple resonance
/// crossing: for every sup-attaining index j of either endpoint and every
/// other index i, rationals p/q of order |p| + q <= floor(K) inside the
/// swept ratio interval are tested on k' = q e_i - p e_j, firing on a sign
/// change of k'.w across the step or on |k'.w| <= tol |k'|_1 |w|_sup at the
/// current sample. Returns the event of smallest |p| + q (ties: smallest j,
/// then i), with the crossing time linearly interpolated in [t_prev, t_curr].
std::optional<ResonanceEvent> detect_ratio_crossing(const std::vector<double>& omega_prev,
                                                    const std::vector<double>& omega_curr,
                                                    const DetectorConfig& cfg, double t_prev = 0.0,
                                                    double t_curr = 1.0);

/// Testing oracle: enumerates all primitive k with 0 < |k|_1 <= floor(K) up
/// to global sign and returns the minimizer of |k.w| when its relative
/// residual is within tol. Throws resource_error past cfg.enum_budget.
std::optional<KVec> brute_force_resonant(const std::vector<double>& omega, const DetectorConfig& cfg);

/// Euclidean distance |k.w| / ||k||_2 from w to the hyperplane k.w = 0.
double resonant_distance(const std::vector<double>& omega, const KVec& k);

} // namespace nekstab::resonance
