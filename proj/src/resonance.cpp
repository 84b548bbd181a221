#include "nekstab/resonance.hpp"

#include "nekstab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nekstab::resonance {

long long ell1(const KVec& k) {
    long long s = 0;
    for (long long x : k) s += std::llabs(x);
    return s;
}

double sup_norm(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

namespace {

void require_nonzero(const std::vector<double>& omega, const char* who) {
    if (omega.empty() || sup_norm(omega) == 0.0) throw std::domain_error(std::string(who) + ": zero frequency vector");
}

void canonicalize_sign(KVec& k) {
    for (long long x : k) {
        if (x > 0) return;
        if (x < 0) {
            for (long long& y : k) y = -y;
            return;
        }
    }
}

} // namespace

std::vector<double> ratio_coordinates(const std::vector<double>& omega) {
    require_nonzero(omega, "ratio_coordinates");
    const double sup = sup_norm(omega);
    std::vector<double> out(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i) out[i] = omega[i] / sup;
    return out;
}

std::vector<std::pair<long long, long long>> rationals_in_interval(double lo, double hi, long long max_cost,
                                                                   std::uint64_t budget) {
    std::vector<std::pair<long long, long long>> out;
    if (!(lo <= hi) || max_cost < 1) return out;
    std::uint64_t work = 0;
    for (long long q = 1; q < max_cost + 1; ++q) {
        // Boundary slack errs toward inclusion; callers re-test candidates.
        const auto pmin = static_cast<long long>(std::ceil(lo * static_cast<double>(q) - 1e-12));
        const auto pmax = static_cast<long long>(std::floor(hi * static_cast<double>(q) + 1e-12));
        for (long long p = pmin; p <= pmax; ++p) {
            if (++work > budget) throw resource_error("rationals_in_interval: enumeration budget exceeded");
            if (std::llabs(p) + q > max_cost) continue;
            if (std::gcd(std::llabs(p), q) != 1) continue;
            out.emplace_back(p, q);
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        const long long ca = std::llabs(a.first) + a.second, cb = std::llabs(b.first) + b.second;
        if (ca != cb) return ca < cb;
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });
    return out;
}

std::optional<ResonanceEvent> detect_ratio_crossing(const std::vector<double>& omega_prev,
                                                    const std::vector<double>& omega_curr,
                                                    const DetectorConfig& cfg, double t_prev, double t_curr) {
    require_nonzero(omega_prev, "detect_ratio_crossing");
    require_nonzero(omega_curr, "detect_ratio_crossing");
    if (omega_prev.size() != omega_curr.size()) throw std::domain_error("detect_ratio_crossing: dimension mismatch");
    if (!(cfg.K >= 1.0)) throw std::domain_error("detect_ratio_crossing: K must be >= 1");
    if (!(cfg.tol > 0.0)) throw std::domain_error("detect_ratio_crossing: tol must be positive");
    const auto n = static_cast<int>(omega_prev.size());
    const auto max_cost = static_cast<long long>(std::floor(cfg.K));

    const double sup_prev = sup_norm(omega_prev);
    const double sup_curr = sup_norm(omega_curr);

    std::vector<int> attaining;
    for (int j = 0; j < n; ++j)
        if (std::fabs(omega_prev[j]) == sup_prev || std::fabs(omega_curr[j]) == sup_curr) attaining.push_back(j);

    struct Best {
        long long cost;
        int j, i;
        double s;
        long long p, q;
    };
    std::optional<Best> best;
    auto better = [](const Best& a, const Best& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.j != b.j) return a.j < b.j;
        if (a.i != b.i) return a.i < b.i;
        return a.s < b.s;
    };

    const double pad = cfg.tol * cfg.K + 1e-12;
    for (int j : attaining) {
        for (int i = 0; i < n; ++i) {
            if (i == j) continue;
            const bool prev_ok = omega_prev[j] != 0.0;
            const bool curr_ok = omega_curr[j] != 0.0;
            if (!prev_ok && !curr_ok) continue;
            double rlo = 2.0, rhi = -2.0;
            if (prev_ok) {
                const double r = omega_prev[i] / omega_prev[j];
                rlo = std::min(rlo, r);
                rhi = std::max(rhi, r);
            }
            if (curr_ok) {
                const double r = omega_curr[i] / omega_curr[j];
                rlo = std::min(rlo, r);
                rhi = std::max(rhi, r);
            }
            const double lo = std::max(-1.0, rlo - pad);
            const double hi = std::min(1.0, rhi + pad);
            if (lo > hi) continue;

            for (const auto& [p, q] : rationals_in_interval(lo, hi, max_cost, cfg.enum_budget)) {
                const long long cost = std::llabs(p) + q;
                if (best && cost > best->cost) break; // candidates are cost-sorted
                const double qd = static_cast<double>(q), pd = static_cast<double>(p);
                const double g_prev = qd * omega_prev[i] - pd * omega_prev[j];
                const double g_curr = qd * omega_curr[i] - pd * omega_curr[j];
                const bool crossing = g_prev == 0.0 || g_curr == 0.0 || (g_prev > 0) != (g_curr > 0);
                const bool landing = std::fabs(g_curr) <= cfg.tol * static_cast<double>(cost) * sup_curr;
                if (!crossing && !landing) continue;
                double s = 1.0;
                if (g_prev == 0.0)
                    s = 0.0;
                else if (crossing && g_prev != g_curr)
                    s = std::clamp(g_prev / (g_prev - g_curr), 0.0, 1.0);
                const Best cand{cost, j, i, s, p, q};
                if (!best || better(cand, *best)) best = cand;
            }
        }
    }

    if (!best) return std::nullopt;
    ResonanceEvent ev;
    ev.i = best->i;
    ev.j = best->j;
    ev.time = t_prev + best->s * (t_curr - t_prev);
    ev.k.assign(n, 0);
    ev.k[best->i] = best->q;
    ev.k[best->j] -= best->p; // i == j excluded above
    canonicalize_sign(ev.k);
    double g = 0;
    for (int t = 0; t < n; ++t) {
        const double w = omega_prev[t] + best->s * (omega_curr[t] - omega_prev[t]);
        g += static_cast<double>(ev.k[t]) * w;
    }
    ev.residual = std::fabs(g);
    return ev;
}

namespace {

struct BruteState {
    const std::vector<double>& omega;
    long long radius;
    std::uint64_t budget;
    std::uint64_t work = 0;
    KVec current;
    std::optional<KVec> best;
    double best_abs = 0;

    void consider() {
        long long g = 0;
        bool nonzero = false;
        for (long long x : current) {
            g = std::gcd(g, std::llabs(x));
            nonzero |= x != 0;
        }
        if (!nonzero || g != 1) return;
        for (long long x : current) {
            if (x > 0) break;
            if (x < 0) return; // only the sign-canonical representative
            continue;
        }
        double dot = 0;
        for (std::size_t t = 0; t < current.size(); ++t) dot += static_cast<double>(current[t]) * omega[t];
        const double a = std::fabs(dot);
        if (!best || a < best_abs ||
            (a == best_abs && (ell1(current) < ell1(*best) || (ell1(current) == ell1(*best) && current < *best)))) {
            best = current;
            best_abs = a;
        }
    }

    void recurse(std::size_t pos, long long remaining) {
        if (++work > budget) throw resource_error("brute_force_resonant: enumeration budget exceeded");
        if (pos == current.size()) {
            consider();
            return;
        }
        for (long long x = -remaining; x <= remaining; ++x) {
            current[pos] = x;
            recurse(pos + 1, remaining - std::llabs(x));
        }
        current[pos] = 0;
    }
};

} // namespace

std::optional<KVec> brute_force_resonant(const std::vector<double>& omega, const DetectorConfig& cfg) {
    require_nonzero(omega, "brute_force_resonant");
    if (!(cfg.K >= 1.0)) throw std::domain_error("brute_force_resonant: K must be >= 1");
    BruteState st{omega, static_cast<long long>(std::floor(cfg.K)), cfg.enum_budget, 0, KVec(omega.size(), 0), {}, 0};
    st.recurse(0, st.radius);
    if (!st.best) return std::nullopt;
    const double rel_cap = cfg.tol * static_cast<double>(ell1(*st.best)) * sup_norm(omega);
    if (st.best_abs <= rel_cap) return st.best;
    return std::nullopt;
}

double resonant_distance(const std::vector<double>& omega, const KVec& k) {
    if (omega.size() != k.size()) throw std::domain_error("resonant_distance: dimension mismatch");
    double norm2 = 0, dot = 0;
    for (std::size_t t = 0; t < k.size(); ++t) {
        norm2 += static_cast<double>(k[t]) * static_cast<double>(k[t]);
        dot += static_cast<double>(k[t]) * omega[t];
    }
    if (norm2 == 0) throw std::domain_error("resonant_distance: zero resonance vector");
    return std::fabs(dot) / std::sqrt(norm2);
}

} // namespace nekstab::resonance
