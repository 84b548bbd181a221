#include "nekstab/simulate.hpp"

#include "nekstab/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace nekstab::sim {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double sup_norm(const Vec& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

double sup_diff(const Vec& a, const Vec& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

void reduce_mod1(Vec& theta) {
    for (double& x : theta) {
        x -= std::floor(x);
        if (x >= 1.0) x = 0.0; // rounding at the seam
    }
}

// Coarse Lipschitz bound of the field for the contraction precondition
// dt * (|hess h| + eps |d2 f|) < 1.
double field_lipschitz_bound(const ham::SystemSpec& spec) {
    double h_rowsum = 0;
    for (int i = 0; i < spec.n; ++i) h_rowsum = std::max(h_rowsum, spec.integrable.weight(i));
    double f2 = 0;
    for (const ham::TrigTerm& t : spec.perturbation.terms) {
        double k1 = 0;
        for (long long ki : t.k) k1 += static_cast<double>(std::llabs(ki));
        double w_sup = std::fabs(t.weight.c0), w1 = 0, w2 = 0;
        for (double x : t.weight.lin) {
            w_sup += std::fabs(x) * spec.R;
            w1 += std::fabs(x);
        }
        for (double x : t.weight.quad) {
            w_sup += std::fabs(x) * spec.R * spec.R;
            w1 += 2 * std::fabs(x) * spec.R;
            w2 += 2 * std::fabs(x);
        }
        const double a = std::fabs(t.amplitude);
        f2 += a * (w_sup * (two_pi * k1) * (two_pi * k1) + 2 * w1 * two_pi * k1 + w2);
    }
    return h_rowsum + spec.epsilon * f2;
}

// Allocation-free stepping core; scratch is reused across the whole run.
class Engine {
public:
    Engine(const ham::SystemSpec& spec, const IntegratorConfig& cfg) : spec_(spec), cfg_(cfg), n_(spec.n) {
        for (const ham::TrigTerm& t : spec.perturbation.terms) {
            CompiledTerm c;
            c.k.resize(n_);
            for (int i = 0; i < n_; ++i) c.k[i] = static_cast<double>(t.k[i]);
            c.amp = t.amplitude;
            c.phase = t.phase;
            c.weight = &t.weight;
            c.const_weight = t.weight.is_constant();
            terms_.push_back(std::move(c));
        }
        mid_theta_.resize(n_);
        mid_i_.resize(n_);
        dtheta_.resize(n_);
        di_.resize(n_);
    }

    void field(const Vec& theta, const Vec& I, Vec& dtheta, Vec& dI) const {
        for (int i = 0; i < n_; ++i) {
            dtheta[i] = spec_.integrable.omega0[i] + spec_.integrable.weight(i) * I[i];
            dI[i] = 0.0;
        }
        const double eps = spec_.epsilon;
        if (eps == 0.0) return;
        for (const CompiledTerm& t : terms_) {
            double phase = t.phase;
            for (int i = 0; i < n_; ++i) phase += t.k[i] * theta[i];
            const double arg = two_pi * phase;
            const double w = t.weight->eval(I);
            const double dtheta_coeff = eps * two_pi * t.amp * w * std::sin(arg); // dI = -eps grad_theta f
            for (int i = 0; i < n_; ++i) dI[i] += dtheta_coeff * t.k[i];
            if (!t.const_weight) {
                const double ci = eps * t.amp * std::cos(arg);
                for (int i = 0; i < n_; ++i)
                    dtheta[i] += ci * ((i < static_cast<int>(t.weight->lin.size()) ? t.weight->lin[i] : 0.0) +
                                       (i < static_cast<int>(t.weight->quad.size()) ? 2.0 * t.weight->quad[i] * I[i] : 0.0));
            }
        }
    }

    // z' = z + dt X((z + z')/2) by fixed-point iteration; theta unreduced.
    void midpoint(State& s, double dt, double t) {
        const Vec z_theta = s.theta, z_i = s.I;
        field(s.theta, s.I, dtheta_, di_);
        for (int i = 0; i < n_; ++i) {
            s.theta[i] = z_theta[i] + dt * dtheta_[i];
            s.I[i] = z_i[i] + dt * di_[i];
        }
        double delta = 0;
        for (int it = 0; it < cfg_.fp_max_iters; ++it) {
            for (int i = 0; i < n_; ++i) {
                mid_theta_[i] = 0.5 * (z_theta[i] + s.theta[i]);
                mid_i_[i] = 0.5 * (z_i[i] + s.I[i]);
            }
            field(mid_theta_, mid_i_, dtheta_, di_);
            delta = 0;
            for (int i = 0; i < n_; ++i) {
                const double nt = z_theta[i] + dt * dtheta_[i];
                const double ni = z_i[i] + dt * di_[i];
                delta = std::max(delta, std::max(std::fabs(nt - s.theta[i]), std::fabs(ni - s.I[i])));
                s.theta[i] = nt;
                s.I[i] = ni;
            }
            if (delta <= cfg_.fp_tol) return;
        }
        throw step_error("implicit midpoint failed to contract", t, cfg_.fp_max_iters, delta);
    }

    void advance(State& s, double dt, double t) {
        if (cfg_.scheme == Scheme::implicit_midpoint) {
            midpoint(s, dt, t);
        } else {
            static const double g1 = 1.0 / (2.0 - std::cbrt(2.0));
            static const double g2 = 1.0 - 2.0 * g1; // negative middle step
            midpoint(s, g1 * dt, t);
            midpoint(s, g2 * dt, t);
            midpoint(s, g1 * dt, t);
        }
    }

private:
    struct CompiledTerm {
        std::vector<double> k;
        double amp = 0, phase = 0;
        const ham::WeightPoly* weight = nullptr;
        bool const_weight = true;
    };

    const ham::SystemSpec& spec_;
    const IntegratorConfig& cfg_;
    int n_;
    std::vector<CompiledTerm> terms_;
    mutable Vec mid_theta_, mid_i_, dtheta_, di_;
};

double hamiltonian_value(const ham::SystemSpec& spec, const State& s) {
    return ham::eval_h(spec.integrable, s.I) + spec.epsilon * ham::eval_f(spec.perturbation, s.theta, s.I);
}

struct RunOptions {
    double T = 0.0;
    double rho_stop = -1.0; // < 0 disables the drift stop
    bool keep_samples = true;
    std::optional<resonance::DetectorConfig> detector;
};

struct RunOutcome {
    TrajectoryRecord record;
    double stop_time = 0.0;
    bool drift_reached = false;
    std::size_t crossings = 0;
};

RunOutcome run_trajectory(const ham::SystemSpec& spec, State s, const RunOptions& opt, const IntegratorConfig& cfg) {
    spec.validate();
    if (static_cast<int>(s.I.size()) != spec.n || static_cast<int>(s.theta.size()) != spec.n)
        throw std::domain_error("initial state dimension mismatch");
    if (!(cfg.dt > 0)) throw std::domain_error("dt must be positive");
    if (!(cfg.fp_tol > 0)) throw std::domain_error("fp_tol must be positive");
    if (cfg.sample_stride < 1) throw std::domain_error("sample_stride must be >= 1");
    if (cfg.dt * field_lipschitz_bound(spec) >= 1.0)
        throw std::domain_error("dt too large for the fixed-point contraction; reduce dt");

    RunOutcome out;
    TrajectoryRecord& rec = out.record;
    reduce_mod1(s.theta);

    if (sup_norm(s.I) >= spec.R / 2)
        rec.warnings.push_back("initial action outside B(0, R/2); envelope hypotheses do not apply");
    if (ham::sup_bound(spec.perturbation, spec.R) > 1.0 + 1e-12)
        rec.warnings.push_back("sup |f| bound exceeds 1; the 2*eps energy envelope is not guaranteed");

    Engine engine(spec, cfg);

    const Vec I0 = s.I;
    const double h0 = ham::eval_h(spec.integrable, I0);
    const double H0 = hamiltonian_value(spec, s);
    const double h_cap = 2 * spec.epsilon + cfg.energy_slack;

    double drift = 0;
    Vec omega_prev, omega_next;
    if (opt.detector) omega_prev = ham::grad_h(spec.integrable, s.I);

    // Edge-triggered event stream: a fired vector stays quiet until its
    // relative residual leaves 2x the detection tolerance.
    resonance::KVec armed_k;
    bool armed_quiet = false;

    auto sample = [&](double t) {
        rec.times.push_back(t);
        if (opt.keep_samples) rec.states.push_back(s);
        rec.energy.push_back(hamiltonian_value(spec, s));
        rec.drift.push_back(drift);
    };

    sample(0.0);
    if (opt.detector) {
        // A resonance already present at t = 0 is an event at t = 0.
        if (auto ev = resonance::detect_ratio_crossing(omega_prev, omega_prev, *opt.detector, 0.0, 0.0)) {
            rec.events.push_back(*ev);
            ++out.crossings;
            armed_k = ev->k;
            armed_quiet = true;
        }
    }

    const auto total_steps = static_cast<long long>(std::ceil(opt.T / cfg.dt - 1e-9));
    double t = 0;
    bool stopped = false;
    for (long long step_index = 0; step_index < total_steps && !stopped; ++step_index) {
        const double dt = std::min(cfg.dt, opt.T - t);
        const double t_next = (step_index + 1 == total_steps) ? opt.T : t + dt;
        engine.advance(s, dt, t);
        reduce_mod1(s.theta);

        drift = std::max(drift, sup_diff(s.I, I0));
        rec.max_drift = std::max(rec.max_drift, drift);

        const double h_now = ham::eval_h(spec.integrable, s.I);
        rec.max_h_deviation = std::max(rec.max_h_deviation, std::fabs(h_now - h0));
        rec.max_energy_error = std::max(rec.max_energy_error, std::fabs(hamiltonian_value(spec, s) - H0));
        if (rec.max_h_deviation > h_cap) rec.energy_ok = false;

        if (opt.detector) {
            omega_next = ham::grad_h(spec.integrable, s.I);
            if (auto ev = resonance::detect_ratio_crossing(omega_prev, omega_next, *opt.detector, t, t_next)) {
                if (!(armed_quiet && ev->k == armed_k)) {
                    rec.events.push_back(*ev);
                    ++out.crossings;
                    armed_k = ev->k;
                    armed_quiet = true;
                }
            }
            if (armed_quiet && !armed_k.empty()) {
                double dot = 0;
                for (std::size_t c = 0; c < armed_k.size(); ++c)
                    dot += static_cast<double>(armed_k[c]) * omega_next[c];
                const double cap = 2.0 * opt.detector->tol * static_cast<double>(resonance::ell1(armed_k)) *
                                   resonance::sup_norm(omega_next);
                if (std::fabs(dot) > cap) armed_quiet = false;
            }
            omega_prev.swap(omega_next);
        }

        t = t_next;
        if (sup_norm(s.I) > spec.R) {
            rec.escaped = true;
            stopped = true;
        }
        if (opt.rho_stop >= 0 && drift >= opt.rho_stop) {
            out.drift_reached = true;
            stopped = true;
        }
        if ((step_index + 1) % cfg.sample_stride == 0 || stopped || step_index + 1 == total_steps) sample(t);
    }

    out.stop_time = t;
    rec.censored = opt.rho_stop >= 0 && !out.drift_reached && !rec.escaped;
    return out;
}

} // namespace

FieldValue hamiltonian_vector_field(const ham::SystemSpec& spec, const State& state) {
    IntegratorConfig cfg;
    Engine engine(spec, cfg);
    FieldValue f;
    f.dtheta.resize(spec.n);
    f.dI.resize(spec.n);
    engine.field(state.theta, state.I, f.dtheta, f.dI);
    return f;
}

State step(const ham::SystemSpec& spec, const State& state, const IntegratorConfig& cfg, double t) {
    Engine engine(spec, cfg);
    State s = state;
    engine.advance(s, cfg.dt, t);
    reduce_mod1(s.theta);
    return s;
}

TrajectoryRecord integrate(const ham::SystemSpec& spec, const State& s0, double T, const IntegratorConfig& cfg,
                           const std::optional<resonance::DetectorConfig>& detector, double rho_stop) {
    if (!(T > 0)) throw std::domain_error("integrate: T must be positive");
    RunOptions opt;
    opt.T = T;
    opt.detector = detector;
    opt.rho_stop = rho_stop;
    return run_trajectory(spec, s0, opt, cfg).record;
}

StabilityTime stability_time(const ham::SystemSpec& spec, const State& s0, double rho, double T_max,
                             const IntegratorConfig& cfg, const std::optional<resonance::DetectorConfig>& detector) {
    if (!(rho > 0 && rho < spec.R / 2)) throw std::domain_error("stability_time: rho must lie in (0, R/2)");
    if (!(T_max > 0)) throw std::domain_error("stability_time: T_max must be positive");
    RunOptions opt;
    opt.T = T_max;
    opt.rho_stop = rho;
    opt.keep_samples = false;
    opt.detector = detector;
    const RunOutcome out = run_trajectory(spec, s0, opt, cfg);
    return {out.drift_reached || out.record.escaped ? out.stop_time : T_max, out.record.censored,
            out.record.max_drift, out.crossings};
}

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Vec seeded_angles(std::uint64_t seed, int n) {
    Vec theta(n);
    std::uint64_t state = seed;
    for (int i = 0; i < n; ++i) theta[i] = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    return theta;
}

SweepResult sweep(const ham::SystemSpec& spec_template, const SweepConfig& scfg, const IntegratorConfig& cfg) {
    if (scfg.eps_list.empty()) throw std::domain_error("sweep: empty epsilon grid");
    for (std::size_t i = 0; i < scfg.eps_list.size(); ++i) {
        if (!(scfg.eps_list[i] > 0)) throw std::domain_error("sweep: epsilon values must be positive");
        if (i > 0 && !(scfg.eps_list[i] < scfg.eps_list[i - 1]))
            throw std::domain_error("sweep: epsilon grid must be strictly decreasing (duplicates rejected)");
    }
    if (scfg.seeds.empty()) throw std::domain_error("sweep: at least one seed required");
    if (static_cast<int>(scfg.I0.size()) != spec_template.n)
        throw std::domain_error("sweep: initial action dimension mismatch");

    const std::size_t n_rows = scfg.eps_list.size() * scfg.seeds.size();
    SweepResult result;
    result.rows.resize(n_rows);

    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t idx = cursor.fetch_add(1);
            if (idx >= n_rows) return;
            const std::size_t ei = idx / scfg.seeds.size();
            const std::size_t si = idx % scfg.seeds.size();
            SweepRow& row = result.rows[idx];
            row.epsilon = scfg.eps_list[ei];
            row.seed = scfg.seeds[si];
            try {
                ham::SystemSpec spec = spec_template;
                spec.epsilon = row.epsilon;
                State s0{seeded_angles(row.seed, spec.n), scfg.I0};
                const StabilityTime st = stability_time(spec, s0, scfg.rho, scfg.T_max, cfg, scfg.detector);
                row.T = st.T;
                row.censored = st.censored;
                row.max_drift = st.max_drift;
                row.crossings = st.crossings;
            } catch (const std::exception& e) {
                row.failed = true;
                row.error = e.what();
            }
        }
    };

    const int n_workers = std::max(1, scfg.workers);
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    for (std::size_t ei = 0; ei < scfg.eps_list.size(); ++ei) {
        SweepAggregate agg;
        agg.epsilon = scfg.eps_list[ei];
        std::vector<std::pair<double, bool>> ts;
        for (std::size_t si = 0; si < scfg.seeds.size(); ++si) {
            const SweepRow& row = result.rows[ei * scfg.seeds.size() + si];
            if (row.failed) {
                ++agg.n_failed;
                continue;
            }
            ts.emplace_back(row.T, row.censored);
            if (row.censored) ++agg.n_censored;
        }
        if (!ts.empty()) {
            std::sort(ts.begin(), ts.end());
            const auto& med = ts[(ts.size() - 1) / 2]; // lower median: an actual run
            agg.median_T = med.first;
            agg.censored = med.second;
        } else {
            agg.censored = true;
        }
        result.aggregates.push_back(agg);
    }

    std::vector<std::pair<double, double>> fit_rows;
    for (const SweepAggregate& a : result.aggregates)
        if (!a.censored && a.median_T > 1.0) fit_rows.emplace_back(a.epsilon, a.median_T);
    if (fit_rows.size() >= 3) {
        try {
            result.fit = fit_exponent(fit_rows);
        } catch (const std::exception& e) {
            result.fit_note = e.what();
        }
    } else {
        result.fit_note =
            "fit skipped: needs >= 3 non-censored aggregates with T > 1, have " + std::to_string(fit_rows.size());
    }
    return result;
}

SweepResult synthetic_sweep(double a, const std::vector<double>& eps_list) {
    if (!(a > 0)) throw std::domain_error("synthetic_sweep: exponent must be positive");
    SweepResult result;
    for (double eps : eps_list) {
        if (!(eps > 0)) throw std::domain_error("synthetic_sweep: epsilon values must be positive");
        if (std::pow(eps, -a) > 700.0)
            throw std::domain_error("synthetic_sweep: exp(eps^-a) overflows; use a larger epsilon");
        SweepRow row;
        row.epsilon = eps;
        row.T = std::exp(std::pow(eps, -a));
        result.rows.push_back(row);
        result.aggregates.push_back({eps, row.T, false, 0, 0});
    }
    std::vector<std::pair<double, double>> fit_rows;
    for (const SweepRow& r : result.rows)
        if (r.T > 1.0) fit_rows.emplace_back(r.epsilon, r.T);
    if (fit_rows.size() >= 3)
        result.fit = fit_exponent(fit_rows);
    else
        result.fit_note = "fit skipped: needs >= 3 rows with T > 1";
    return result;
}

FitResult fit_exponent(const std::vector<std::pair<double, double>>& eps_T) {
    if (eps_T.size() < 3) throw std::domain_error("fit_exponent: needs at least 3 rows");
    std::vector<double> xs, ys;
    for (const auto& [eps, T] : eps_T) {
        if (!(eps > 0)) throw std::domain_error("fit_exponent: epsilon must be positive");
        if (!(T > 1.0)) throw std::domain_error("fit_exponent: stability times must exceed 1");
        xs.push_back(std::log(1.0 / eps));
        ys.push_back(std::log(std::log(T)));
    }
    const auto n = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0) throw std::domain_error("fit_exponent: degenerate epsilon grid");
    if (syy == 0) throw std::domain_error("fit_exponent: degenerate (constant) stability times");
    FitResult fit;
    fit.a_estimate = sxy / sxx;
    fit.intercept = my - fit.a_estimate * mx;
    double rss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.intercept + fit.a_estimate * xs[i]);
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / n);
    fit.points_used = static_cast<int>(xs.size());
    return fit;
}

} // namespace nekstab::sim
