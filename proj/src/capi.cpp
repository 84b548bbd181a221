#include "nekstab.h"

#include "nekstab/envelope.hpp"
#include "nekstab/errors.hpp"
#include "nekstab/lattice.hpp"
#include "nekstab/selftest.hpp"
#include "nekstab/serialize.hpp"
#include "nekstab/simulate.hpp"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <set>
#include <stdexcept>
#include <string>

using nlohmann::json;

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
nks_status guarded(Fn&& fn) {
    try {
        fn();
        return NKS_OK;
    } catch (const std::domain_error& e) {
        set_error(e.what());
        return NKS_ERR_DOMAIN;
    } catch (const nekstab::resource_error& e) {
        set_error(e.what());
        return NKS_ERR_RESOURCE;
    } catch (const nekstab::step_error& e) {
        set_error(std::string(e.what()) + " (t=" + std::to_string(e.time) +
                  ", iters=" + std::to_string(e.iterations) + ", delta=" + std::to_string(e.last_delta) + ")");
        return NKS_ERR_STEP;
    } catch (const json::exception& e) {
        set_error(e.what());
        return NKS_ERR_PARSE;
    } catch (const std::bad_alloc&) {
        set_error("out of memory");
        return NKS_ERR_RUNTIME;
    } catch (const std::exception& e) {
        set_error(e.what());
        return NKS_ERR_RUNTIME;
    }
}

nekstab::lattice::IntVec to_intvec(const int64_t* k, size_t n) {
    if (!k || n == 0) throw std::domain_error("null or empty integer vector");
    nekstab::lattice::IntVec v(n);
    for (size_t i = 0; i < n; ++i) v[i] = k[i];
    return v;
}

nekstab::lattice::IntMat to_intmat(const int64_t* entries, size_t rows, size_t cols) {
    if (!entries || rows == 0 || cols == 0) throw std::domain_error("null or empty integer matrix");
    nekstab::lattice::IntMat m(rows, nekstab::lattice::IntVec(cols));
    for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j) m[i][j] = entries[i * cols + j];
    return m;
}

// cpp_int entries within int64 stay JSON numbers; larger ones become strings.
json int_to_json(const nekstab::lattice::Int& x) {
    if (x >= std::numeric_limits<int64_t>::min() && x <= std::numeric_limits<int64_t>::max())
        return static_cast<int64_t>(x);
    return x.str();
}

json mat_to_json(const nekstab::lattice::IntMat& m) {
    json rows = json::array();
    for (const auto& row : m) {
        json r = json::array();
        for (const auto& x : row) r.push_back(int_to_json(x));
        rows.push_back(r);
    }
    return rows;
}

void out_json(char** json_out, const json& j) {
    if (!json_out) throw std::domain_error("null output pointer");
    *json_out = dup_string(j.dump(2));
    if (!*json_out) throw std::bad_alloc();
}

} // namespace

struct nks_system {
    nekstab::ham::SystemSpec spec;
};

struct nks_trajectory {
    nekstab::sim::TrajectoryRecord record;
};

struct nks_sweep {
    nekstab::sim::SweepResult result;
};

extern "C" {

const char* nks_version(void) { return "0.1.0"; }

const char* nks_last_error(void) { return g_last_error.c_str(); }

void nks_string_free(char* s) { std::free(s); }

nks_status nks_lattice_complete(const int64_t* k, size_t n, char** json_out) {
    return guarded([&] {
        namespace lat = nekstab::lattice;
        const lat::IntVec kv = to_intvec(k, n);
        const lat::IntMat a = lat::unimodular_completion(kv);
        const lat::IntMat inv = lat::inverse_unimodular(a);
        const lat::Int d = lat::det(a);
        const auto [c_up, cp_up] = lat::lochak_bounds_exact(kv, static_cast<int>(n));
        json row_norms = json::array();
        bool norms_ok = true;
        for (const auto& row : a) {
            const lat::Int nrm = lat::ell1(row);
            row_norms.push_back(int_to_json(nrm));
            norms_ok &= nrm <= cp_up;
        }
        const lat::Int inv_norm = lat::max_row_ell1(inv);
        json j;
        j["k"] = mat_to_json({kv})[0];
        j["matrix"] = mat_to_json(a);
        j["det"] = int_to_json(d);
        j["row_norms"] = row_norms;
        j["k_norm"] = int_to_json(lat::ell1(kv));
        j["inverse"] = mat_to_json(inv);
        j["inverse_norm"] = int_to_json(inv_norm);
        j["bounds"] = {{"c", int_to_json(c_up)}, {"c_prime", int_to_json(cp_up)}};
        j["checks"] = {{"det_unimodular", d == 1 || d == -1},
                       {"first_row_is_k", a[0] == kv},
                       {"row_norms_bounded", norms_ok},
                       {"inverse_norm_bounded", inv_norm <= c_up}};
        out_json(json_out, j);
    });
}

nks_status nks_lattice_smith(const int64_t* entries, size_t rows, size_t cols, char** json_out) {
    return guarded([&] {
        namespace lat = nekstab::lattice;
        const lat::IntMat l = to_intmat(entries, rows, cols);
        const lat::SmithDecomposition dec = lat::smith_normal_form(l);
        lat::IntMat delta(rows, lat::IntVec(cols, 0));
        for (size_t i = 0; i < rows; ++i) delta[i][i] = dec.diag[i];
        const bool ok = lat::mul(lat::mul(dec.b, delta), dec.a) == l;
        json diag = json::array();
        for (const auto& x : dec.diag) diag.push_back(int_to_json(x));
        json j;
        j["input"] = mat_to_json(l);
        j["b"] = mat_to_json(dec.b);
        j["diag"] = diag;
        j["a"] = mat_to_json(dec.a);
        j["det_b"] = int_to_json(lat::det(dec.b));
        j["det_a"] = int_to_json(lat::det(dec.a));
        j["reconstruction_ok"] = ok;
        out_json(json_out, j);
    });
}

nks_status nks_lattice_dirichlet(double center, double length, int64_t* p_out, int64_t* q_out) {
    return guarded([&] {
        if (!p_out || !q_out) throw std::domain_error("null output pointer");
        const auto r = nekstab::lattice::dirichlet_rational(center, length);
        if (r.q > std::numeric_limits<int64_t>::max() ||
            r.p > std::numeric_limits<int64_t>::max() || r.p < std::numeric_limits<int64_t>::min())
            throw std::domain_error("dirichlet_rational: result exceeds int64 range");
        *p_out = static_cast<int64_t>(r.p);
        *q_out = static_cast<int64_t>(r.q);
    });
}

nks_status nks_lattice_volume(const int64_t* entries, size_t rows, size_t cols, double* out) {
    return guarded([&] {
        if (!out) throw std::domain_error("null output pointer");
        *out = nekstab::lattice::module_volume(to_intmat(entries, rows, cols));
    });
}

nks_status nks_lattice_bounds(const int64_t* k, size_t n, double* c_upper, double* c_prime_upper) {
    return guarded([&] {
        if (!c_upper || !c_prime_upper) throw std::domain_error("null output pointer");
        const auto [c, cp] = nekstab::lattice::lochak_bounds(to_intvec(k, n), static_cast<int>(n));
        *c_upper = c;
        *c_prime_upper = cp;
    });
}

namespace {

nekstab::envelope::Constants constants_from_json(const json& j) {
    nekstab::envelope::Constants c;
    if (j.is_null()) return c;
    const std::set<std::string> keys{"K0",  "eps0", "c1",  "c2",  "c3",  "c4",  "c5",  "c1p",
                                     "c2p", "c3p",  "c4p", "c5p", "rho0", "C",  "c7"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!keys.count(it.key())) throw std::domain_error("unknown constant '" + it.key() + "'");
        const double v = it.value().get<double>();
        if (!(v > 0)) throw std::domain_error("constants must be positive");
        if (it.key() == "K0") c.K0 = v;
        else if (it.key() == "eps0") c.eps0 = v;
        else if (it.key() == "c1") c.c1 = v;
        else if (it.key() == "c2") c.c2 = v;
        else if (it.key() == "c3") c.c3 = v;
        else if (it.key() == "c4") c.c4 = v;
        else if (it.key() == "c5") c.c5 = v;
        else if (it.key() == "c1p") c.c1p = v;
        else if (it.key() == "c2p") c.c2p = v;
        else if (it.key() == "c3p") c.c3p = v;
        else if (it.key() == "c4p") c.c4p = v;
        else if (it.key() == "c5p") c.c5p = v;
        else if (it.key() == "rho0") c.rho0 = v;
        else if (it.key() == "C") c.C = v;
        else if (it.key() == "c7") c.c7 = v;
    }
    return c;
}

json thresholds_json(const std::vector<nekstab::envelope::Threshold>& ts) {
    json out = json::array();
    for (const auto& t : ts)
        out.push_back(
            {{"name", t.name}, {"formula", t.formula}, {"lhs", t.lhs}, {"rhs", t.rhs}, {"satisfied", t.satisfied}});
    return out;
}

} // namespace

nks_status nks_envelope_predict(const char* request_json, char** json_out) {
    return guarded([&] {
        namespace env = nekstab::envelope;
        if (!request_json) throw std::domain_error("null request");
        const json req = json::parse(request_json);
        for (auto it = req.begin(); it != req.end(); ++it) {
            static const std::set<std::string> keys{"n", "eps", "delta", "gamma", "alpha", "constants"};
            if (!keys.count(it.key())) throw std::domain_error("unknown key '" + it.key() + "' in envelope request");
        }
        const int n = req.at("n").get<int>();
        const double eps = req.at("eps").get<double>();
        const env::Constants consts = constants_from_json(req.value("constants", json()));
        const bool gevrey = req.contains("alpha");
        const double alpha = gevrey ? req.at("alpha").get<double>() : 1.0;

        double delta;
        if (req.contains("delta") == req.contains("gamma"))
            throw std::domain_error("provide exactly one of 'delta' or 'gamma'");
        if (req.contains("delta")) {
            delta = req.at("delta").get<double>();
        } else {
            const double gamma = req.at("gamma").get<double>();
            delta = gevrey ? 2.5 * gamma * (n - 1) : gamma / (n - 1);
        }

        const env::StabilityPrediction p = gevrey ? env::predict_gevrey(n, alpha, delta, eps, consts)
                                                  : env::predict_analytic(n, delta, eps, consts);
        json j;
        j["case"] = gevrey ? "gevrey" : "analytic";
        j["n"] = n;
        if (gevrey) j["alpha"] = alpha;
        j["eps"] = eps;
        j["delta"] = delta;
        j["gamma"] = p.gamma;
        j["confinement_radius"] = p.confinement_radius;
        j["radius_exponent"] = p.radius_exponent;
        j["time_log_exponent"] = p.time_log_exponent;
        j["log_time_bound"] = p.log_time;
        j["K"] = p.K;
        j["thresholds"] = thresholds_json(p.thresholds);
        j["shape_only"] = p.shape_only;
        j["note"] = "constants default to 1; predictions are shape-only unless constants are calibrated";
        out_json(json_out, j);
    });
}

nks_status nks_envelope_local(int n, int multiplicity, double alpha, double* a_out, double* b_out) {
    return guarded([&] {
        if (!a_out || !b_out) throw std::domain_error("null output pointer");
        const auto [a, b] = nekstab::envelope::local_exponents(n, multiplicity, alpha);
        *a_out = a;
        *b_out = b;
    });
}

nks_status nks_system_parse(const char* json_text, nks_system** out) {
    return guarded([&] {
        if (!json_text || !out) throw std::domain_error("null argument");
        auto sys = std::make_unique<nks_system>();
        sys->spec = nekstab::io::system_from_json(json::parse(json_text));
        *out = sys.release();
    });
}

nks_status nks_system_load(const char* path, nks_system** out) {
    return guarded([&] {
        if (!path || !out) throw std::domain_error("null argument");
        auto sys = std::make_unique<nks_system>();
        sys->spec = nekstab::io::load_system(path);
        *out = sys.release();
    });
}

void nks_system_free(nks_system* sys) { delete sys; }

int nks_system_dim(const nks_system* sys) { return sys ? sys->spec.n : 0; }

namespace {

json condition_report(const nekstab::ham::SystemSpec& spec, int grid_points) {
    namespace ham = nekstab::ham;
    std::uint64_t state = 0x9d15ab1e;
    double margin_min = std::numeric_limits<double>::infinity();
    bool deriv_ok = true;
    std::vector<ham::Vec> grid;
    for (int g = 0; g < grid_points; ++g) {
        ham::Vec I(spec.n);
        for (int i = 0; i < spec.n; ++i)
            I[i] = (2.0 * static_cast<double>(nekstab::sim::splitmix64(state) >> 11) * 0x1.0p-53 - 1.0) * spec.R / 2;
        grid.push_back(I);
    }
    bool qc_pass = true;
    for (const ham::Vec& I : grid) {
        const auto qc = ham::check_qc(spec.integrable, I, spec.m);
        margin_min = std::min(margin_min, qc.margin);
        qc_pass &= qc.pass;
    }
    deriv_ok = ham::check_derivative_bound(spec.integrable, grid, spec.M);
    json j;
    j["qc_margin_min"] = margin_min;
    j["qc_pass"] = qc_pass;
    j["derivative_bound_pass"] = deriv_ok;
    j["sup_f_bound"] = ham::sup_bound(spec.perturbation, spec.R);
    if (spec.gevrey)
        j["gevrey_norm_bound"] =
            ham::gevrey_norm_bound(spec.perturbation, spec.gevrey->alpha, spec.gevrey->L, spec.R);
    j["grid_points"] = grid_points;
    return j;
}

} // namespace

nks_status nks_system_check(const nks_system* sys, const char* options_json, char** report_json) {
    return guarded([&] {
        if (!sys) throw std::domain_error("null system");
        int grid_points = 64;
        if (options_json && *options_json) {
            const json opts = json::parse(options_json);
            for (auto it = opts.begin(); it != opts.end(); ++it)
                if (it.key() != "grid_points") throw std::domain_error("unknown key '" + it.key() + "'");
            grid_points = opts.value("grid_points", 64);
        }
        if (grid_points < 1) throw std::domain_error("grid_points must be >= 1");
        out_json(report_json, condition_report(sys->spec, grid_points));
    });
}

namespace {

struct TrajectoryOptions {
    nekstab::sim::State s0;
    double T = 0;
    double rho = -1.0; // optional drift stop
    nekstab::sim::IntegratorConfig cfg;
    std::optional<nekstab::resonance::DetectorConfig> detector;
    bool force = false;
};

nekstab::sim::IntegratorConfig integrator_from_json(const json& j) {
    nekstab::sim::IntegratorConfig cfg;
    if (j.contains("dt")) cfg.dt = j.at("dt").get<double>();
    if (j.contains("scheme")) {
        const std::string s = j.at("scheme").get<std::string>();
        if (s == "implicit_midpoint")
            cfg.scheme = nekstab::sim::Scheme::implicit_midpoint;
        else if (s == "composed4")
            cfg.scheme = nekstab::sim::Scheme::composed4;
        else
            throw std::domain_error("unknown scheme '" + s + "'");
    }
    if (j.contains("fp_tol")) cfg.fp_tol = j.at("fp_tol").get<double>();
    if (j.contains("fp_max_iters")) cfg.fp_max_iters = j.at("fp_max_iters").get<int>();
    if (j.contains("sample_stride")) cfg.sample_stride = j.at("sample_stride").get<int>();
    if (j.contains("energy_slack")) cfg.energy_slack = j.at("energy_slack").get<double>();
    return cfg;
}

std::optional<nekstab::resonance::DetectorConfig> detector_from_json(const json& j) {
    if (!j.contains("detector")) return std::nullopt;
    const json& d = j.at("detector");
    for (auto it = d.begin(); it != d.end(); ++it) {
        static const std::set<std::string> keys{"K", "tol", "enum_budget"};
        if (!keys.count(it.key())) throw std::domain_error("unknown detector key '" + it.key() + "'");
    }
    nekstab::resonance::DetectorConfig cfg;
    if (d.contains("K")) cfg.K = d.at("K").get<double>();
    if (d.contains("tol")) cfg.tol = d.at("tol").get<double>();
    if (d.contains("enum_budget")) cfg.enum_budget = d.at("enum_budget").get<std::uint64_t>();
    return cfg;
}

void gate_on_conditions(const nekstab::ham::SystemSpec& spec, bool force) {
    if (force) return;
    const json rep = condition_report(spec, 64);
    if (!rep.at("qc_pass").get<bool>() || !rep.at("derivative_bound_pass").get<bool>())
        throw std::domain_error("system fails the QC / derivative-bound gate (margin " +
                                std::to_string(rep.at("qc_margin_min").get<double>()) +
                                "); pass force=true to continue anyway");
}

TrajectoryOptions trajectory_options(const nekstab::ham::SystemSpec& spec, const char* options_json) {
    if (!options_json) throw std::domain_error("null options");
    const json j = json::parse(options_json);
    static const std::set<std::string> keys{"theta0",   "seed",          "i0",     "T",       "rho",
                                            "dt",       "scheme",        "fp_tol", "fp_max_iters",
                                            "sample_stride", "energy_slack", "detector", "force"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!keys.count(it.key())) throw std::domain_error("unknown key '" + it.key() + "' in simulate options");
    TrajectoryOptions opt;
    opt.T = j.at("T").get<double>();
    if (j.contains("rho")) {
        opt.rho = j.at("rho").get<double>();
        if (!(opt.rho > 0 && opt.rho < spec.R / 2)) throw std::domain_error("rho must lie in (0, R/2)");
    }
    opt.cfg = integrator_from_json(j);
    opt.detector = detector_from_json(j);
    opt.force = j.value("force", false);
    if (j.contains("theta0") == j.contains("seed"))
        throw std::domain_error("provide exactly one of 'theta0' or 'seed'");
    if (j.contains("theta0")) {
        opt.s0.theta = j.at("theta0").get<std::vector<double>>();
    } else {
        opt.s0.theta = nekstab::sim::seeded_angles(j.at("seed").get<std::uint64_t>(), spec.n);
    }
    if (!j.contains("i0")) throw std::domain_error("missing 'i0'");
    opt.s0.I = j.at("i0").get<std::vector<double>>();
    return opt;
}

} // namespace

nks_status nks_simulate(const nks_system* sys, const char* options_json, nks_trajectory** out) {
    return guarded([&] {
        if (!sys || !out) throw std::domain_error("null argument");
        const TrajectoryOptions opt = trajectory_options(sys->spec, options_json);
        gate_on_conditions(sys->spec, opt.force);
        auto traj = std::make_unique<nks_trajectory>();
        traj->record = nekstab::sim::integrate(sys->spec, opt.s0, opt.T, opt.cfg, opt.detector, opt.rho);
        *out = traj.release();
    });
}

void nks_trajectory_free(nks_trajectory* traj) { delete traj; }

nks_status nks_trajectory_write_csv(const nks_trajectory* traj, const char* path) {
    return guarded([&] {
        if (!traj || !path) throw std::domain_error("null argument");
        nekstab::io::write_file(path, nekstab::io::trajectory_csv(traj->record));
    });
}

nks_status nks_trajectory_events_json(const nks_trajectory* traj, char** json_out) {
    return guarded([&] {
        if (!traj) throw std::domain_error("null trajectory");
        out_json(json_out, nekstab::io::trajectory_events_json(traj->record));
    });
}

nks_status nks_trajectory_summary_json(const nks_trajectory* traj, char** json_out) {
    return guarded([&] {
        if (!traj) throw std::domain_error("null trajectory");
        out_json(json_out, nekstab::io::trajectory_summary_json(traj->record));
    });
}

nks_status nks_sweep_run(const nks_system* sys, const char* options_json, nks_sweep** out) {
    return guarded([&] {
        if (!sys || !out || !options_json) throw std::domain_error("null argument");
        const json j = json::parse(options_json);
        static const std::set<std::string> keys{"eps",    "rho",    "T_max",        "seeds",
                                                "workers", "i0",    "dt",           "scheme",
                                                "fp_tol", "fp_max_iters", "sample_stride", "energy_slack",
                                                "detector", "force"};
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!keys.count(it.key())) throw std::domain_error("unknown key '" + it.key() + "' in sweep options");
        nekstab::sim::SweepConfig scfg;
        scfg.eps_list = j.at("eps").get<std::vector<double>>();
        scfg.rho = j.at("rho").get<double>();
        scfg.T_max = j.at("T_max").get<double>();
        scfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        scfg.workers = j.value("workers", 1);
        if (!j.contains("i0")) throw std::domain_error("missing 'i0'");
        scfg.I0 = j.at("i0").get<std::vector<double>>();
        scfg.detector = detector_from_json(j);
        gate_on_conditions(sys->spec, j.value("force", false));
        auto sweep = std::make_unique<nks_sweep>();
        sweep->result = nekstab::sim::sweep(sys->spec, scfg, integrator_from_json(j));
        *out = sweep.release();
    });
}

nks_status nks_sweep_synthetic(const char* options_json, nks_sweep** out) {
    return guarded([&] {
        if (!out || !options_json) throw std::domain_error("null argument");
        const json j = json::parse(options_json);
        for (auto it = j.begin(); it != j.end(); ++it)
            if (it.key() != "a" && it.key() != "eps")
                throw std::domain_error("unknown key '" + it.key() + "' in synthetic options");
        auto sweep = std::make_unique<nks_sweep>();
        sweep->result =
            nekstab::sim::synthetic_sweep(j.at("a").get<double>(), j.at("eps").get<std::vector<double>>());
        *out = sweep.release();
    });
}

void nks_sweep_free(nks_sweep* sweep) { delete sweep; }

nks_status nks_sweep_write_csv(const nks_sweep* sweep, const char* path) {
    return guarded([&] {
        if (!sweep || !path) throw std::domain_error("null argument");
        nekstab::io::write_file(path, nekstab::io::sweep_csv(sweep->result));
    });
}

nks_status nks_sweep_summary_json(const nks_sweep* sweep, char** json_out) {
    return guarded([&] {
        if (!sweep) throw std::domain_error("null sweep");
        out_json(json_out, nekstab::io::sweep_summary_json(sweep->result));
    });
}

nks_status nks_fit_csv(const char* path, char** json_out) {
    return guarded([&] {
        if (!path) throw std::domain_error("null path");
        const auto fit = nekstab::io::fit_from_sweep_csv(nekstab::io::read_file(path));
        out_json(json_out, json{{"a_estimate", fit.a_estimate},
                                {"intercept", fit.intercept},
                                {"residual", fit.residual},
                                {"points_used", fit.points_used}});
    });
}

nks_status nks_selftest(int inject_fault, char** report_json) {
    bool all_passed = false;
    const nks_status status = guarded([&] {
        const nekstab::selftest::Report report = nekstab::selftest::run(inject_fault != 0);
        if (report_json) out_json(report_json, nekstab::selftest::report_json(report));
        all_passed = report.all_passed;
        if (!all_passed)
            for (const auto& s : report.suites)
                if (s.failures) {
                    set_error("selftest suite '" + s.name + "' failed: " + s.first_counterexample);
                    break;
                }
    });
    if (status != NKS_OK) return status;
    return all_passed ? NKS_OK : NKS_ERR_SELFTEST;
}

} // extern "C"
