// Command-line front end for the nekstab shared library. Everything here
// goes through the C API in nekstab.h; exit codes are 0 success, 1 selftest
// failure, 2 usage/domain error, 3 runtime/integrator error.

#include <nekstab.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

using nlohmann::json;

namespace {

int exit_code(nks_status status) {
    switch (status) {
        case NKS_OK: return 0;
        case NKS_ERR_SELFTEST: return 1;
        case NKS_ERR_DOMAIN:
        case NKS_ERR_PARSE: return 2;
        default: return 3;
    }
}

int fail(nks_status status) {
    std::cerr << "error: " << nks_last_error() << "\n";
    return exit_code(status);
}

struct StringOut {
    char* s = nullptr;
    ~StringOut() { nks_string_free(s); }
};

int emit(nks_status status, StringOut& out) {
    if (status != NKS_OK) return fail(status);
    std::cout << out.s << "\n";
    return 0;
}

std::vector<int64_t> parse_int_list(const std::string& text) {
    std::vector<int64_t> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stoll(tok));
    return out;
}

// Rows separated by ';', entries by spaces or commas: "2 4; 1 3".
bool parse_matrix(const std::string& text, std::vector<int64_t>& entries, size_t& rows, size_t& cols) {
    entries.clear();
    rows = cols = 0;
    std::stringstream ss(text);
    std::string row;
    while (std::getline(ss, row, ';')) {
        std::vector<int64_t> vals;
        std::stringstream rs(row);
        std::string tok;
        while (rs >> tok) {
            std::stringstream ts(tok);
            std::string piece;
            while (std::getline(ts, piece, ','))
                if (!piece.empty()) vals.push_back(std::stoll(piece));
        }
        if (vals.empty()) continue;
        if (cols == 0) cols = vals.size();
        if (vals.size() != cols) return false;
        entries.insert(entries.end(), vals.begin(), vals.end());
        ++rows;
    }
    return rows > 0;
}

struct SystemHandle {
    nks_system* sys = nullptr;
    ~SystemHandle() { nks_system_free(sys); }
};

json detector_json(double K, double tol) { return {{"K", K}, {"tol", tol}}; }

int default_workers() {
    if (const char* env = std::getenv("NEKSTAB_WORKERS")) {
        const int w = std::atoi(env);
        if (w >= 1) return w;
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nekstab: stability laboratory for near-integrable quasi-convex Hamiltonians"};
    app.require_subcommand(1);

    // ---- lattice ----
    auto* lattice = app.add_subcommand("lattice", "exact integer lattice operations");
    lattice->require_subcommand(1);

    std::string k_arg;
    auto* complete = lattice->add_subcommand("complete", "unimodular completion of a primitive vector");
    complete->add_option("--k", k_arg, "comma-separated integer vector, e.g. 2,3")->required();

    std::string rows_arg;
    auto* smith = lattice->add_subcommand("smith", "Smith normal form of a full-row-rank matrix");
    smith->add_option("--rows", rows_arg, "rows separated by ';', e.g. \"2 4; 1 3\"")->required();

    double center = 0, length = 0;
    auto* dirichlet = lattice->add_subcommand("dirichlet", "low-order rational in an interval of [-1,1]");
    dirichlet->add_option("--center", center)->required();
    dirichlet->add_option("--length", length)->required();

    std::string vol_rows;
    auto* volume = lattice->add_subcommand("volume", "module volume sqrt(det(M M^T))");
    volume->add_option("--rows", vol_rows)->required();

    std::string bounds_k;
    auto* bounds = lattice->add_subcommand("bounds", "norm bounds (n! K^(n-1), K) for a primitive vector");
    bounds->add_option("--k", bounds_k)->required();

    // ---- envelope ----
    int env_n = 3;
    double env_eps = 1e-4, env_delta = -1, env_gamma = -1, env_alpha = -1;
    std::string constants_file;
    auto* envelope = app.add_subcommand("envelope", "stability exponents, radii, time bounds, thresholds");
    envelope->add_option("--n", env_n, "degrees of freedom")->required();
    envelope->add_option("--eps", env_eps, "perturbation size")->required();
    envelope->add_option("--delta", env_delta, "offset exponent delta");
    envelope->add_option("--gamma", env_gamma, "schedule exponent gamma");
    envelope->add_option("--alpha", env_alpha, "Gevrey exponent (omit for the analytic case)");
    envelope->add_option("--constants", constants_file, "JSON file overriding the unit constants");

    // ---- simulate ----
    std::string sim_spec, sim_out_dir = ".", sim_scheme = "implicit_midpoint", sim_theta0;
    double sim_T = 1e3, sim_dt = 1e-2, sim_K = 10, sim_tol = 1e-6, sim_energy_slack = 1e-6, sim_rho = -1;
    std::uint64_t sim_seed = 1;
    int sim_stride = 100;
    std::string sim_i0;
    bool sim_force = false, sim_no_detector = false;
    auto* simulate = app.add_subcommand("simulate", "integrate one trajectory, log drift/energy/crossings");
    simulate->add_option("--spec", sim_spec, "system spec JSON file")->required();
    simulate->add_option("--T", sim_T, "integration time")->required();
    simulate->add_option("--dt", sim_dt, "step size");
    simulate->add_option("--K", sim_K, "detector order cutoff");
    simulate->add_option("--tol", sim_tol, "detector residual tolerance");
    simulate->add_option("--rho", sim_rho, "stop once the action drift reaches rho (0, R/2)");
    simulate->add_option("--scheme", sim_scheme, "implicit_midpoint | composed4");
    simulate->add_option("--stride", sim_stride, "sample recording stride");
    simulate->add_option("--seed", sim_seed, "seed for initial angles");
    simulate->add_option("--theta0", sim_theta0, "explicit initial angles, comma-separated (overrides --seed)");
    simulate->add_option("--i0", sim_i0, "initial actions, comma-separated (default R/4 * ones)");
    simulate->add_option("--energy-slack", sim_energy_slack, "integrator allowance in the energy monitor");
    simulate->add_option("--out", sim_out_dir, "output directory");
    simulate->add_flag("--force", sim_force, "continue even if the QC / derivative-bound gate fails");
    simulate->add_flag("--no-detector", sim_no_detector, "disable resonance detection");

    // ---- sweep ----
    std::string sweep_spec, sweep_eps, sweep_seeds = "1", sweep_out_dir = ".", sweep_i0, sweep_scheme = "implicit_midpoint";
    std::string sweep_synthetic;
    double sweep_rho = 0.1, sweep_Tmax = 1e6, sweep_dt = 1e-2, sweep_K = 10, sweep_tol = 1e-6;
    int sweep_workers = default_workers();
    bool sweep_force = false, sweep_no_detector = false;
    auto* sweep = app.add_subcommand("sweep", "stability-time sweep over an epsilon grid, with exponent fit");
    sweep->add_option("--spec", sweep_spec, "system spec JSON file (template; epsilon comes from the grid)");
    sweep->add_option("--eps", sweep_eps, "strictly decreasing grid, e.g. 1e-2,1e-3,1e-4");
    sweep->add_option("--rho", sweep_rho, "drift threshold (0, R/2)");
    sweep->add_option("--T-max", sweep_Tmax, "censoring horizon");
    sweep->add_option("--seeds", sweep_seeds, "comma-separated seeds");
    sweep->add_option("--workers", sweep_workers, "worker threads (default $NEKSTAB_WORKERS or 1)");
    sweep->add_option("--dt", sweep_dt, "step size");
    sweep->add_option("--scheme", sweep_scheme, "implicit_midpoint | composed4");
    sweep->add_option("--K", sweep_K, "detector order cutoff");
    sweep->add_option("--tol", sweep_tol, "detector residual tolerance");
    sweep->add_option("--i0", sweep_i0, "initial actions, comma-separated (default R/4 * ones)");
    sweep->add_option("--out", sweep_out_dir, "output directory");
    sweep->add_option("--synthetic", sweep_synthetic, "bypass integration with T = exp(eps^-a), e.g. \"a=0.25\"");
    sweep->add_flag("--force", sweep_force, "continue even if the QC / derivative-bound gate fails");
    sweep->add_flag("--no-detector", sweep_no_detector, "disable resonance detection");

    // ---- fit ----
    std::string fit_csv;
    auto* fit = app.add_subcommand("fit", "fit the time-scale exponent from a sweep CSV");
    fit->add_option("--csv", fit_csv, "sweep CSV file")->required();

    // ---- check ----
    std::string check_spec;
    auto* check = app.add_subcommand("check", "QC margin / derivative-bound / norm report for a spec");
    check->add_option("--spec", check_spec)->required();

    // ---- selftest ----
    bool inject_fault = false;
    auto* selftest = app.add_subcommand("selftest", "run the exhaustive property suites");
    selftest->add_flag("--inject-fault", inject_fault)->group(""); // test harness hook

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (complete->parsed()) {
            const auto k = parse_int_list(k_arg);
            StringOut out;
            return emit(nks_lattice_complete(k.data(), k.size(), &out.s), out);
        }
        if (smith->parsed()) {
            std::vector<int64_t> entries;
            size_t rows, cols;
            if (!parse_matrix(rows_arg, entries, rows, cols)) {
                std::cerr << "error: malformed matrix\n";
                return 2;
            }
            StringOut out;
            return emit(nks_lattice_smith(entries.data(), rows, cols, &out.s), out);
        }
        if (dirichlet->parsed()) {
            int64_t p = 0, q = 0;
            const nks_status st = nks_lattice_dirichlet(center, length, &p, &q);
            if (st != NKS_OK) return fail(st);
            const double bound = 4.0 * std::sqrt(2.0 / length);
            std::cout << json{{"p", p},
                              {"q", q},
                              {"cost", std::llabs(p) + q},
                              {"bound", bound},
                              {"bound_satisfied", static_cast<double>(std::llabs(p) + q) < bound}}
                             .dump(2)
                      << "\n";
            return 0;
        }
        if (volume->parsed()) {
            std::vector<int64_t> entries;
            size_t rows, cols;
            if (!parse_matrix(vol_rows, entries, rows, cols)) {
                std::cerr << "error: malformed matrix\n";
                return 2;
            }
            double vol = 0;
            const nks_status st = nks_lattice_volume(entries.data(), rows, cols, &vol);
            if (st != NKS_OK) return fail(st);
            std::cout << json{{"volume", vol}}.dump(2) << "\n";
            return 0;
        }
        if (bounds->parsed()) {
            const auto k = parse_int_list(bounds_k);
            double c = 0, cp = 0;
            const nks_status st = nks_lattice_bounds(k.data(), k.size(), &c, &cp);
            if (st != NKS_OK) return fail(st);
            std::cout << json{{"c_upper", c}, {"c_prime_upper", cp}}.dump(2) << "\n";
            return 0;
        }
        if (envelope->parsed()) {
            json req{{"n", env_n}, {"eps", env_eps}};
            if (env_delta >= 0) req["delta"] = env_delta;
            if (env_gamma >= 0) req["gamma"] = env_gamma;
            if (env_alpha > 0) req["alpha"] = env_alpha;
            if (!constants_file.empty()) {
                std::ifstream in(constants_file);
                if (!in) {
                    std::cerr << "error: cannot open " << constants_file << "\n";
                    return 2;
                }
                req["constants"] = json::parse(in);
            }
            StringOut out;
            return emit(nks_envelope_predict(req.dump().c_str(), &out.s), out);
        }
        if (check->parsed()) {
            SystemHandle sys;
            nks_status st = nks_system_load(check_spec.c_str(), &sys.sys);
            if (st != NKS_OK) return fail(st);
            StringOut out;
            return emit(nks_system_check(sys.sys, nullptr, &out.s), out);
        }
        if (simulate->parsed()) {
            SystemHandle sys;
            nks_status st = nks_system_load(sim_spec.c_str(), &sys.sys);
            if (st != NKS_OK) return fail(st);
            const int n = nks_system_dim(sys.sys);

            json opts{{"T", sim_T},   {"dt", sim_dt},           {"scheme", sim_scheme},
                      {"sample_stride", sim_stride}, {"energy_slack", sim_energy_slack}, {"force", sim_force}};
            if (sim_rho > 0) opts["rho"] = sim_rho;
            if (!sim_theta0.empty()) {
                std::vector<double> th;
                std::stringstream ss(sim_theta0);
                std::string tok;
                while (std::getline(ss, tok, ',')) th.push_back(std::stod(tok));
                opts["theta0"] = th;
            } else {
                opts["seed"] = sim_seed;
            }
            std::vector<double> i0;
            if (!sim_i0.empty()) {
                std::stringstream ss(sim_i0);
                std::string tok;
                while (std::getline(ss, tok, ',')) i0.push_back(std::stod(tok));
            } else {
                // default: quarter-radius diagonal point
                std::ifstream in(sim_spec);
                const json spec_json = json::parse(in);
                i0.assign(n, spec_json.at("domain_radius").get<double>() / 4.0);
            }
            opts["i0"] = i0;
            if (!sim_no_detector) opts["detector"] = detector_json(sim_K, sim_tol);

            nks_trajectory* traj = nullptr;
            st = nks_simulate(sys.sys, opts.dump().c_str(), &traj);
            if (st != NKS_OK) return fail(st);
            std::unique_ptr<nks_trajectory, decltype(&nks_trajectory_free)> guard(traj, &nks_trajectory_free);

            std::filesystem::create_directories(sim_out_dir);
            const auto base = std::filesystem::path(sim_out_dir);
            st = nks_trajectory_write_csv(traj, (base / "trajectory.csv").string().c_str());
            if (st != NKS_OK) return fail(st);
            StringOut events, summary;
            st = nks_trajectory_events_json(traj, &events.s);
            if (st != NKS_OK) return fail(st);
            std::ofstream((base / "events.json").string()) << events.s;
            st = nks_trajectory_summary_json(traj, &summary.s);
            if (st != NKS_OK) return fail(st);
            std::ofstream((base / "summary.json").string()) << summary.s;
            std::cout << summary.s << "\n";
            return 0;
        }
        if (sweep->parsed()) {
            std::filesystem::create_directories(sweep_out_dir);
            const auto base = std::filesystem::path(sweep_out_dir);

            nks_sweep* sw = nullptr;
            nks_status st;
            if (!sweep_synthetic.empty()) {
                double a = -1;
                if (std::sscanf(sweep_synthetic.c_str(), "a=%lf", &a) != 1) {
                    std::cerr << "error: --synthetic expects a=<value>\n";
                    return 2;
                }
                std::vector<double> eps;
                std::stringstream ss(sweep_eps);
                std::string tok;
                while (std::getline(ss, tok, ',')) eps.push_back(std::stod(tok));
                if (eps.empty())
                    for (int e = 2; e <= 12; ++e) eps.push_back(std::pow(10.0, -e / 2.0));
                st = nks_sweep_synthetic(json{{"a", a}, {"eps", eps}}.dump().c_str(), &sw);
            } else {
                if (sweep_spec.empty() || sweep_eps.empty()) {
                    std::cerr << "error: --spec and --eps are required without --synthetic\n";
                    return 2;
                }
                SystemHandle sys;
                st = nks_system_load(sweep_spec.c_str(), &sys.sys);
                if (st != NKS_OK) return fail(st);
                const int n = nks_system_dim(sys.sys);
                std::vector<double> eps;
                {
                    std::stringstream ss(sweep_eps);
                    std::string tok;
                    while (std::getline(ss, tok, ',')) eps.push_back(std::stod(tok));
                }
                std::vector<std::uint64_t> seeds;
                for (int64_t v : parse_int_list(sweep_seeds)) seeds.push_back(static_cast<std::uint64_t>(v));
                std::vector<double> i0;
                if (!sweep_i0.empty()) {
                    std::stringstream ss(sweep_i0);
                    std::string tok;
                    while (std::getline(ss, tok, ',')) i0.push_back(std::stod(tok));
                } else {
                    std::ifstream in(sweep_spec);
                    const json spec_json = json::parse(in);
                    i0.assign(n, spec_json.at("domain_radius").get<double>() / 4.0);
                }
                json opts{{"eps", eps},       {"rho", sweep_rho}, {"T_max", sweep_Tmax}, {"seeds", seeds},
                          {"workers", sweep_workers}, {"i0", i0}, {"dt", sweep_dt},      {"scheme", sweep_scheme},
                          {"force", sweep_force}};
                if (!sweep_no_detector) opts["detector"] = detector_json(sweep_K, sweep_tol);
                st = nks_sweep_run(sys.sys, opts.dump().c_str(), &sw);
            }
            if (st != NKS_OK) return fail(st);
            std::unique_ptr<nks_sweep, decltype(&nks_sweep_free)> guard(sw, &nks_sweep_free);

            st = nks_sweep_write_csv(sw, (base / "sweep.csv").string().c_str());
            if (st != NKS_OK) return fail(st);
            StringOut summary;
            st = nks_sweep_summary_json(sw, &summary.s);
            if (st != NKS_OK) return fail(st);
            std::ofstream((base / "sweep_summary.json").string()) << summary.s;
            std::cout << summary.s << "\n";
            const json js = json::parse(summary.s);
            if (js.at("rows").get<std::size_t>() > 0 &&
                js.at("failed_rows").get<std::size_t>() == js.at("rows").get<std::size_t>()) {
                std::cerr << "error: every sweep row failed\n";
                return 3;
            }
            return 0;
        }
        if (fit->parsed()) {
            StringOut out;
            return emit(nks_fit_csv(fit_csv.c_str(), &out.s), out);
        }
        if (selftest->parsed()) {
            StringOut out;
            const nks_status st = nks_selftest(inject_fault ? 1 : 0, &out.s);
            if (out.s) std::cout << out.s << "\n";
            if (st == NKS_OK) return 0;
            if (st == NKS_ERR_SELFTEST) {
                std::cerr << "selftest failed: " << nks_last_error() << "\n";
                return 1;
            }
            return fail(st);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
