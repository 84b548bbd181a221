#include "nekstab/serialize.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace nekstab::io {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw std::domain_error("unknown key '" + it.key() + "' in " + where);
}

ham::Vec vec_from(const json& j, const std::string& where) {
    if (!j.is_array()) throw std::domain_error(where + " must be an array");
    ham::Vec v;
    for (const auto& x : j) v.push_back(x.get<double>());
    return v;
}

std::vector<long long> ivec_from(const json& j, const std::string& where) {
    if (!j.is_array()) throw std::domain_error(where + " must be an array");
    std::vector<long long> v;
    for (const auto& x : j) {
        if (!x.is_number_integer()) throw std::domain_error(where + " must hold integers");
        v.push_back(x.get<long long>());
    }
    return v;
}

} // namespace

ham::SystemSpec system_from_json(const json& j) {
    if (!j.is_object()) throw std::domain_error("system spec must be a JSON object");
    reject_unknown_keys(j,
                        {"version", "n", "domain_radius", "analyticity_width", "gevrey", "integrable", "perturbation",
                         "epsilon", "m", "M", "l"},
                        "system spec");
    if (!j.contains("version")) throw std::domain_error("system spec missing 'version'");
    if (j.at("version").get<int>() != 1) throw std::domain_error("unsupported system spec version");

    ham::SystemSpec spec;
    spec.n = j.at("n").get<int>();
    spec.R = j.at("domain_radius").get<double>();
    if (j.contains("analyticity_width")) spec.s = j.at("analyticity_width").get<double>();
    if (j.contains("gevrey")) {
        const json& g = j.at("gevrey");
        reject_unknown_keys(g, {"alpha", "L"}, "gevrey");
        spec.gevrey = ham::GevreyParams{g.at("alpha").get<double>(), g.at("L").get<double>()};
    }
    const json& integ = j.at("integrable");
    reject_unknown_keys(integ, {"type", "omega", "weights"}, "integrable");
    const std::string type = integ.at("type").get<std::string>();
    if (type == "shifted_convex")
        spec.integrable.id = ham::CatalogId::shifted_convex;
    else if (type == "anisotropic_convex")
        spec.integrable.id = ham::CatalogId::anisotropic_convex;
    else
        throw std::domain_error("unknown integrable catalog entry '" + type + "'");
    spec.integrable.omega0 = vec_from(integ.at("omega"), "integrable.omega");
    if (spec.integrable.id == ham::CatalogId::anisotropic_convex)
        spec.integrable.weights = vec_from(integ.at("weights"), "integrable.weights");
    else if (integ.contains("weights"))
        throw std::domain_error("'weights' is only valid for anisotropic_convex");

    if (j.contains("perturbation")) {
        const json& pert = j.at("perturbation");
        reject_unknown_keys(pert, {"terms"}, "perturbation");
        for (const json& t : pert.at("terms")) {
            reject_unknown_keys(t, {"k", "amplitude", "phase", "weight"}, "perturbation term");
            ham::TrigTerm term;
            term.k = ivec_from(t.at("k"), "term.k");
            term.amplitude = t.at("amplitude").get<double>();
            if (t.contains("phase")) term.phase = t.at("phase").get<double>();
            if (t.contains("weight")) {
                const json& w = t.at("weight");
                reject_unknown_keys(w, {"const", "linear", "quadratic"}, "term.weight");
                if (w.contains("const")) term.weight.c0 = w.at("const").get<double>();
                if (w.contains("linear")) term.weight.lin = vec_from(w.at("linear"), "weight.linear");
                if (w.contains("quadratic")) term.weight.quad = vec_from(w.at("quadratic"), "weight.quadratic");
            }
            spec.perturbation.terms.push_back(std::move(term));
        }
    }

    spec.epsilon = j.at("epsilon").get<double>();
    spec.m = j.at("m").get<double>();
    spec.M = j.at("M").get<double>();
    if (j.contains("l")) spec.l = j.at("l").get<double>();
    spec.validate();
    return spec;
}

json system_to_json(const ham::SystemSpec& spec) {
    json j;
    j["version"] = 1;
    j["n"] = spec.n;
    j["domain_radius"] = spec.R;
    j["analyticity_width"] = spec.s;
    if (spec.gevrey) j["gevrey"] = {{"alpha", spec.gevrey->alpha}, {"L", spec.gevrey->L}};
    json integ;
    integ["type"] = spec.integrable.id == ham::CatalogId::shifted_convex ? "shifted_convex" : "anisotropic_convex";
    integ["omega"] = spec.integrable.omega0;
    if (spec.integrable.id == ham::CatalogId::anisotropic_convex) integ["weights"] = spec.integrable.weights;
    j["integrable"] = integ;
    json terms = json::array();
    for (const ham::TrigTerm& t : spec.perturbation.terms) {
        json jt;
        jt["k"] = t.k;
        jt["amplitude"] = t.amplitude;
        jt["phase"] = t.phase;
        if (!t.weight.is_constant() || t.weight.c0 != 1.0) {
            json w;
            w["const"] = t.weight.c0;
            if (!t.weight.lin.empty()) w["linear"] = t.weight.lin;
            if (!t.weight.quad.empty()) w["quadratic"] = t.weight.quad;
            jt["weight"] = w;
        }
        terms.push_back(jt);
    }
    j["perturbation"] = {{"terms", terms}};
    j["epsilon"] = spec.epsilon;
    j["m"] = spec.m;
    j["M"] = spec.M;
    if (spec.l) j["l"] = *spec.l;
    return j;
}

ham::SystemSpec load_system(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw std::domain_error(std::string("system spec parse error: ") + e.what());
    }
    return system_from_json(j);
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json event_to_json(const resonance::ResonanceEvent& ev) {
    return {{"t", ev.time}, {"k", ev.k}, {"residual", ev.residual}, {"i", ev.i}, {"j", ev.j}};
}

std::string trajectory_csv(const sim::TrajectoryRecord& rec) {
    const int n = rec.dim();
    std::ostringstream out;
    out << "t";
    for (int i = 1; i <= n; ++i) out << ",I_" << i;
    for (int i = 1; i <= n; ++i) out << ",theta_" << i;
    out << ",H,drift\n";
    for (std::size_t s = 0; s < rec.times.size(); ++s) {
        out << format_double(rec.times[s]);
        for (int i = 0; i < n; ++i) out << ',' << format_double(rec.states[s].I[i]);
        for (int i = 0; i < n; ++i) out << ',' << format_double(rec.states[s].theta[i]);
        out << ',' << format_double(rec.energy[s]) << ',' << format_double(rec.drift[s]) << '\n';
    }
    return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const char* where) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw std::domain_error(std::string("bad numeric field in ") + where);
    return v;
}

} // namespace

sim::TrajectoryRecord trajectory_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::domain_error("trajectory CSV is empty");
    const auto header = split_csv_line(line);
    if (header.size() < 4 || header[0] != "t") throw std::domain_error("trajectory CSV header mismatch");
    const int n = static_cast<int>((header.size() - 3) / 2);
    sim::TrajectoryRecord rec;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (static_cast<int>(f.size()) != 2 * n + 3) throw std::domain_error("trajectory CSV row width mismatch");
        rec.times.push_back(parse_double(f[0], "trajectory CSV"));
        sim::State st;
        for (int i = 0; i < n; ++i) st.I.push_back(parse_double(f[1 + i], "trajectory CSV"));
        for (int i = 0; i < n; ++i) st.theta.push_back(parse_double(f[1 + n + i], "trajectory CSV"));
        rec.states.push_back(std::move(st));
        rec.energy.push_back(parse_double(f[1 + 2 * n], "trajectory CSV"));
        rec.drift.push_back(parse_double(f[2 + 2 * n], "trajectory CSV"));
    }
    return rec;
}

json trajectory_events_json(const sim::TrajectoryRecord& rec) {
    json events = json::array();
    for (const auto& ev : rec.events) events.push_back(event_to_json(ev));
    return {{"events", events}};
}

json trajectory_summary_json(const sim::TrajectoryRecord& rec) {
    json j;
    j["samples"] = rec.times.size();
    j["t_end"] = rec.times.empty() ? 0.0 : rec.times.back();
    j["max_drift"] = rec.max_drift;
    j["max_h_deviation"] = rec.max_h_deviation;
    j["max_energy_error"] = rec.max_energy_error;
    j["energy_ok"] = rec.energy_ok;
    j["escaped"] = rec.escaped;
    j["censored"] = rec.censored;
    j["crossings"] = rec.events.size();
    if (!rec.events.empty()) j["first_crossing_time"] = rec.events.front().time;
    j["warnings"] = rec.warnings;
    return j;
}

std::string sweep_csv(const sim::SweepResult& result) {
    std::ostringstream out;
    out << "epsilon,seed,T,censored,max_drift,crossings\n";
    for (const sim::SweepRow& r : result.rows) {
        if (r.failed) continue;
        out << format_double(r.epsilon) << ',' << r.seed << ',' << format_double(r.T) << ',' << (r.censored ? 1 : 0)
            << ',' << format_double(r.max_drift) << ',' << r.crossings << '\n';
    }
    return out.str();
}

json sweep_summary_json(const sim::SweepResult& result) {
    json j;
    json aggs = json::array();
    for (const sim::SweepAggregate& a : result.aggregates)
        aggs.push_back({{"epsilon", a.epsilon},
                        {"median_T", a.median_T},
                        {"censored", a.censored},
                        {"n_censored", a.n_censored},
                        {"n_failed", a.n_failed}});
    j["aggregates"] = aggs;
    std::size_t failed = 0, censored = 0;
    for (const sim::SweepRow& r : result.rows) {
        failed += r.failed ? 1 : 0;
        censored += r.censored ? 1 : 0;
    }
    j["rows"] = result.rows.size();
    j["failed_rows"] = failed;
    j["censored_rows"] = censored;
    if (result.fit) {
        j["fit"] = {{"a_estimate", result.fit->a_estimate},
                    {"intercept", result.fit->intercept},
                    {"residual", result.fit->residual},
                    {"points_used", result.fit->points_used}};
    } else {
        j["fit"] = nullptr;
        j["fit_note"] = result.fit_note;
    }
    return j;
}

sim::FitResult fit_from_sweep_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::domain_error("sweep CSV is empty");
    if (split_csv_line(line).size() != 6) throw std::domain_error("sweep CSV header mismatch");
    std::vector<std::pair<double, double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 6) throw std::domain_error("sweep CSV row width mismatch");
        const bool censored = f[3] != "0";
        if (censored) continue;
        const double eps = parse_double(f[0], "sweep CSV");
        const double T = parse_double(f[2], "sweep CSV");
        if (T > 1.0) rows.emplace_back(eps, T);
    }
    return sim::fit_exponent(rows);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace nekstab::io
