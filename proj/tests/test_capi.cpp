#include <nekstab.h>

#include <doctest.h>
#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

using nlohmann::json;

namespace {

struct Str {
    char* s = nullptr;
    ~Str() { nks_string_free(s); }
    json parse() const { return json::parse(std::string(s ? s : "null")); }
};

const char* kSpec = R"({
    "version": 1,
    "n": 3,
    "domain_radius": 1.0,
    "analyticity_width": 0.5,
    "integrable": {"type": "shifted_convex", "omega": [1.1, 1.5180339887498949, 1.7320508075688772]},
    "perturbation": {"terms": [{"k": [1, 0, 0], "amplitude": 0.4, "phase": 0.0}]},
    "epsilon": 0.001,
    "m": 1.0,
    "M": 4.0
})";

} // namespace

TEST_CASE("lattice C surface") {
    SUBCASE("complete embeds its own verification block") {
        const std::vector<int64_t> k{2, 3};
        Str out;
        REQUIRE(nks_lattice_complete(k.data(), k.size(), &out.s) == NKS_OK);
        const json j = out.parse();
        CHECK(j.at("checks").at("det_unimodular").get<bool>());
        CHECK(j.at("checks").at("first_row_is_k").get<bool>());
        CHECK(j.at("checks").at("row_norms_bounded").get<bool>());
        CHECK(j.at("checks").at("inverse_norm_bounded").get<bool>());
        CHECK(j.at("matrix")[0] == json::array({2, 3}));
    }
    SUBCASE("non-primitive vector yields a domain error with a message") {
        const std::vector<int64_t> k{2, 4};
        Str out;
        CHECK(nks_lattice_complete(k.data(), k.size(), &out.s) == NKS_ERR_DOMAIN);
        CHECK(std::string(nks_last_error()).find("primitive") != std::string::npos);
    }
    SUBCASE("smith reconstructs") {
        const std::vector<int64_t> entries{2, 4};
        Str out;
        REQUIRE(nks_lattice_smith(entries.data(), 1, 2, &out.s) == NKS_OK);
        const json j = out.parse();
        CHECK(j.at("diag") == json::array({2}));
        CHECK(j.at("reconstruction_ok").get<bool>());
    }
    SUBCASE("dirichlet") {
        int64_t p = -1, q = -1;
        REQUIRE(nks_lattice_dirichlet(0.0, 0.5, &p, &q) == NKS_OK);
        CHECK(p == 0);
        CHECK(q == 1);
        CHECK(nks_lattice_dirichlet(0.0, -1.0, &p, &q) == NKS_ERR_DOMAIN);
    }
    SUBCASE("volume and bounds") {
        const std::vector<int64_t> entries{3, 4};
        double vol = 0;
        REQUIRE(nks_lattice_volume(entries.data(), 1, 2, &vol) == NKS_OK);
        CHECK(vol == doctest::Approx(5.0));
        const std::vector<int64_t> k{2, 3};
        double c = 0, cp = 0;
        REQUIRE(nks_lattice_bounds(k.data(), k.size(), &c, &cp) == NKS_OK);
        CHECK(c == doctest::Approx(10.0));
        CHECK(cp == doctest::Approx(5.0));
    }
}

TEST_CASE("envelope C surface") {
    SUBCASE("analytic prediction matches the frozen example") {
        Str out;
        const std::string req = R"({"n": 3, "delta": 0.08333333333333333, "eps": 1e-4})";
        REQUIRE(nks_envelope_predict(req.c_str(), &out.s) == NKS_OK);
        const json j = out.parse();
        CHECK(j.at("confinement_radius").get<double>() == doctest::Approx(0.21544346900318834).epsilon(1e-9));
        CHECK(j.at("log_time_bound").get<double>() == doctest::Approx(4.641588833612778).epsilon(1e-9));
        CHECK(j.at("shape_only").get<bool>());
        CHECK(j.at("thresholds").size() == 3);
    }
    SUBCASE("gamma form reports the delta equivalent") {
        Str out;
        const std::string req = R"({"n": 3, "gamma": 0.16666666666666666, "eps": 1e-4})";
        REQUIRE(nks_envelope_predict(req.c_str(), &out.s) == NKS_OK);
        const json j = out.parse();
        CHECK(j.at("time_log_exponent").get<double>() == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
        CHECK(j.at("delta").get<double>() == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
    }
    SUBCASE("out-of-range delta is a domain error") {
        Str out;
        CHECK(nks_envelope_predict(R"({"n": 3, "delta": 1.0, "eps": 1e-4})", &out.s) == NKS_ERR_DOMAIN);
    }
    SUBCASE("exactly one of delta and gamma") {
        Str out;
        CHECK(nks_envelope_predict(R"({"n": 3, "eps": 1e-4})", &out.s) == NKS_ERR_DOMAIN);
        CHECK(nks_envelope_predict(R"({"n": 3, "delta": 0.01, "gamma": 0.01, "eps": 1e-4})", &out.s) ==
              NKS_ERR_DOMAIN);
    }
    SUBCASE("constants override scales the prediction") {
        Str base, scaled;
        REQUIRE(nks_envelope_predict(R"({"n": 3, "delta": 0.05, "eps": 1e-4})", &base.s) == NKS_OK);
        REQUIRE(nks_envelope_predict(R"({"n": 3, "delta": 0.05, "eps": 1e-4, "constants": {"c3": 2.0}})",
                                     &scaled.s) == NKS_OK);
        const double lt0 = base.parse().at("log_time_bound").get<double>();
        const double lt1 = scaled.parse().at("log_time_bound").get<double>();
        CHECK(lt1 == doctest::Approx(2.0 * lt0).epsilon(1e-12));
        Str bad;
        CHECK(nks_envelope_predict(R"({"n": 3, "delta": 0.05, "eps": 1e-4, "constants": {"c99": 1.0}})",
                                   &bad.s) == NKS_ERR_DOMAIN);
    }
    SUBCASE("local exponents") {
        double a = 0, b = 0;
        REQUIRE(nks_envelope_local(4, 2, 1.0, &a, &b) == NKS_OK);
        CHECK(a == doctest::Approx(0.25));
        CHECK(b == doctest::Approx(0.25));
        CHECK(nks_envelope_local(3, 3, 1.0, &a, &b) == NKS_ERR_DOMAIN);
    }
}

TEST_CASE("system / trajectory / sweep handles") {
    nks_system* sys = nullptr;
    REQUIRE(nks_system_parse(kSpec, &sys) == NKS_OK);
    REQUIRE(sys != nullptr);
    CHECK(nks_system_dim(sys) == 3);

    SUBCASE("condition report") {
        Str rep;
        REQUIRE(nks_system_check(sys, nullptr, &rep.s) == NKS_OK);
        const json j = rep.parse();
        CHECK(j.at("qc_pass").get<bool>());
        CHECK(j.at("derivative_bound_pass").get<bool>());
        CHECK(j.at("qc_margin_min").get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("simulate and accessors") {
        const std::string opts = R"({
            "seed": 7, "i0": [0.1, 0.1, 0.1], "T": 5.0, "dt": 0.02,
            "sample_stride": 10, "detector": {"K": 6, "tol": 1e-6}
        })";
        nks_trajectory* traj = nullptr;
        REQUIRE(nks_simulate(sys, opts.c_str(), &traj) == NKS_OK);
        Str summary;
        REQUIRE(nks_trajectory_summary_json(traj, &summary.s) == NKS_OK);
        const json js = summary.parse();
        CHECK(js.at("samples").get<int>() > 10);
        CHECK(js.at("energy_ok").get<bool>());
        Str events;
        REQUIRE(nks_trajectory_events_json(traj, &events.s) == NKS_OK);
        CHECK(events.parse().contains("events"));
        nks_trajectory_free(traj);
    }

    SUBCASE("unknown option key is rejected") {
        nks_trajectory* traj = nullptr;
        CHECK(nks_simulate(sys, R"({"seed": 1, "i0": [0,0,0], "T": 1.0, "wat": 2})", &traj) == NKS_ERR_DOMAIN);
    }

    SUBCASE("optional rho stops the run at the drift threshold") {
        // strong perturbation so the drift moves; rho tiny so it trips early
        nks_system* strong = nullptr;
        std::string spec_text(kSpec);
        spec_text.replace(spec_text.find("0.001"), 5, "0.050");
        REQUIRE(nks_system_parse(spec_text.c_str(), &strong) == NKS_OK);
        const std::string opts = R"({"seed": 2, "i0": [0.1, 0.1, 0.1], "T": 200.0, "dt": 0.02, "rho": 1e-4})";
        nks_trajectory* traj = nullptr;
        REQUIRE(nks_simulate(strong, opts.c_str(), &traj) == NKS_OK);
        Str summary;
        REQUIRE(nks_trajectory_summary_json(traj, &summary.s) == NKS_OK);
        const json js = summary.parse();
        CHECK(js.at("t_end").get<double>() < 200.0);
        CHECK(js.at("max_drift").get<double>() >= 1e-4);
        CHECK_FALSE(js.at("censored").get<bool>());
        nks_trajectory_free(traj);
        nks_system_free(strong);

        nks_trajectory* bad = nullptr;
        CHECK(nks_simulate(sys, R"({"seed": 1, "i0": [0,0,0], "T": 1.0, "rho": 0.9})", &bad) == NKS_ERR_DOMAIN);
    }

    SUBCASE("sweep over the C surface, with CSV fit round trip") {
        const std::string opts = R"({
            "eps": [0.05, 0.02, 0.01], "rho": 0.02, "T_max": 20.0,
            "seeds": [1, 2], "workers": 2, "i0": [0.1, 0.1, 0.1], "dt": 0.05
        })";
        nks_sweep* sw = nullptr;
        REQUIRE(nks_sweep_run(sys, opts.c_str(), &sw) == NKS_OK);
        Str summary;
        REQUIRE(nks_sweep_summary_json(sw, &summary.s) == NKS_OK);
        CHECK(summary.parse().at("rows").get<int>() == 6);
        nks_sweep_free(sw);
    }

    SUBCASE("synthetic sweep") {
        nks_sweep* sw = nullptr;
        REQUIRE(nks_sweep_synthetic(R"({"a": 0.25, "eps": [1e-2, 1e-3, 1e-4, 1e-5]})", &sw) == NKS_OK);
        Str summary;
        REQUIRE(nks_sweep_summary_json(sw, &summary.s) == NKS_OK);
        CHECK(summary.parse().at("fit").at("a_estimate").get<double>() == doctest::Approx(0.25).epsilon(1e-6));
        nks_sweep_free(sw);
    }

    nks_system_free(sys);
}

TEST_CASE("parse errors are distinguished from domain errors") {
    nks_system* sys = nullptr;
    CHECK(nks_system_parse("{not json", &sys) == NKS_ERR_PARSE);
    CHECK(nks_system_parse(R"({"version": 1})", &sys) != NKS_OK); // missing fields
}

TEST_CASE("selftest C surface with fault injection") {
    Str report;
    // The clean run is exercised (and timed) by the cli_selftest ctest entry;
    // here only the fault path, which stays fast.
    REQUIRE(nks_selftest(1, &report.s) == NKS_ERR_SELFTEST);
    const json j = report.parse();
    CHECK_FALSE(j.at("all_passed").get<bool>());
    bool found = false;
    for (const auto& suite : j.at("suites"))
        if (suite.at("name") == "bezout_exhaustive" && suite.at("failures").get<int>() > 0) {
            found = true;
            CHECK(suite.at("counterexample").get<std::string>().find("x=2 y=3") != std::string::npos);
        }
    CHECK(found);
    CHECK(std::string(nks_last_error()).find("bezout") != std::string::npos);
}
