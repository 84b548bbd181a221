#include "nekstab/selftest.hpp"

#include "nekstab/envelope.hpp"
#include "nekstab/lattice.hpp"
#include "nekstab/resonance.hpp"
#include "nekstab/simulate.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

namespace nekstab::selftest {

namespace {

using lattice::Int;
using lattice::IntMat;
using lattice::IntVec;

struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() { return sim::splitmix64(state); }
    long long range(long long lo, long long hi) { // inclusive
        return lo + static_cast<long long>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

class SuiteRunner {
public:
    explicit SuiteRunner(Report& report) : report_(report) {}

    void run(const std::string& name, const std::function<void(SuiteResult&, std::ostringstream&)>& body) {
        SuiteResult suite;
        suite.name = name;
        std::ostringstream counterexample;
        const auto t0 = std::chrono::steady_clock::now();
        body(suite, counterexample);
        suite.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        suite.first_counterexample = counterexample.str();
        report_.all_passed &= suite.failures == 0;
        report_.suites.push_back(std::move(suite));
    }

private:
    Report& report_;
};

void fail(SuiteResult& suite, std::ostringstream& ce, const std::string& message) {
    if (suite.failures == 0) ce << message;
    ++suite.failures;
}

IntVec random_primitive(Rng& rng, int n, long long max_ell1) {
    for (;;) {
        IntVec k(n);
        for (int i = 0; i < n; ++i) k[i] = rng.range(-max_ell1, max_ell1);
        if (lattice::ell1(k) == 0 || lattice::ell1(k) > max_ell1) continue;
        Int g = 0;
        for (const Int& x : k) g = boost::multiprecision::gcd(g, Int(x < 0 ? -x : x));
        if (g == 1) return k;
    }
}

bool completion_contract_ok(const IntVec& k, std::string* why) {
    const IntMat a = lattice::unimodular_completion(k);
    const Int d = lattice::det(a);
    if (d != 1 && d != -1) {
        *why = "det != +-1";
        return false;
    }
    if (a[0] != k) {
        *why = "first row differs from k";
        return false;
    }
    const Int big_k = lattice::ell1(k);
    for (const IntVec& row : a)
        if (lattice::ell1(row) > big_k) {
            *why = "row l1-norm exceeds |k|";
            return false;
        }
    const auto [c_up, cp_up] = lattice::lochak_bounds_exact(k, static_cast<int>(k.size()));
    if (lattice::max_row_ell1(lattice::inverse_unimodular(a)) > c_up) {
        *why = "inverse norm exceeds n! |k|^(n-1)";
        return false;
    }
    (void)cp_up;
    return true;
}

std::string vec_str(const IntVec& k) {
    std::ostringstream ss;
    ss << "(";
    for (std::size_t i = 0; i < k.size(); ++i) ss << (i ? "," : "") << k[i];
    ss << ")";
    return ss.str();
}

void suite_bezout(SuiteResult& suite, std::ostringstream& ce, bool inject_fault) {
    for (long long x = -200; x <= 200; ++x) {
        if (x == 0) continue;
        for (long long y = -200; y <= 200; ++y) {
            if (y == 0) continue;
            ++suite.cases;
            auto [d, u, v] = lattice::ext_gcd_bounded(x, y);
            if (inject_fault && x == 2 && y == 3) u = -u;
            std::ostringstream why;
            if (u * x + v * y != d)
                why << "identity u*x + v*y = d fails";
            else if (boost::multiprecision::abs(u) * d > Int(std::llabs(y)))
                why << "|u| > |y|/d";
            else if (boost::multiprecision::abs(v) * d > Int(std::llabs(x)))
                why << "|v| > |x|/d";
            if (!why.str().empty())
                fail(suite, ce,
                     "x=" + std::to_string(x) + " y=" + std::to_string(y) + ": " + why.str());
        }
    }
}

void suite_completion_2d(SuiteResult& suite, std::ostringstream& ce) {
    for (long long a = -50; a <= 50; ++a)
        for (long long b = -50; b <= 50; ++b) {
            if (std::llabs(a) + std::llabs(b) == 0 || std::llabs(a) + std::llabs(b) > 50) continue;
            if (std::gcd(std::llabs(a), std::llabs(b)) != 1) continue;
            ++suite.cases;
            const IntVec k{a, b};
            std::string why;
            if (!completion_contract_ok(k, &why)) fail(suite, ce, "k=" + vec_str(k) + ": " + why);
        }
}

void suite_completion_random(SuiteResult& suite, std::ostringstream& ce) {
    Rng rng(0x5eedbeef);
    for (int n = 3; n <= 5; ++n)
        for (int trial = 0; trial < 200; ++trial) {
            ++suite.cases;
            const IntVec k = random_primitive(rng, n, 20);
            std::string why;
            if (!completion_contract_ok(k, &why)) fail(suite, ce, "k=" + vec_str(k) + ": " + why);
        }
}

void suite_smith(SuiteResult& suite, std::ostringstream& ce) {
    Rng rng(0xabcdef12);
    int done = 0;
    while (done < 300) {
        const int r = static_cast<int>(rng.range(1, 3));
        const int n = static_cast<int>(rng.range(r, 5));
        IntMat l(r, IntVec(n));
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < n; ++j) l[i][j] = rng.range(-9, 9);
        lattice::SmithDecomposition dec;
        try {
            dec = lattice::smith_normal_form(l);
        } catch (const std::domain_error&) {
            continue; // rank-deficient draw
        }
        ++done;
        ++suite.cases;
        IntMat delta(r, IntVec(n, 0));
        for (int i = 0; i < r; ++i) delta[i][i] = dec.diag[i];
        if (lattice::mul(lattice::mul(dec.b, delta), dec.a) != l) {
            fail(suite, ce, "reconstruction B*Delta*A != L");
            continue;
        }
        for (int i = 0; i + 1 < r; ++i)
            if (dec.diag[i] == 0 ? dec.diag[i + 1] != 0 : dec.diag[i + 1] % dec.diag[i] != 0)
                fail(suite, ce, "divisibility chain broken");
        const Int db = lattice::det(dec.b), da = lattice::det(dec.a);
        if ((db != 1 && db != -1) || (da != 1 && da != -1)) fail(suite, ce, "B or A not unimodular");
    }
}

void suite_dirichlet(SuiteResult& suite, std::ostringstream& ce) {
    Rng rng(0x0dd5eed);
    for (int trial = 0; trial < 10000; ++trial) {
        ++suite.cases;
        const double l = std::pow(10.0, -6.0 + 6.3 * rng.uniform());
        const double c = -1 + l / 2 + (2 - l) * rng.uniform();
        const auto [p, q] = lattice::dirichlet_rational(c, l);
        const lattice::Rat f(p, q);
        std::ostringstream why;
        if (!(lattice::Rat(c - l / 2) <= f && f <= lattice::Rat(c + l / 2)))
            why << "membership fails";
        else if (boost::multiprecision::gcd(Int(p < 0 ? -p : p), q) != 1)
            why << "not reduced";
        else {
            // The l^(-1/2) bound is certified on the construction branch.
            const auto q0 = static_cast<long long>(std::ceil(std::sqrt(2.0 / l)));
            const auto p0 = std::llround(static_cast<double>(q0) * c);
            const lattice::Rat cand(p0, q0);
            const bool construction = lattice::Rat(c - l / 2) <= cand && cand <= lattice::Rat(c + l / 2);
            const Int cost = Int(p < 0 ? -p : p) + q;
            if (construction && static_cast<double>(cost) >= 4.0 * std::sqrt(2.0 / l))
                why << "construction-branch bound fails";
        }
        if (!why.str().empty()) {
            std::ostringstream msg;
            msg << "c=" << c << " l=" << l << " -> " << p << "/" << q << ": " << why.str();
            fail(suite, ce, msg.str());
        }
    }
}

void suite_volume(SuiteResult& suite, std::ostringstream& ce) {
    Rng rng(0x701dcafe);
    int done = 0;
    while (done < 200) {
        const int r = static_cast<int>(rng.range(1, 3));
        const int n = static_cast<int>(rng.range(r, 5));
        IntMat basis(r, IntVec(n));
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < n; ++j) basis[i][j] = rng.range(-6, 6);
        double vol;
        try {
            vol = lattice::module_volume(basis);
        } catch (const std::domain_error&) {
            continue;
        }
        ++done;
        ++suite.cases;
        // Random unimodular factor: product of elementary row operations.
        IntMat u = lattice::identity(r);
        for (int ops = 0; ops < 6; ++ops) {
            const auto i = static_cast<std::size_t>(rng.range(0, r - 1));
            auto j = static_cast<std::size_t>(rng.range(0, r - 1));
            if (r > 1) {
                while (j == i) j = static_cast<std::size_t>(rng.range(0, r - 1));
                const Int c = rng.range(-3, 3);
                for (int col = 0; col < r; ++col) u[i][col] += c * u[j][col];
            } else {
                u[0][0] = rng.range(0, 1) == 0 ? 1 : -1;
            }
        }
        const double vol2 = lattice::module_volume(lattice::mul(u, basis));
        if (std::fabs(vol - vol2) > 1e-9 * std::max(1.0, vol))
            fail(suite, ce, "volume changed under a unimodular row transform");
    }
}

void suite_exponents(SuiteResult& suite, std::ostringstream& ce) {
    for (int n = 2; n <= 10; ++n) {
        double prev = 2.0;
        for (int s = 1; s <= 100; ++s) {
            ++suite.cases;
            const double gamma = s / (100.0 * 2 * n);
            const double a = envelope::exponent_analytic(n, gamma);
            if (!(a >= 1.0 / (2.0 * n) - 1e-15 && a < 1.0 / (2.0 * (n - 1)) && a < prev + 1e-18 && gamma <= a + 1e-15))
                fail(suite, ce, "analytic exponent range/monotonicity at n=" + std::to_string(n));
            prev = a;
        }
        for (int s = 1; s <= 50; ++s) {
            ++suite.cases;
            const double gmax = 1.0 / (5.0 * (n - 1) * (n - 1));
            const double gamma = s * gmax / 50.0;
            const auto [a, b] = envelope::exponent_gevrey(n, 1.0, gamma);
            const double blo = (n - 2) / (5.0 * (n - 1) * (n - 1)), bhi = 1.0 / (2.0 * (n - 1));
            // gamma <= b_gamma needs n >= 3; at n = 2 it only holds up to gamma = 1/10.
            const bool dominates = n >= 3 || gamma > 0.1 || gamma <= b + 1e-15;
            if (!(b >= blo - 1e-15 && b <= bhi + 1e-15 && dominates))
                fail(suite, ce, "gevrey b range at n=" + std::to_string(n));
            const double delta = 2.5 * gamma * (n - 1);
            if (std::fabs(a - (1.0 / (2.0 * (n - 1)) - delta)) > 1e-12)
                fail(suite, ce, "gevrey delta conversion (alpha=1) at n=" + std::to_string(n));
        }
    }
}

void suite_detector_oracle(SuiteResult& suite, std::ostringstream& ce) {
    resonance::DetectorConfig cfg;
    cfg.K = 8;
    cfg.tol = 1e-9;
    for (int a = 1; a <= 12; ++a)
        for (int b = 1; b <= 12; ++b) {
            ++suite.cases;
            const std::vector<double> omega{static_cast<double>(a), static_cast<double>(b)};
            const auto oracle = resonance::brute_force_resonant(omega, cfg);
            const auto event = resonance::detect_ratio_crossing(omega, omega, cfg);
            if (oracle.has_value() != event.has_value()) {
                fail(suite, ce, "fire disagreement at omega=(" + std::to_string(a) + "," + std::to_string(b) + ")");
                continue;
            }
            if (event && event->k != *oracle)
                fail(suite, ce, "k disagreement at omega=(" + std::to_string(a) + "," + std::to_string(b) + ")");
        }
}

} // namespace

Report run(bool inject_fault) {
    Report report;
    SuiteRunner runner(report);
    runner.run("bezout_exhaustive",
               [&](SuiteResult& s, std::ostringstream& ce) { suite_bezout(s, ce, inject_fault); });
    runner.run("unimodular_completion_2d", suite_completion_2d);
    runner.run("unimodular_completion_random", suite_completion_random);
    runner.run("smith_normal_form", suite_smith);
    runner.run("dirichlet_rational", suite_dirichlet);
    runner.run("module_volume_invariance", suite_volume);
    runner.run("exponent_identities", suite_exponents);
    runner.run("detector_vs_oracle", suite_detector_oracle);
    return report;
}

nlohmann::json report_json(const Report& report) {
    nlohmann::json suites = nlohmann::json::array();
    for (const SuiteResult& s : report.suites) {
        nlohmann::json j{{"name", s.name}, {"cases", s.cases}, {"failures", s.failures}, {"seconds", s.seconds}};
        if (!s.first_counterexample.empty()) j["counterexample"] = s.first_counterexample;
        suites.push_back(j);
    }
    return {{"suites", suites}, {"all_passed", report.all_passed}};
}

std::string report_text(const Report& report) {
    std::ostringstream out;
    for (const SuiteResult& s : report.suites) {
        out << (s.failures == 0 ? "[PASS] " : "[FAIL] ") << s.name << ": " << s.cases << " cases";
        if (s.failures) out << ", " << s.failures << " failures, first: " << s.first_counterexample;
        out << " (" << s.seconds << " s)\n";
    }
    out << (report.all_passed ? "selftest: all suites passed\n" : "selftest: FAILURES detected\n");
    return out.str();
}

} // namespace nekstab::selftest
