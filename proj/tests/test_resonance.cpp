#include "nekstab/resonance.hpp"

#include "nekstab/errors.hpp"
#include "nekstab/simulate.hpp" // splitmix64

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numeric>

using namespace nekstab::resonance;

namespace {

const double phi = (1.0 + std::sqrt(5.0)) / 2.0;

double min_abs_dot_l1ball(const std::vector<double>& omega, long long radius) {
    // independent enumeration oracle over 0 < |k|_1 <= radius
    double best = std::numeric_limits<double>::infinity();
    const long long r = radius;
    for (long long a = -r; a <= r; ++a)
        for (long long b = -r + std::llabs(a); b <= r - std::llabs(a); ++b) {
            if (a == 0 && b == 0) continue;
            best = std::min(best, std::fabs(a * omega[0] + b * omega[1]));
        }
    return best;
}

} // namespace

TEST_CASE("ratio_coordinates") {
    CHECK(ratio_coordinates({2, 1}) == std::vector<double>{1.0, 0.5});
    CHECK(ratio_coordinates({-3, 3}) == std::vector<double>{-1.0, 1.0});
    CHECK_THROWS_AS(ratio_coordinates({0, 0}), std::domain_error);
    for (const auto& omega : {std::vector<double>{0.3, -1.7, 0.2}, {5, 5, -5}}) {
        const auto r = ratio_coordinates(omega);
        bool unit = false;
        for (double x : r) {
            CHECK(std::fabs(x) <= 1.0);
            unit |= std::fabs(x) == 1.0;
        }
        CHECK(unit);
    }
}

TEST_CASE("rationals_in_interval enumerates the Farey set, cost-sorted") {
    const auto rats = rationals_in_interval(0.2, 0.7, 5);
    // q <= 4 fractions in [0.2, 0.7]: 1/2, 1/3, 2/3, 1/4, 1/5? no (cost), 2/5? no
    for (std::size_t i = 0; i + 1 < rats.size(); ++i)
        CHECK(std::llabs(rats[i].first) + rats[i].second <= std::llabs(rats[i + 1].first) + rats[i + 1].second);
    for (const auto& [p, q] : rats) {
        CHECK(std::gcd(std::llabs(p), q) == 1);
        CHECK(std::llabs(p) + q <= 5);
        CHECK(static_cast<double>(p) / static_cast<double>(q) >= 0.2 - 1e-9);
        CHECK(static_cast<double>(p) / static_cast<double>(q) <= 0.7 + 1e-9);
    }
    CHECK(rats.front() == std::pair<long long, long long>{1, 2});
}

TEST_CASE("detect_ratio_crossing frozen examples") {
    DetectorConfig cfg;
    cfg.K = 3;
    cfg.tol = 1e-9;
    SUBCASE("exact resonance at a sample fires with k = (1,-1)") {
        const auto ev = detect_ratio_crossing({1, 1}, {1, 1}, cfg);
        REQUIRE(ev.has_value());
        CHECK(ev->k == KVec{1, -1});
        CHECK(ev->residual == 0.0);
    }
    SUBCASE("golden-ratio frequency stays quiet") {
        const auto ev = detect_ratio_crossing({1, phi}, {1, phi}, cfg);
        CHECK_FALSE(ev.has_value());
        // enumeration oracle: the true minimum over the l1-ball of radius 3
        CHECK(min_abs_dot_l1ball({1, phi}, 3) == doctest::Approx(2.0 - phi));
    }
    SUBCASE("ratio sweep across 1/2 fires k = (1,-2) near the midpoint") {
        DetectorConfig wide;
        wide.K = 4;
        const auto ev = detect_ratio_crossing({1, 0.49}, {1, 0.51}, wide, 10.0, 11.0);
        REQUIRE(ev.has_value());
        CHECK(ev->k == KVec{1, -2});
        CHECK(ev->time == doctest::Approx(10.5).epsilon(1e-12));
        CHECK(ev->residual <= 1e-12);
    }
    SUBCASE("zero frequency is a domain error") {
        CHECK_THROWS_AS(detect_ratio_crossing({0, 0}, {1, 1}, cfg), std::domain_error);
    }
}

TEST_CASE("detect_ratio_crossing is scale invariant") {
    DetectorConfig cfg;
    cfg.K = 6;
    std::uint64_t state = 42;
    for (int trial = 0; trial < 200; ++trial) {
        auto u = [&] { return static_cast<double>(nekstab::sim::splitmix64(state) >> 11) * 0x1.0p-53; };
        const std::vector<double> a{0.5 + u(), 0.5 + u(), 0.5 + u()};
        std::vector<double> b = a;
        b[1] += 0.05 * (u() - 0.5);
        const double lambda = 0.01 + 100.0 * u();
        std::vector<double> as(3), bs(3);
        for (int i = 0; i < 3; ++i) {
            as[i] = lambda * a[i];
            bs[i] = lambda * b[i];
        }
        const auto ev1 = detect_ratio_crossing(a, b, cfg, 0.0, 1.0);
        const auto ev2 = detect_ratio_crossing(as, bs, cfg, 0.0, 1.0);
        REQUIRE(ev1.has_value() == ev2.has_value());
        if (ev1) {
            CHECK(ev1->k == ev2->k);
            CHECK(ev1->time == doctest::Approx(ev2->time).epsilon(1e-9));
        }
    }
}

TEST_CASE("brute_force_resonant frozen examples") {
    DetectorConfig cfg;
    cfg.K = 3;
    cfg.tol = 1e-9;
    SUBCASE("omega = (1,2) resonates with (2,-1)") {
        const auto k = brute_force_resonant({1, 2}, cfg);
        REQUIRE(k.has_value());
        CHECK(*k == KVec{2, -1});
    }
    SUBCASE("fully resonant triple returns a difference vector") {
        DetectorConfig c2;
        c2.K = 2;
        c2.tol = 1e-9;
        const auto k = brute_force_resonant({1, 1, 1}, c2);
        REQUIRE(k.has_value());
        double dot = 0;
        for (std::size_t i = 0; i < 3; ++i) dot += static_cast<double>((*k)[i]);
        CHECK(dot == 0.0);
        CHECK(ell1(*k) == 2);
    }
    SUBCASE("golden ratio is non-resonant at order 3") {
        CHECK_FALSE(brute_force_resonant({1, phi}, cfg).has_value());
    }
    SUBCASE("budget exhaustion raises resource_error") {
        DetectorConfig big;
        big.K = 60;
        big.enum_budget = 1000;
        CHECK_THROWS_AS(brute_force_resonant({1, phi, 0.3, 0.7}, big), nekstab::resource_error);
    }
}

TEST_CASE("detector agrees with the oracle on integer frequency pairs") {
    DetectorConfig cfg;
    cfg.K = 10;
    cfg.tol = 1e-9;
    for (int a = 1; a <= 20; ++a)
        for (int b = 1; b <= 20; ++b) {
            const std::vector<double> omega{static_cast<double>(a), static_cast<double>(b)};
            const auto oracle = brute_force_resonant(omega, cfg);
            const auto ev = detect_ratio_crossing(omega, omega, cfg);
            REQUIRE(oracle.has_value() == ev.has_value());
            if (ev) {
                REQUIRE(ev->k == *oracle); // both sign-canonical
                REQUIRE(ell1(ev->k) <= 10);
            }
        }
}

TEST_CASE("order cutoff is inclusive at floor(K) in detector and oracle alike") {
    const std::vector<double> omega{1, 3}; // only resonance: (3,-1), cost 4
    DetectorConfig cfg;
    cfg.tol = 1e-9;
    cfg.K = 3.9;
    CHECK_FALSE(detect_ratio_crossing(omega, omega, cfg).has_value());
    CHECK_FALSE(brute_force_resonant(omega, cfg).has_value());
    cfg.K = 4.0;
    REQUIRE(detect_ratio_crossing(omega, omega, cfg).has_value());
    CHECK(detect_ratio_crossing(omega, omega, cfg)->k == KVec{3, -1});
    CHECK(brute_force_resonant(omega, cfg) == KVec{3, -1});
}

TEST_CASE("resonant_distance") {
    CHECK(resonant_distance({1, 1}, {1, -1}) == 0.0);
    CHECK(resonant_distance({1, 0}, {0, 1}) == 0.0);
    CHECK(resonant_distance({1, 2}, {1, 0}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(resonant_distance({1, 2}, {0, 0}), std::domain_error);
}
