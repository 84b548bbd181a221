#include "nekstab/envelope.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace nekstab::envelope;

TEST_CASE("k_schedule") {
    Constants c;
    CHECK(k_schedule(1.0, 0.25, c) == doctest::Approx(1.0)); // eps = eps0 -> K0
    CHECK(k_schedule(1e-6, 1.0 / 6.0, c) == doctest::Approx(10.0));
    CHECK_THROWS_AS(k_schedule(1e-3, 0.0, c), std::domain_error);
    CHECK_THROWS_AS(k_schedule(2.0, 0.1, c), std::domain_error); // eps > eps0
}

TEST_CASE("exponent_analytic frozen values") {
    CHECK(exponent_analytic(3, 1.0 / 6.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(exponent_analytic(3, 1.0 / 12.0) == doctest::Approx(5.0 / 24.0).epsilon(1e-15));
    CHECK_THROWS_AS(exponent_analytic(3, 0.0), std::domain_error);
    CHECK_THROWS_AS(exponent_analytic(3, 0.2), std::domain_error); // > 1/(2n)
    CHECK_THROWS_AS(exponent_analytic(1, 0.1), std::domain_error);
}

TEST_CASE("exponent_analytic range, monotonicity, gamma <= a_gamma") {
    for (int n = 2; n <= 10; ++n) {
        double prev = 1.0;
        for (int s = 1; s <= 100; ++s) {
            const double gamma = s / (100.0 * 2 * n);
            const double a = exponent_analytic(n, gamma);
            CHECK(a >= 1.0 / (2.0 * n) - 1e-15);
            CHECK(a < 1.0 / (2.0 * (n - 1)));
            CHECK(a < prev);
            CHECK(gamma <= a + 1e-15);
            // delta-form identity: delta = gamma/(n-1) gives a = 1/(2(n-1)) - delta
            CHECK(a == doctest::Approx(1.0 / (2.0 * (n - 1)) - gamma / (n - 1)).epsilon(1e-14));
            prev = a;
        }
    }
}

TEST_CASE("exponent_gevrey frozen values and ranges") {
    SUBCASE("n = 3, alpha = 1, gamma = 1/40") {
        const auto [a, b] = exponent_gevrey(3, 1.0, 1.0 / 40.0);
        CHECK(a == doctest::Approx(0.125).epsilon(1e-15));
        CHECK(b == doctest::Approx(0.15).epsilon(1e-15));
    }
    SUBCASE("gamma -> 0 limits") {
        const auto [a, b] = exponent_gevrey(4, 2.0, 1e-12);
        CHECK(a == doctest::Approx(1.0 / (2.0 * 2.0 * 3.0)).epsilon(1e-9));
        CHECK(b == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
    }
    SUBCASE("range of b_gamma and gamma <= b_gamma") {
        for (int n = 2; n <= 10; ++n)
            for (int s = 1; s <= 40; ++s) {
                const double gmax = 1.0 / (5.0 * (n - 1) * (n - 1));
                const double gamma = s * gmax / 40.0;
                const auto [a, b] = exponent_gevrey(n, 1.5, gamma);
                CHECK(b >= (n - 2) / (5.0 * (n - 1) * (n - 1)) - 1e-15);
                CHECK(b <= 1.0 / (2.0 * (n - 1)) + 1e-15);
                // gamma <= b_gamma holds on the full gamma range only for
                // n >= 3; at n = 2 it holds up to gamma = 1/10, the largest
                // value the delta-based predictions map to.
                if (n >= 3 || gamma <= 0.1) CHECK(gamma <= b + 1e-15);
                CHECK(a >= -1e-15);
            }
    }
    SUBCASE("alpha = 1 coincides with the analytic exponent as gamma -> 0") {
        const double a1 = exponent_gevrey(5, 1.0, 1e-13).a;
        const double a2 = exponent_analytic(5, 1e-13);
        CHECK(a1 == doctest::Approx(a2).epsilon(1e-10));
    }
    SUBCASE("delta conversion: a = 1/(2 alpha (n-1)) - delta/alpha, collapsing to 1/(2(n-1)) - delta at alpha = 1") {
        for (double alpha : {1.0, 1.5, 2.0})
            for (int n : {2, 3, 5}) {
                const double gamma = 0.5 / (5.0 * (n - 1) * (n - 1));
                const double delta = 2.5 * gamma * (n - 1);
                const double a = exponent_gevrey(n, alpha, gamma).a;
                CHECK(a == doctest::Approx(1.0 / (2.0 * alpha * (n - 1)) - delta / alpha).epsilon(1e-13));
            }
    }
    SUBCASE("out of range") {
        CHECK_THROWS_AS(exponent_gevrey(3, 1.0, 1.0), std::domain_error);
        CHECK_THROWS_AS(exponent_gevrey(3, 0.9, 0.01), std::domain_error);
    }
}

TEST_CASE("predict_analytic frozen example: n=3, delta=1/12, eps=1e-4, unit constants") {
    Constants c;
    const auto p = predict_analytic(3, 1.0 / 12.0, 1e-4, c);
    CHECK(p.confinement_radius == doctest::Approx(std::pow(10.0, -2.0 / 3.0)).epsilon(1e-12));
    CHECK(p.log_time == doctest::Approx(std::pow(10.0, 2.0 / 3.0)).epsilon(1e-12));
    CHECK(p.time_log_exponent == doctest::Approx(0.25 - 1.0 / 12.0).epsilon(1e-15));
    CHECK(p.shape_only);
    CHECK(p.thresholds.size() == 3);
}

TEST_CASE("predict_analytic at the extreme delta recovers the (2n)^-1 exponents") {
    Constants c;
    for (int n = 2; n <= 6; ++n) {
        const double delta = 1.0 / (2.0 * n * (n - 1));
        const auto p = predict_analytic(n, delta, 1e-3, c);
        CHECK(p.radius_exponent == doctest::Approx(1.0 / (2.0 * n)).epsilon(1e-14));
        CHECK(p.time_log_exponent == doctest::Approx(1.0 / (2.0 * n)).epsilon(1e-14));
    }
    CHECK_THROWS_AS(predict_analytic(3, 1.0, 1e-3, c), std::domain_error);
    CHECK_NOTHROW(predict_analytic(3, 1.0 / 12.0, 1.0, c)); // eps = eps0 boundary
}

TEST_CASE("predict_gevrey") {
    Constants c;
    SUBCASE("alpha = 1 time exponent matches the analytic one") {
        const double delta = 1.0 / 48.0;
        const auto pg = predict_gevrey(3, 1.0, delta, 1e-4, c);
        const auto pa = predict_analytic(3, delta, 1e-4, c);
        CHECK(pg.time_log_exponent == doctest::Approx(pa.time_log_exponent).epsilon(1e-14));
        CHECK(pg.radius_exponent != pa.radius_exponent);
    }
    SUBCASE("n=3, alpha=2, delta=1/48: time exponent 5/48") {
        const auto p = predict_gevrey(3, 2.0, 1.0 / 48.0, 1e-4, c);
        CHECK(p.time_log_exponent == doctest::Approx(5.0 / 48.0).epsilon(1e-14));
        CHECK(p.radius_exponent == doctest::Approx(2.0 * (1.0 / 48.0) / 10.0).epsilon(1e-14));
    }
    SUBCASE("delta out of range") {
        CHECK_THROWS_AS(predict_gevrey(3, 2.0, 1.0, 1e-4, c), std::domain_error);
    }
}

TEST_CASE("check_thresholds frozen examples") {
    Constants c;
    SUBCASE("eps = 1e-8, K = 2, n = 3: order condition holds") {
        const auto ts = check_thresholds(3, 1e-8, 2.0, Regularity::analytic, c);
        CHECK(ts[0].name == "order_condition");
        CHECK(ts[0].lhs == doctest::Approx(1e-8 * 64));
        CHECK(ts[0].satisfied);
    }
    SUBCASE("eps = 1, K = 2, n = 3: order condition fails") {
        const auto ts = check_thresholds(3, 1.0, 2.0, Regularity::analytic, c);
        CHECK_FALSE(ts[0].satisfied);
    }
    SUBCASE("K = 10 passes the frequency-map margin at unit constants") {
        const auto ts = check_thresholds(3, 1e-4, 10.0, Regularity::analytic, c);
        CHECK(ts[1].name == "frequency_map_margin");
        CHECK(ts[1].lhs == doctest::Approx(0.01));
        CHECK(ts[1].rhs == doctest::Approx(1.0 / 32.0));
        CHECK(ts[1].satisfied);
    }
    SUBCASE("gevrey order condition uses the (n-1)^2 exponent") {
        const auto ts = check_thresholds(3, 1e-22, 10.0, Regularity::gevrey, c);
        CHECK(ts[0].lhs == doctest::Approx(1e-22 * std::pow(10.0, 20.0)).epsilon(1e-9));
        CHECK(ts[0].satisfied);
    }
}

TEST_CASE("local_exponents") {
    CHECK(local_exponents(4, 2, 1.0).a == doctest::Approx(0.25));
    CHECK(local_exponents(4, 2, 1.0).b == doctest::Approx(0.25));
    CHECK(local_exponents(5, 0, 2.0).a == doctest::Approx(1.0 / 20.0));
    CHECK(local_exponents(5, 0, 2.0).b == doctest::Approx(1.0 / 10.0));
    CHECK(local_exponents(3, 2, 1.0).a == doctest::Approx(0.5));
    CHECK_THROWS_AS(local_exponents(3, 3, 1.0), std::domain_error);
    CHECK_THROWS_AS(local_exponents(3, -1, 1.0), std::domain_error);
}
