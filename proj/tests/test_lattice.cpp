#include "nekstab/lattice.hpp"

#include "nekstab/simulate.hpp" // splitmix64

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numeric>

using namespace nekstab::lattice;

namespace {

struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    long long range(long long lo, long long hi) {
        return lo + static_cast<long long>(nekstab::sim::splitmix64(state) % static_cast<std::uint64_t>(hi - lo + 1));
    }
    double uniform() { return static_cast<double>(nekstab::sim::splitmix64(state) >> 11) * 0x1.0p-53; }
};

Int iabs(const Int& x) { return x < 0 ? Int(-x) : x; }

// Oracle: enumerate the Bezout solution family and keep the |u|-minimal one.
bool bounded_pair_exists(long long x, long long y, const Int& d, const Int& u, const Int& v) {
    return u * x + v * y == d && iabs(u) * d <= iabs(Int(y)) && iabs(v) * d <= iabs(Int(x));
}

} // namespace

TEST_CASE("ext_gcd_bounded frozen examples") {
    auto r = ext_gcd_bounded(5, 0);
    CHECK(r.d == 5);
    CHECK(r.u == 1);
    CHECK(r.v == 0);

    r = ext_gcd_bounded(2, 3);
    CHECK(r.d == 1);
    CHECK(r.u == -1);
    CHECK(r.v == 1);

    r = ext_gcd_bounded(4, 6);
    CHECK(r.d == 2);
    CHECK(r.u == -1);
    CHECK(r.v == 1);
}

TEST_CASE("ext_gcd_bounded rejects the all-zero input") {
    CHECK_THROWS_AS(ext_gcd_bounded(0, 0), std::domain_error);
    const auto r = ext_gcd_bounded(0, -7);
    CHECK(r.d == 7);
    CHECK(r.u == 0);
    CHECK(r.v == -1);
}

TEST_CASE("ext_gcd_bounded identity and bounds on a dense grid") {
    for (long long x = -60; x <= 60; ++x)
        for (long long y = -60; y <= 60; ++y) {
            if (x == 0 || y == 0) continue;
            const auto [d, u, v] = ext_gcd_bounded(x, y);
            CHECK(d == std::gcd(std::llabs(x), std::llabs(y)));
            CHECK(bounded_pair_exists(x, y, d, u, v));
        }
}

TEST_CASE("is_primitive") {
    CHECK(is_primitive({2, 3}));
    CHECK_FALSE(is_primitive({2, 4}));
    CHECK(is_primitive({1, 0, 0}));
    CHECK_THROWS_AS(is_primitive({0, 0}), std::domain_error);
}

TEST_CASE("unimodular_completion contract on frozen vectors") {
    SUBCASE("canonical basis vector completes to a signed permutation") {
        const IntMat a = unimodular_completion({1, 0, 0});
        CHECK(a[0] == IntVec{1, 0, 0});
        CHECK(iabs(det(a)) == 1);
    }
    SUBCASE("(2,3)") {
        const IntMat a = unimodular_completion({2, 3});
        CHECK(a[0] == IntVec{2, 3});
        CHECK(iabs(det(a)) == 1);
        for (const IntVec& row : a) CHECK(ell1(row) <= 5);
    }
    SUBCASE("(3,4,5)") {
        const IntVec k{3, 4, 5};
        const IntMat a = unimodular_completion(k);
        CHECK(a[0] == k);
        CHECK(iabs(det(a)) == 1);
        for (const IntVec& row : a) CHECK(ell1(row) <= 12);
        CHECK(max_row_ell1(inverse_unimodular(a)) <= lochak_bounds_exact(k, 3).first);
    }
    SUBCASE("zero-prefix vectors recurse through the column rotation") {
        for (const IntVec& k : {IntVec{0, 1}, IntVec{0, 0, 1}, IntVec{0, 0, -1}, IntVec{0, 2, 0, 3}}) {
            const IntMat a = unimodular_completion(k);
            CHECK(a[0] == k);
            CHECK(iabs(det(a)) == 1);
            for (const IntVec& row : a) CHECK(ell1(row) <= ell1(k));
        }
    }
    SUBCASE("non-primitive input is a domain error") {
        CHECK_THROWS_AS(unimodular_completion({2, 4}), std::domain_error);
    }
}

TEST_CASE("unimodular_completion random property sweep") {
    Rng rng(0xc0ffee11);
    for (int n = 2; n <= 5; ++n)
        for (int trial = 0; trial < 120; ++trial) {
            IntVec k(n);
            Int g = 0;
            do {
                for (int i = 0; i < n; ++i) k[i] = rng.range(-15, 15);
                g = 0;
                for (const Int& x : k) g = boost::multiprecision::gcd(g, iabs(x));
            } while (g != 1);
            const IntMat a = unimodular_completion(k);
            const Int K = ell1(k);
            REQUIRE(a[0] == k);
            REQUIRE(iabs(det(a)) == 1);
            for (const IntVec& row : a) REQUIRE(ell1(row) <= K);
            REQUIRE(max_row_ell1(inverse_unimodular(a)) <= lochak_bounds_exact(k, n).first);
        }
}

TEST_CASE("inverse_unimodular") {
    CHECK(inverse_unimodular(identity(3)) == identity(3));
    const IntMat a{{2, 3}, {1, 2}};
    CHECK(inverse_unimodular(a) == IntMat{{2, -3}, {-1, 2}});
    const IntMat rot{{0, 1}, {-1, 0}};
    CHECK(inverse_unimodular(rot) == IntMat{{0, -1}, {1, 0}});
    CHECK(mul(a, inverse_unimodular(a)) == identity(2));
    CHECK_THROWS_AS(inverse_unimodular(IntMat{{2, 0}, {0, 1}}), std::domain_error);
}

TEST_CASE("smith_normal_form frozen examples") {
    SUBCASE("identity") {
        const auto dec = smith_normal_form(identity(3));
        CHECK(dec.diag == IntVec{1, 1, 1});
        IntMat delta = identity(3);
        CHECK(mul(mul(dec.b, delta), dec.a) == identity(3));
    }
    SUBCASE("(2 4) has invariant factor 2") {
        const IntMat l{{2, 4}};
        const auto dec = smith_normal_form(l);
        CHECK(dec.diag == IntVec{2});
        IntMat delta{{dec.diag[0], 0}};
        CHECK(mul(mul(dec.b, delta), dec.a) == l);
    }
    SUBCASE("primitive rank-1 gives d1 = 1") {
        const auto dec = smith_normal_form(IntMat{{2, 3}});
        CHECK(dec.diag == IntVec{1});
    }
    SUBCASE("rank-deficient input is rejected") {
        CHECK_THROWS_AS(smith_normal_form(IntMat{{1, 2}, {2, 4}}), std::domain_error);
        CHECK_THROWS_AS(smith_normal_form(IntMat{{1}, {2}}), std::domain_error);
    }
}

TEST_CASE("smith_normal_form random reconstruction") {
    Rng rng(0x5a5a5a5a);
    int done = 0;
    while (done < 200) {
        const int r = static_cast<int>(rng.range(1, 3));
        const int n = static_cast<int>(rng.range(r, 5));
        IntMat l(r, IntVec(n));
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < n; ++j) l[i][j] = rng.range(-9, 9);
        SmithDecomposition dec;
        try {
            dec = smith_normal_form(l);
        } catch (const std::domain_error&) {
            continue;
        }
        ++done;
        IntMat delta(r, IntVec(n, 0));
        for (int i = 0; i < r; ++i) {
            REQUIRE(dec.diag[i] > 0); // full row rank
            delta[i][i] = dec.diag[i];
        }
        for (int i = 0; i + 1 < r; ++i) REQUIRE(dec.diag[i + 1] % dec.diag[i] == 0);
        REQUIRE(mul(mul(dec.b, delta), dec.a) == l);
        REQUIRE(iabs(det(dec.b)) == 1);
        REQUIRE(iabs(det(dec.a)) == 1);
    }
}

TEST_CASE("module_volume") {
    CHECK(module_volume({{3, 4}}) == doctest::Approx(5.0));
    CHECK(module_volume({{1, 0, 0}, {0, 1, 0}}) == doctest::Approx(1.0));
    CHECK(module_volume({{1, 1, 1}}) == doctest::Approx(std::sqrt(3.0)));
    CHECK_THROWS_AS(module_volume({{1, 2}, {2, 4}}), std::domain_error);
}

TEST_CASE("module_volume is invariant under unimodular row transforms") {
    Rng rng(0xfeedface);
    int done = 0;
    while (done < 100) {
        const int r = static_cast<int>(rng.range(1, 3));
        const int n = static_cast<int>(rng.range(r, 5));
        IntMat basis(r, IntVec(n));
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < n; ++j) basis[i][j] = rng.range(-6, 6);
        double vol;
        try {
            vol = module_volume(basis);
        } catch (const std::domain_error&) {
            continue;
        }
        ++done;
        IntMat u = identity(r);
        for (int ops = 0; ops < 8; ++ops) {
            if (r == 1) {
                u[0][0] = rng.range(0, 1) ? 1 : -1;
                continue;
            }
            const auto i = static_cast<std::size_t>(rng.range(0, r - 1));
            auto j = static_cast<std::size_t>(rng.range(0, r - 1));
            while (j == i) j = static_cast<std::size_t>(rng.range(0, r - 1));
            const Int c = rng.range(-3, 3);
            for (int col = 0; col < r; ++col) u[i][col] += c * u[j][col];
        }
        REQUIRE(iabs(det(u)) == 1);
        REQUIRE(module_volume(mul(u, basis)) == doctest::Approx(vol).epsilon(1e-12));
    }
}

TEST_CASE("lochak_bounds frozen examples") {
    CHECK(lochak_bounds({2, 3}, 2) == std::pair{10.0, 5.0});
    CHECK(lochak_bounds({1, 0, 1}, 3) == std::pair{24.0, 2.0});
    CHECK(lochak_bounds({1, 0, 0, 0}, 4) == std::pair{24.0, 1.0});
    CHECK_THROWS_AS(lochak_bounds({2, 4}, 2), std::domain_error);
}

TEST_CASE("dirichlet_rational frozen examples") {
    SUBCASE("zero is the cheapest rational when the interval allows it") {
        const auto r = dirichlet_rational(0.0, 0.3);
        CHECK(r.p == 0);
        CHECK(r.q == 1);
    }
    SUBCASE("[0.3, 0.8] yields 1/2") {
        const auto r = dirichlet_rational(0.55, 0.5);
        CHECK(r.p == 1);
        CHECK(r.q == 2);
        CHECK(static_cast<double>(r.p < 0 ? -r.p : r.p) + static_cast<double>(r.q) < 4 * std::sqrt(2.0 / 0.5));
    }
    SUBCASE("construction path: center 0.7, length 0.02 -> 7/10") {
        const auto r = dirichlet_rational(0.7, 0.02);
        CHECK(r.p == 7);
        CHECK(r.q == 10);
    }
    SUBCASE("domain errors") {
        CHECK_THROWS_AS(dirichlet_rational(0.99, 0.5), std::domain_error);
        CHECK_THROWS_AS(dirichlet_rational(0.0, 0.0), std::domain_error);
        CHECK_THROWS_AS(dirichlet_rational(0.0, -1.0), std::domain_error);
    }
}

TEST_CASE("dirichlet_rational always returns a reduced member of the interval") {
    Rng rng(0xd112c43e);
    for (int trial = 0; trial < 20000; ++trial) {
        const double l = std::pow(10.0, -7.0 + 7.3 * rng.uniform());
        const double c = -1 + l / 2 + (2 - l) * rng.uniform();
        const auto r = dirichlet_rational(c, l);
        const Rat f(r.p, r.q);
        REQUIRE(Rat(c - l / 2) <= f);
        REQUIRE(f <= Rat(c + l / 2));
        REQUIRE(boost::multiprecision::gcd(iabs(r.p), r.q) == 1);
        REQUIRE(r.q >= 1);
    }
}

TEST_CASE("simplest_rational_in finds the minimal denominator") {
    const auto a = simplest_rational_in(0.3, 0.8);
    CHECK(a.p == 1);
    CHECK(a.q == 2);
    const auto b = simplest_rational_in(0.9994, 0.9999);
    CHECK(b.p == 1666);
    CHECK(b.q == 1667);
    const auto c = simplest_rational_in(-0.8, -0.3);
    CHECK(c.p == -1);
    CHECK(c.q == 2);
    const auto d = simplest_rational_in(-0.1, 0.2);
    CHECK(d.p == 0);
    CHECK(d.q == 1);
}
