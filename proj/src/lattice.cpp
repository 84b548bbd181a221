#include "nekstab/lattice.hpp"

#include "nekstab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace nekstab::lattice {

namespace {

Int iabs(const Int& x) { return x < 0 ? Int(-x) : x; }

int sgn(const Int& x) { return x < 0 ? -1 : (x > 0 ? 1 : 0); }

Int gcd_all(const IntVec& v) {
    Int g = 0;
    for (const Int& x : v) g = boost::multiprecision::gcd(g, iabs(x));
    return g;
}

void require_nonempty(const IntVec& k) {
    if (k.empty()) throw std::domain_error("empty integer vector");
}

} // namespace

Int ell1(const IntVec& k) {
    Int s = 0;
    for (const Int& x : k) s += iabs(x);
    return s;
}

Int max_row_ell1(const IntMat& a) {
    Int best = 0;
    for (const IntVec& row : a) best = std::max(best, ell1(row));
    return best;
}

IntMat identity(std::size_t n) {
    IntMat m(n, IntVec(n, 0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

IntMat mul(const IntMat& a, const IntMat& b) {
    const std::size_t r = a.size(), k = b.size(), c = b.empty() ? 0 : b[0].size();
    IntMat out(r, IntVec(c, 0));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t t = 0; t < k; ++t) {
            if (a[i][t] == 0) continue;
            for (std::size_t j = 0; j < c; ++j) out[i][j] += a[i][t] * b[t][j];
        }
    return out;
}

Int det(const IntMat& a) {
    const std::size_t n = a.size();
    if (n == 0 || a[0].size() != n) throw std::domain_error("det: matrix must be square");
    IntMat w = a;
    Int prev = 1;
    int sign = 1;
    for (std::size_t t = 0; t + 1 < n; ++t) {
        if (w[t][t] == 0) {
            std::size_t piv = t;
            while (piv < n && w[piv][t] == 0) ++piv;
            if (piv == n) return 0;
            std::swap(w[t], w[piv]);
            sign = -sign;
        }
        for (std::size_t i = t + 1; i < n; ++i) {
            for (std::size_t j = t + 1; j < n; ++j) {
                // Fraction-free: division is exact at every step.
                w[i][j] = (w[i][j] * w[t][t] - w[i][t] * w[t][j]) / prev;
            }
            w[i][t] = 0;
        }
        prev = w[t][t];
    }
    return sign > 0 ? w[n - 1][n - 1] : Int(-w[n - 1][n - 1]);
}

BezoutResult ext_gcd_bounded(const Int& x, const Int& y) {
    if (x == 0 && y == 0) throw std::domain_error("ext_gcd_bounded: both arguments zero");
    if (y == 0) return {iabs(x), Int(sgn(x)), 0};
    if (x == 0) return {iabs(y), 0, Int(sgn(y))};

    Int a = iabs(x), b = iabs(y);
    Int u0 = 1, u1 = 0;
    while (b != 0) {
        Int q = a / b;
        Int r = a - q * b;
        a = b;
        b = r;
        Int u2 = u0 - q * u1;
        u0 = u1;
        u1 = u2;
    }
    const Int d = a;
    Int u = u0 * sgn(x);
    // u is free modulo y/d; take the minimal-magnitude residue, ties positive.
    const Int step = iabs(y) / d;
    Int r = u % step;
    if (r < 0) r += step;
    u = (2 * r > step) ? Int(r - step) : r;
    Int v = (d - u * x) / y;
    return {d, u, v};
}

bool is_primitive(const IntVec& k) {
    require_nonempty(k);
    const Int g = gcd_all(k);
    if (g == 0) throw std::domain_error("is_primitive: zero vector");
    return g == 1;
}

namespace {

// Re-index columns: out[i][j] = a[i][perm[j]].
IntMat permute_columns(const IntMat& a, const std::vector<std::size_t>& perm) {
    IntMat out(a.size(), IntVec(perm.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < perm.size(); ++j) out[i][j] = a[i][perm[j]];
    return out;
}

IntMat complete_recursive(const IntVec& k) {
    const std::size_t n = k.size();
    if (n == 1) return {{k[0]}};

    bool prefix_zero = true;
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (k[i] != 0) {
            prefix_zero = false;
            break;
        }
    if (prefix_zero) {
        // Rotate components left, complete, then undo the rotation on columns.
        IntVec rot(n);
        for (std::size_t i = 0; i < n; ++i) rot[i] = k[(i + 1) % n];
        IntMat a = complete_recursive(rot);
        std::vector<std::size_t> undo(n);
        for (std::size_t j = 0; j < n; ++j) undo[j] = (j + n - 1) % n;
        return permute_columns(a, undo);
    }

    IntVec kstar(k.begin(), k.end() - 1);
    const Int d = gcd_all(kstar);
    IntVec kred(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) kred[i] = kstar[i] / d;
    const IntMat sub = complete_recursive(kred);

    const Int kn = k[n - 1];
    Int u = 1, v = 0;
    if (kn != 0) {
        const BezoutResult bez = ext_gcd_bounded(d, kn); // gcd(d, kn) = 1 by primitivity
        u = bez.u;
        v = bez.v;
    }

    const Int last_sign = (n - 1) % 2 == 0 ? 1 : -1; // (-1)^(n-1)
    auto assemble = [&](const Int& vv) {
        IntMat a(n, IntVec(n, 0));
        a[0] = k;
        for (std::size_t i = 1; i + 1 < n; ++i)
            for (std::size_t j = 0; j + 1 < n; ++j) a[i][j] = sub[i][j];
        for (std::size_t j = 0; j + 1 < n; ++j) a[n - 1][j] = last_sign * vv * kred[j];
        a[n - 1][n - 1] = last_sign * u;
        return a;
    };

    IntMat a = assemble(v);
    if (iabs(det(a)) != 1) a = assemble(Int(-v)); // companion pair solving u*d - v*kn = +-1
    if (iabs(det(a)) != 1) throw std::logic_error("unimodular_completion: construction lost unimodularity");
    return a;
}

} // namespace

IntMat unimodular_completion(const IntVec& k) {
    if (!is_primitive(k)) throw std::domain_error("unimodular_completion: invariant factor != 1 (vector not primitive)");
    return complete_recursive(k);
}

IntMat inverse_unimodular(const IntMat& a) {
    const std::size_t n = a.size();
    if (n == 0 || a[0].size() != n) throw std::domain_error("inverse_unimodular: matrix must be square");
    const Int d = det(a);
    if (d != 1 && d != -1) throw std::domain_error("inverse_unimodular: |det| != 1");
    IntMat inv(n, IntVec(n, 0));
    if (n == 1) {
        inv[0][0] = d;
        return inv;
    }
    IntMat minor(n - 1, IntVec(n - 1));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t r = 0, mr = 0; r < n; ++r) {
                if (r == i) continue;
                for (std::size_t c = 0, mc = 0; c < n; ++c) {
                    if (c == j) continue;
                    minor[mr][mc++] = a[r][c];
                }
                ++mr;
            }
            const Int cof = ((i + j) % 2 == 0 ? 1 : -1) * det(minor);
            inv[j][i] = cof * d; // adjugate over det, and 1/det = det here
        }
    return inv;
}

namespace {

struct SmithWorker {
    IntMat w, b, a;
    std::size_t r, n;

    explicit SmithWorker(const IntMat& l) : w(l), r(l.size()), n(l[0].size()) {
        b = identity(r);
        a = identity(n);
    }

    // Row op w <- E w mirrored as b <- b E^-1; column op w <- w F as a <- F^-1 a.
    void row_axpy(std::size_t dst, std::size_t src, const Int& q) {
        for (std::size_t j = 0; j < n; ++j) w[dst][j] -= q * w[src][j];
        for (std::size_t i = 0; i < r; ++i) b[i][src] += q * b[i][dst];
    }
    void col_axpy(std::size_t dst, std::size_t src, const Int& q) {
        for (std::size_t i = 0; i < r; ++i) w[i][dst] -= q * w[i][src];
        for (std::size_t j = 0; j < n; ++j) a[src][j] += q * a[dst][j];
    }
    void row_swap(std::size_t i, std::size_t j) {
        std::swap(w[i], w[j]);
        for (std::size_t t = 0; t < r; ++t) std::swap(b[t][i], b[t][j]);
    }
    void col_swap(std::size_t i, std::size_t j) {
        for (std::size_t t = 0; t < r; ++t) std::swap(w[t][i], w[t][j]);
        std::swap(a[i], a[j]);
    }
    void row_negate(std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) w[i][j] = -w[i][j];
        for (std::size_t t = 0; t < r; ++t) b[t][i] = -b[t][i];
    }

    bool pivot_to(std::size_t t) {
        std::size_t bi = t, bj = t;
        Int best = 0;
        for (std::size_t i = t; i < r; ++i)
            for (std::size_t j = t; j < n; ++j) {
                const Int v = iabs(w[i][j]);
                if (v != 0 && (best == 0 || v < best)) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        if (best == 0) return false;
        if (bi != t) row_swap(t, bi);
        if (bj != t) col_swap(t, bj);
        return true;
    }

    void diagonalize(std::size_t t) {
        for (;;) {
            if (!pivot_to(t)) throw std::domain_error("smith_normal_form: input is rank deficient");
            bool clean = true;
            for (std::size_t i = t + 1; i < r; ++i)
                if (w[i][t] != 0) {
                    row_axpy(i, t, Int(w[i][t] / w[t][t]));
                    if (w[i][t] != 0) clean = false;
                }
            for (std::size_t j = t + 1; j < n; ++j)
                if (w[t][j] != 0) {
                    col_axpy(j, t, Int(w[t][j] / w[t][t]));
                    if (w[t][j] != 0) clean = false;
                }
            if (clean) return;
        }
    }

    SmithDecomposition run() {
        for (std::size_t t = 0; t < r; ++t) diagonalize(t);
        // Divisibility chain: fold d_{t+1} into column t and re-diagonalize.
        for (std::size_t t = 0; t + 1 < r;) {
            if (w[t + 1][t + 1] % w[t][t] == 0) {
                ++t;
                continue;
            }
            col_axpy(t, t + 1, Int(-1));
            for (std::size_t s = t; s < r; ++s) diagonalize(s);
            t = 0;
        }
        for (std::size_t t = 0; t < r; ++t)
            if (w[t][t] < 0) row_negate(t);
        IntVec diag(r);
        for (std::size_t t = 0; t < r; ++t) diag[t] = w[t][t];
        return {b, diag, a};
    }
};

} // namespace

SmithDecomposition smith_normal_form(const IntMat& l) {
    if (l.empty() || l[0].empty()) throw std::domain_error("smith_normal_form: empty matrix");
    for (const IntVec& row : l)
        if (row.size() != l[0].size()) throw std::domain_error("smith_normal_form: ragged matrix");
    if (l.size() > l[0].size()) throw std::domain_error("smith_normal_form: more rows than columns cannot have full row rank");
    return SmithWorker(l).run();
}

double module_volume(const IntMat& basis) {
    if (basis.empty() || basis[0].empty()) throw std::domain_error("module_volume: empty basis");
    const std::size_t r = basis.size(), n = basis[0].size();
    if (r > n) throw std::domain_error("module_volume: rank exceeds dimension");
    IntMat gram(r, IntVec(r, 0));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
            for (std::size_t t = 0; t < n; ++t) gram[i][j] += basis[i][t] * basis[j][t];
    const Int g = det(gram);
    if (g <= 0) throw std::domain_error("module_volume: basis is rank deficient");
    return std::sqrt(static_cast<double>(g));
}

std::pair<Int, Int> lochak_bounds_exact(const IntVec& k, int n) {
    if (!is_primitive(k)) throw std::domain_error("lochak_bounds: vector not primitive");
    if (n < 1) throw std::domain_error("lochak_bounds: dimension must be positive");
    const Int big_k = ell1(k);
    Int fact = 1;
    for (int i = 2; i <= n; ++i) fact *= i;
    Int pw = 1;
    for (int i = 0; i + 1 < n; ++i) pw *= big_k;
    return {Int(fact * pw), big_k};
}

std::pair<double, double> lochak_bounds(const IntVec& k, int n) {
    const auto [c, cp] = lochak_bounds_exact(k, n);
    return {static_cast<double>(c), static_cast<double>(cp)};
}

namespace {

Int rat_floor(const Rat& x) {
    const Int num = boost::multiprecision::numerator(x);
    const Int den = boost::multiprecision::denominator(x); // positive, canonical
    Int q = num / den;
    if (num % den != 0 && num < 0) --q;
    return q;
}

Int rat_ceil(const Rat& x) {
    const Int f = rat_floor(x);
    return Rat(f) == x ? f : Int(f + 1);
}

// Minimal-denominator rational in closed [lo, hi] with 0 <= lo <= hi.
Rat simplest_nonneg(const Rat& lo, const Rat& hi) {
    const Int c = rat_ceil(lo);
    if (Rat(c) <= hi) return Rat(c);
    const Int f = rat_floor(lo);
    const Rat inner = simplest_nonneg(1 / (hi - Rat(f)), 1 / (lo - Rat(f)));
    return Rat(f) + 1 / inner;
}

Rat simplest_exact(const Rat& lo, const Rat& hi) {
    if (lo > hi) throw std::domain_error("simplest_rational_in: empty interval");
    if (lo <= 0 && 0 <= hi) return Rat(0);
    if (hi < 0) return -simplest_nonneg(-hi, -lo);
    return simplest_nonneg(lo, hi);
}

} // namespace

Rational simplest_rational_in(double lo, double hi) {
    if (!(lo <= hi)) throw std::domain_error("simplest_rational_in: empty interval");
    const Rat rlo(lo), rhi(hi); // dyadic, exact
    const Rat best = simplest_exact(rlo, rhi);
    const Int q = boost::multiprecision::denominator(best);
    // Every admissible numerator at the minimal denominator is coprime with
    // it (a common factor would reduce to a smaller denominator in range);
    // take the one of least magnitude.
    const Int pmin = rat_ceil(rlo * Rat(q));
    const Int pmax = rat_floor(rhi * Rat(q));
    const Int p = pmin > 0 ? pmin : (pmax < 0 ? pmax : Int(0));
    return {p, q};
}

Rational dirichlet_rational(double center, double length) {
    if (!(length > 0)) throw std::domain_error("dirichlet_rational: length must be positive");
    const double lo = center - length / 2;
    const double hi = center + length / 2;
    if (!(lo >= -1.0 && hi <= 1.0)) throw std::domain_error("dirichlet_rational: interval not contained in [-1,1]");

    const double qd = std::ceil(std::sqrt(2.0 / length));
    if (!(qd < 1e15)) throw std::domain_error("dirichlet_rational: length too small for the construction");
    const auto q0 = static_cast<long long>(qd);
    const auto p0 = std::llround(static_cast<double>(q0) * center);
    Int p = p0, q = q0;
    const Int g = boost::multiprecision::gcd(iabs(p), q);
    if (g > 1) {
        p /= g;
        q /= g;
    }
    const Rat cand(p, q);
    if (Rat(lo) <= cand && cand <= Rat(hi)) return {p, q};
    return simplest_rational_in(lo, hi);
}

} // namespace nekstab::lattice
