#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <utility>
#include <vector>

namespace nekstab::lattice {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;
using IntVec = std::vector<Int>;
using IntMat = std::vector<IntVec>; // row-major

/// l1-norm |k| = |k_1| + ... + |k_n|.
Int ell1(const IntVec& k);

/// Max row l1-norm: the matrix norm induced by the sup norm on vectors.
Int max_row_ell1(const IntMat& a);

/// Exact determinant (fraction-free Bareiss elimination).
Int det(const IntMat& a);

IntMat identity(std::size_t n);
IntMat mul(const IntMat& a, const IntMat& b);

struct BezoutResult {
    Int d; // gcd, positive
    Int u;
    Int v;
};

/// Solves u*x + v*y = d = gcd(|x|,|y|) with |u| <= |y|/d and |v| <= |x|/d
/// whenever x and y are both nonzero (u is the minimal-magnitude residue of
/// its congruence class, ties resolved positive). (x,0) -> (|x|, sgn x, 0)
/// and (0,y) -> (|y|, 0, sgn y).
BezoutResult ext_gcd_bounded(const Int& x, const Int& y);

/// True iff the components of k are relatively prime. Throws on k = 0.
bool is_primitive(const IntVec& k);

/// Extends a primitive vector k to a matrix A in GL(n,Z) with first row k
/// whose rows all have l1-norm <= |k|. Consequently the exact inverse
/// satisfies max_row_ell1(A^-1) <= n! * |k|^(n-1).
IntMat unimodular_completion(const IntVec& k);

/// Exact inverse of a matrix with determinant +-1, via the adjugate.
IntMat inverse_unimodular(const IntMat& a);

struct SmithDecomposition {
    IntMat b;    // r x r, det +-1
    IntVec diag; // invariant factors d_1 | d_2 | ... | d_r, nonnegative
    IntMat a;    // n x n, det +-1
};

/// L = B * Delta * A with Delta the r x n diagonal extension of diag.
/// Requires full row rank (r <= n, rows independent over Q).
SmithDecomposition smith_normal_form(const IntMat& l);

/// sqrt(det(M M^T)) for a full-row-rank basis matrix M; basis-independent.
double module_volume(const IntMat& basis);

/// Upper bounds (n! K^(n-1), K) with K = |k|, valid for primitive k.
std::pair<Int, Int> lochak_bounds_exact(const IntVec& k, int n);
std::pair<double, double> lochak_bounds(const IntVec& k, int n);

struct Rational {
    Int p;
    Int q; // >= 1, gcd(|p|, q) = 1
};

/// Minimal-denominator rational in the closed interval [lo, hi]
/// (Stern-Brocot descent on the exact dyadic endpoints). Among the
/// admissible numerators at that denominator, |p| is minimized
/// (ties toward positive p).
Rational simplest_rational_in(double lo, double hi);

/// Rational p/q in [center - length/2, center + length/2] subset of [-1,1].
/// Follows the q = ceil(sqrt(2/length)), p = round(q*center) construction
/// and falls back to simplest_rational_in when that point misses the
/// interval, so membership and reducedness always hold; |p| + q stays below
/// 4*sqrt(2)*length^(-1/2) whenever the interval admits such a rational.
Rational dirichlet_rational(double center, double length);

} // namespace nekstab::lattice
