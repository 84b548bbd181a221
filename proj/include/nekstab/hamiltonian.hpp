#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace nekstab::ham {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

enum class CatalogId { shifted_convex, anisotropic_convex };

/// Closed-form quasi-convex integrable family:
///   shifted_convex      h(I) = Omega.I + |I|^2/2          (Hessian = Id)
///   anisotropic_convex  h(I) = Omega.I + sum w_i I_i^2/2  (Hessian = diag w)
struct IntegrableSpec {
    CatalogId id = CatalogId::shifted_convex;
    Vec omega0;  // frequency shift Omega
    Vec weights; // anisotropic only, all positive

    int dim() const { return static_cast<int>(omega0.size()); }
    double weight(int i) const { return id == CatalogId::shifted_convex ? 1.0 : weights[i]; }
};

double eval_h(const IntegrableSpec& spec, const Vec& I);
Vec grad_h(const IntegrableSpec& spec, const Vec& I);
Mat hess_h(const IntegrableSpec& spec, const Vec& I);

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations,
/// ascending.
Vec jacobi_eigenvalues(Mat a);

/// Minimum of v^T hess v over unit v orthogonal to grad: the smallest
/// eigenvalue of hess projected onto grad-perp (Gram-Schmidt basis skipping
/// the dominant gradient component, then Jacobi).
double qc_margin(const Vec& grad, const Mat& hess);

struct QcReport {
    bool pass = false;
    double margin = 0.0;
};

QcReport check_qc(const IntegrableSpec& spec, const Vec& I, double m);

/// True iff all partial derivatives of h of order 1..3 are bounded by M at
/// every grid point (closed form; order 3 vanishes for the catalog).
bool check_derivative_bound(const IntegrableSpec& spec, const std::vector<Vec>& grid, double M);

/// Per-term action weight, a polynomial of degree <= 2 in I (diagonal
/// quadratic part). Defaults to the constant 1.
struct WeightPoly {
    double c0 = 1.0;
    Vec lin;
    Vec quad;

    bool is_constant() const;
    double eval(const Vec& I) const;
    Vec grad(const Vec& I) const;
};

/// One term amplitude * weight(I) * cos(2 pi (k.theta) + 2 pi phase).
struct TrigTerm {
    std::vector<long long> k;
    double amplitude = 0.0;
    double phase = 0.0; // in [0,1)
    WeightPoly weight;
};

struct TrigPerturbation {
    std::vector<TrigTerm> terms;
};

double eval_f(const TrigPerturbation& pert, const Vec& theta, const Vec& I);
Vec grad_f_theta(const TrigPerturbation& pert, const Vec& theta, const Vec& I);
Vec grad_f_I(const TrigPerturbation& pert, const Vec& theta, const Vec& I);

/// Certified upper bound on the (alpha, L) Gevrey norm over T^n x B(0,R):
/// sum_k |a_k| W_k prod_i S(2 pi |k_i|) with S(x) = sum_j L^j (j!)^-alpha x^j
/// (closed form e^(Lx) at alpha = 1, tail-bounded partial sums otherwise)
/// and W_k the analogous finite factor for the degree-<=2 action weight.
double gevrey_norm_bound(const TrigPerturbation& pert, double alpha, double L, double R = 1.0);

/// sup |f| over the torus and the closed action ball of radius R.
double sup_bound(const TrigPerturbation& pert, double R);

struct GevreyParams {
    double alpha = 1.0;
    double L = 1.0;
};

struct SystemSpec {
    int n = 2;
    double R = 1.0; // actions live in B(0, R), sup norm
    double s = 0.5; // analyticity width, bookkeeping only
    std::optional<GevreyParams> gevrey;
    IntegrableSpec integrable;
    TrigPerturbation perturbation;
    double epsilon = 0.0; // H = h + epsilon * f
    double m = 1.0;       // quasi-convexity constant
    double M = 1.0;       // derivative bound
    std::optional<double> l; // companion constant of the two-sided quasi-convexity form; carried, unused

    void validate() const; // throws std::domain_error
};

struct IsoEnergeticPoint {
    Vec I;
    double lambda = 1.0;
};

/// Psi_h(I, lambda) = (h(I), lambda * grad h(I)).
std::pair<double, Vec> psi_h(const IntegrableSpec& spec, const IsoEnergeticPoint& p);

/// (n+1)x(n+1) Jacobian of Psi_h in coordinates (I_1..I_n, lambda):
/// first row (omega, 0), then rows (lambda hess | omega).
Mat assemble_psi_jacobian(const Vec& omega, const Mat& hess, double lambda);

struct PsiJacobian {
    Mat jac;
    bool nonsingular = false;
};

PsiJacobian jacobian_psi(const IntegrableSpec& spec, const IsoEnergeticPoint& p);

} // namespace nekstab::ham
