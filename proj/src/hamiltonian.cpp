#include "nekstab/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nekstab::ham {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void require_dim(const IntegrableSpec& spec, const Vec& I) {
    if (static_cast<int>(I.size()) != spec.dim()) throw std::domain_error("action vector dimension mismatch");
}

double sup(const Vec& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

} // namespace

double eval_h(const IntegrableSpec& spec, const Vec& I) {
    require_dim(spec, I);
    double acc = 0;
    for (int i = 0; i < spec.dim(); ++i) acc += spec.omega0[i] * I[i] + 0.5 * spec.weight(i) * I[i] * I[i];
    return acc;
}

Vec grad_h(const IntegrableSpec& spec, const Vec& I) {
    require_dim(spec, I);
    Vec g(I.size());
    for (int i = 0; i < spec.dim(); ++i) g[i] = spec.omega0[i] + spec.weight(i) * I[i];
    return g;
}

Mat hess_h(const IntegrableSpec& spec, const Vec& I) {
    require_dim(spec, I);
    Mat h(I.size(), Vec(I.size(), 0.0));
    for (int i = 0; i < spec.dim(); ++i) h[i][i] = spec.weight(i);
    return h;
}

Vec jacobi_eigenvalues(Mat a) {
    const std::size_t n = a.size();
    if (n == 0) return {};
    for (const Vec& row : a)
        if (row.size() != n) throw std::domain_error("jacobi_eigenvalues: matrix must be square");

    double scale = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::fabs(a[i][j]));
    if (scale == 0) return Vec(n, 0.0);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
        if (std::sqrt(off) <= 1e-15 * scale * static_cast<double>(n)) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
    }
    Vec eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a[i][i];
    std::sort(eig.begin(), eig.end());
    return eig;
}

double qc_margin(const Vec& grad, const Mat& hess) {
    const std::size_t n = grad.size();
    if (n < 2) throw std::domain_error("qc_margin: dimension must be >= 2");
    const double gnorm = sup(grad);
    if (gnorm == 0) throw std::domain_error("qc_margin: vanishing gradient");

    // Orthonormal basis of grad-perp: Gram-Schmidt over the canonical
    // vectors, skipping the index where |grad| peaks.
    std::size_t skip = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (std::fabs(grad[i]) > std::fabs(grad[skip])) skip = i;

    std::vector<Vec> basis;
    Vec unit(n);
    double g2 = 0;
    for (double x : grad) g2 += x * x;
    const double glen = std::sqrt(g2);
    for (std::size_t i = 0; i < n; ++i) unit[i] = grad[i] / glen;

    for (std::size_t c = 0; c < n && basis.size() + 1 < n; ++c) {
        if (c == skip) continue;
        Vec v(n, 0.0);
        v[c] = 1.0;
        double d = 0;
        for (std::size_t i = 0; i < n; ++i) d += v[i] * unit[i];
        for (std::size_t i = 0; i < n; ++i) v[i] -= d * unit[i];
        for (const Vec& b : basis) {
            double e = 0;
            for (std::size_t i = 0; i < n; ++i) e += v[i] * b[i];
            for (std::size_t i = 0; i < n; ++i) v[i] -= e * b[i];
        }
        double len2 = 0;
        for (double x : v) len2 += x * x;
        const double len = std::sqrt(len2);
        if (len < 1e-12) continue;
        for (double& x : v) x /= len;
        basis.push_back(std::move(v));
    }
    if (basis.size() + 1 != n) throw std::domain_error("qc_margin: failed to build orthogonal complement");

    const std::size_t r = basis.size();
    Mat proj(r, Vec(r, 0.0));
    for (std::size_t a = 0; a < r; ++a) {
        Vec hb(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) hb[i] += hess[i][j] * basis[a][j];
        for (std::size_t b = 0; b < r; ++b) {
            double d = 0;
            for (std::size_t i = 0; i < n; ++i) d += basis[b][i] * hb[i];
            proj[b][a] = d;
        }
    }
    // Symmetrize away round-off before the eigen-solve.
    for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = a + 1; b < r; ++b) {
            const double avg = 0.5 * (proj[a][b] + proj[b][a]);
            proj[a][b] = proj[b][a] = avg;
        }
    return jacobi_eigenvalues(std::move(proj)).front();
}

QcReport check_qc(const IntegrableSpec& spec, const Vec& I, double m) {
    const Vec g = grad_h(spec, I);
    if (sup(g) == 0) throw std::domain_error("check_qc: vanishing gradient");
    const double margin = qc_margin(g, hess_h(spec, I));
    // Round-off slack so the boundary case margin == m passes.
    return {margin >= m - 1e-9 * std::max(1.0, std::fabs(m)), margin};
}

bool check_derivative_bound(const IntegrableSpec& spec, const std::vector<Vec>& grid, double M) {
    if (grid.empty()) throw std::domain_error("check_derivative_bound: empty grid");
    for (const Vec& I : grid) {
        require_dim(spec, I);
        for (int i = 0; i < spec.dim(); ++i) {
            if (std::fabs(spec.omega0[i] + spec.weight(i) * I[i]) > M) return false; // order 1
            if (std::fabs(spec.weight(i)) > M) return false;                         // order 2; order 3 is zero
        }
    }
    return true;
}

bool WeightPoly::is_constant() const {
    auto allzero = [](const Vec& v) {
        for (double x : v)
            if (x != 0) return false;
        return true;
    };
    return allzero(lin) && allzero(quad);
}

double WeightPoly::eval(const Vec& I) const {
    double w = c0;
    for (std::size_t i = 0; i < lin.size(); ++i) w += lin[i] * I[i];
    for (std::size_t i = 0; i < quad.size(); ++i) w += quad[i] * I[i] * I[i];
    return w;
}

Vec WeightPoly::grad(const Vec& I) const {
    Vec g(I.size(), 0.0);
    for (std::size_t i = 0; i < lin.size(); ++i) g[i] += lin[i];
    for (std::size_t i = 0; i < quad.size(); ++i) g[i] += 2 * quad[i] * I[i];
    return g;
}

double eval_f(const TrigPerturbation& pert, const Vec& theta, const Vec& I) {
    double acc = 0;
    for (const TrigTerm& t : pert.terms) {
        double phase = t.phase;
        for (std::size_t i = 0; i < t.k.size(); ++i) phase += static_cast<double>(t.k[i]) * theta[i];
        acc += t.amplitude * t.weight.eval(I) * std::cos(two_pi * phase);
    }
    return acc;
}

Vec grad_f_theta(const TrigPerturbation& pert, const Vec& theta, const Vec& I) {
    Vec g(theta.size(), 0.0);
    for (const TrigTerm& t : pert.terms) {
        double phase = t.phase;
        for (std::size_t i = 0; i < t.k.size(); ++i) phase += static_cast<double>(t.k[i]) * theta[i];
        const double coeff = -two_pi * t.amplitude * t.weight.eval(I) * std::sin(two_pi * phase);
        for (std::size_t i = 0; i < t.k.size(); ++i) g[i] += coeff * static_cast<double>(t.k[i]);
    }
    return g;
}

Vec grad_f_I(const TrigPerturbation& pert, const Vec& theta, const Vec& I) {
    Vec g(I.size(), 0.0);
    for (const TrigTerm& t : pert.terms) {
        if (t.weight.is_constant()) continue;
        double phase = t.phase;
        for (std::size_t i = 0; i < t.k.size(); ++i) phase += static_cast<double>(t.k[i]) * theta[i];
        const double coeff = t.amplitude * std::cos(two_pi * phase);
        const Vec wg = t.weight.grad(I);
        for (std::size_t i = 0; i < I.size(); ++i) g[i] += coeff * wg[i];
    }
    return g;
}

namespace {

// S(x) = sum_j L^j (j!)^-alpha x^j, as an upper bound.
double gevrey_factor(double x, double alpha, double L) {
    if (x == 0) return 1.0;
    if (alpha == 1.0) return std::exp(L * x);
    double term = 1.0, acc = 1.0;
    for (int j = 1; j < 100000; ++j) {
        term *= L * x / std::pow(static_cast<double>(j), alpha);
        acc += term;
        const double ratio = L * x / std::pow(static_cast<double>(j + 1), alpha);
        if (ratio < 0.5 && term < 1e-17 * acc) {
            acc += term * ratio / (1 - ratio); // geometric tail cap
            return acc;
        }
    }
    throw std::domain_error("gevrey_norm_bound: series failed to converge");
}

double weight_gevrey_factor(const WeightPoly& w, double alpha, double L, double R) {
    double w_sup = std::fabs(w.c0);
    for (double x : w.lin) w_sup += std::fabs(x) * R;
    for (double x : w.quad) w_sup += std::fabs(x) * R * R;
    double d1 = 0;
    for (std::size_t i = 0; i < w.lin.size() || i < w.quad.size(); ++i) {
        const double li = i < w.lin.size() ? std::fabs(w.lin[i]) : 0.0;
        const double qi = i < w.quad.size() ? std::fabs(w.quad[i]) : 0.0;
        d1 += li + 2 * qi * R;
    }
    double d2 = 0;
    for (double x : w.quad) d2 += 2 * std::fabs(x);
    return w_sup + L * d1 + L * L * std::pow(2.0, -alpha) * d2;
}

} // namespace

double gevrey_norm_bound(const TrigPerturbation& pert, double alpha, double L, double R) {
    if (!(alpha >= 1.0)) throw std::domain_error("gevrey_norm_bound: alpha must be >= 1");
    if (!(L > 0.0)) throw std::domain_error("gevrey_norm_bound: L must be positive");
    double acc = 0;
    for (const TrigTerm& t : pert.terms) {
        double prod = std::fabs(t.amplitude) * weight_gevrey_factor(t.weight, alpha, L, R);
        for (long long ki : t.k) prod *= gevrey_factor(two_pi * static_cast<double>(std::llabs(ki)), alpha, L);
        acc += prod;
    }
    return acc;
}

double sup_bound(const TrigPerturbation& pert, double R) {
    double acc = 0;
    for (const TrigTerm& t : pert.terms) {
        double w_sup = std::fabs(t.weight.c0);
        for (double x : t.weight.lin) w_sup += std::fabs(x) * R;
        for (double x : t.weight.quad) w_sup += std::fabs(x) * R * R;
        acc += std::fabs(t.amplitude) * w_sup;
    }
    return acc;
}

void SystemSpec::validate() const {
    if (n < 2) throw std::domain_error("SystemSpec: dimension must be >= 2");
    if (!(R > 0)) throw std::domain_error("SystemSpec: domain radius must be positive");
    if (!(epsilon >= 0)) throw std::domain_error("SystemSpec: epsilon must be nonnegative");
    if (!(m > 0)) throw std::domain_error("SystemSpec: quasi-convexity constant m must be positive");
    if (!(M >= m)) throw std::domain_error("SystemSpec: derivative bound M must be >= m");
    if (integrable.dim() != n) throw std::domain_error("SystemSpec: integrable part dimension mismatch");
    if (integrable.id == CatalogId::anisotropic_convex) {
        if (static_cast<int>(integrable.weights.size()) != n)
            throw std::domain_error("SystemSpec: weight vector dimension mismatch");
        for (double w : integrable.weights)
            if (!(w > 0)) throw std::domain_error("SystemSpec: anisotropic weights must be positive");
    }
    // grad h vanishes only at I*_i = -Omega_i / w_i; keep that point outside
    // the closed ball so QC's nonvanishing-gradient hypothesis holds.
    double star = 0;
    bool omega_zero = true;
    for (int i = 0; i < n; ++i) {
        star = std::max(star, std::fabs(integrable.omega0[i]) / integrable.weight(i));
        omega_zero &= integrable.omega0[i] == 0;
    }
    if (omega_zero) throw std::domain_error("SystemSpec: frequency shift Omega must be nonzero");
    if (star <= R) throw std::domain_error("SystemSpec: grad h vanishes inside B(0,R); enlarge Omega or shrink R");
    if (gevrey) {
        if (!(gevrey->alpha >= 1.0)) throw std::domain_error("SystemSpec: gevrey alpha must be >= 1");
        if (!(gevrey->L > 0.0)) throw std::domain_error("SystemSpec: gevrey L must be positive");
    }
    for (const TrigTerm& t : perturbation.terms) {
        if (static_cast<int>(t.k.size()) != n) throw std::domain_error("SystemSpec: perturbation wavevector dimension mismatch");
        if (!(t.phase >= 0.0 && t.phase < 1.0)) throw std::domain_error("SystemSpec: phase must lie in [0,1)");
        if (!t.weight.lin.empty() && static_cast<int>(t.weight.lin.size()) != n)
            throw std::domain_error("SystemSpec: weight linear part dimension mismatch");
        if (!t.weight.quad.empty() && static_cast<int>(t.weight.quad.size()) != n)
            throw std::domain_error("SystemSpec: weight quadratic part dimension mismatch");
    }
}

std::pair<double, Vec> psi_h(const IntegrableSpec& spec, const IsoEnergeticPoint& p) {
    if (!(p.lambda > 0)) throw std::domain_error("psi_h: lambda must be positive");
    Vec omega = grad_h(spec, p.I);
    if (sup(omega) == 0) throw std::domain_error("psi_h: vanishing gradient");
    Vec scaled(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i) scaled[i] = p.lambda * omega[i];
    return {eval_h(spec, p.I), scaled};
}

Mat assemble_psi_jacobian(const Vec& omega, const Mat& hess, double lambda) {
    const std::size_t n = omega.size();
    Mat j(n + 1, Vec(n + 1, 0.0));
    for (std::size_t c = 0; c < n; ++c) j[0][c] = omega[c];
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) j[r + 1][c] = lambda * hess[r][c];
        j[r + 1][n] = omega[r];
    }
    return j;
}

PsiJacobian jacobian_psi(const IntegrableSpec& spec, const IsoEnergeticPoint& p) {
    if (!(p.lambda > 0)) throw std::domain_error("jacobian_psi: lambda must be positive");
    const Vec omega = grad_h(spec, p.I);
    if (sup(omega) == 0) throw std::domain_error("jacobian_psi: vanishing gradient");
    Mat jac = assemble_psi_jacobian(omega, hess_h(spec, p.I), p.lambda);

    // Nonsingularity by partially pivoted elimination with a relative cutoff.
    Mat w = jac;
    const std::size_t n = w.size();
    double scale = 0;
    for (const Vec& row : w)
        for (double x : row) scale = std::max(scale, std::fabs(x));
    const double cutoff = 1e-12 * scale * static_cast<double>(n);
    bool nonsingular = true;
    for (std::size_t t = 0; t < n && nonsingular; ++t) {
        std::size_t piv = t;
        for (std::size_t i = t + 1; i < n; ++i)
            if (std::fabs(w[i][t]) > std::fabs(w[piv][t])) piv = i;
        if (std::fabs(w[piv][t]) <= cutoff) {
            nonsingular = false;
            break;
        }
        std::swap(w[t], w[piv]);
        for (std::size_t i = t + 1; i < n; ++i) {
            const double f = w[i][t] / w[t][t];
            for (std::size_t c = t; c < n; ++c) w[i][c] -= f * w[t][c];
        }
    }
    return {std::move(jac), nonsingular};
}

} // namespace nekstab::ham
