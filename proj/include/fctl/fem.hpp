#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fctl/common.hpp"
#include "fctl/field.hpp"
#include "fctl/tridiag.hpp"

namespace fctl {

/// Node layout of the uniform hat basis on (0, L) with n elements.
///
/// Corrected (default): nodes k L/n for k = 0..n, half-hats at both ends.
/// Constants are representable and every stiffness row sums to zero.
///
/// Truncated: nodes k L/n for k = 1..n only. There is no function peaking
/// at x = 0, so interpolants drop to zero over the first element and the
/// first stiffness row does not sum to zero. Kept selectable for comparison
/// runs; hats are normalized to unit height so coefficients remain nodal
/// values in either variant.
enum class FemVariant { Corrected, Truncated };

class FemBasis {
  public:
    static constexpr BasisKind kind = BasisKind::FemNodal;

    FemBasis(double length, int n, FemVariant variant = FemVariant::Corrected)
        : L_(length), n_(n), variant_(variant) {
        if (!(length > 0.0)) throw std::invalid_argument("fem basis: length must be positive");
        if (n < 2) throw std::invalid_argument("fem basis: need at least 2 elements");
        double h = L_ / n_;
        std::size_t d = dim();
        int first_node = (variant_ == FemVariant::Corrected) ? 0 : 1;
        nodes_.resize(d);
        for (std::size_t i = 0; i < d; ++i) nodes_[i] = h * static_cast<double>(first_node + static_cast<int>(i));

        mass_.diag.assign(d, 0.0);
        mass_.off.assign(d - 1, 0.0);
        stiff_.diag.assign(d, 0.0);
        stiff_.off.assign(d - 1, 0.0);
        for (int e = 0; e < n_; ++e) {
            // Global dof indices of the element's endpoint functions; -1 if absent.
            int left = e - first_node;
            int right = e + 1 - first_node;
            if (left >= 0) {
                mass_.diag[left] += h / 3.0;
                stiff_.diag[left] += 1.0 / h;
            }
            if (right < static_cast<int>(d)) {
                mass_.diag[right] += h / 3.0;
                stiff_.diag[right] += 1.0 / h;
            }
            if (left >= 0 && right < static_cast<int>(d)) {
                mass_.off[left] += h / 6.0;
                stiff_.off[left] += -1.0 / h;
            }
        }
        chol_m_.factor(mass_);

        quad_w_.assign(d, h);
        if (variant_ == FemVariant::Corrected) quad_w_.front() = 0.5 * h;
        quad_w_.back() = 0.5 * h;
    }

    int elements() const { return n_; }
    std::size_t dim() const {
        return static_cast<std::size_t>(n_) + (variant_ == FemVariant::Corrected ? 1 : 0);
    }
    double length() const { return L_; }
    double spacing() const { return L_ / n_; }
    FemVariant variant() const { return variant_; }

    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> collocation() const { return nodes_; }
    /// Integral of each hat function; also the weights of the exact integral
    /// of a nodal interpolant, matching the trapezoid rule on interior nodes.
    std::span<const double> quad_weights() const { return quad_w_; }

    const Tridiag& mass() const { return mass_; }
    const Tridiag& stiffness() const { return stiff_; }
    const TridiagCholesky& mass_chol() const { return chol_m_; }

    /// Factor of M + dt K, the implicit diffusion operator.
    TridiagCholesky implicit_factor(double dt) const {
        Tridiag c = mass_;
        for (std::size_t i = 0; i < c.diag.size(); ++i) c.diag[i] += dt * stiff_.diag[i];
        for (std::size_t i = 0; i < c.off.size(); ++i) c.off[i] += dt * stiff_.off[i];
        return TridiagCholesky(c);
    }

    void synth(std::span<const double> coeffs, std::span<double> values) const {
        std::copy(coeffs.begin(), coeffs.end(), values.begin());
    }
    void reduce(std::span<const double> values, std::span<double> coeffs) const {
        std::copy(values.begin(), values.end(), coeffs.begin());
    }

    void gram_mult(std::span<const double> x, std::span<double> y) const { mass_.matvec(x, y); }
    void gram_solve(std::span<double> x) const { chol_m_.solve(x); }

    /// iid Gaussians -> N(0, M) draw.
    void correlate(std::span<double> z) const { chol_m_.mult_lower(z); }

    double integrate(std::span<const double> values) const {
        double s = 0.0;
        for (std::size_t i = 0; i < dim(); ++i) s += quad_w_[i] * values[i];
        return s;
    }

    double l2_inner(std::span<const double> a, std::span<const double> b) const {
        return mass_.bilinear(a, b);
    }
    double l2_norm_sq(std::span<const double> a) const { return mass_.quad_form(a); }

    double eval_at(std::span<const double> coeffs, double x) const {
        if (x < 0.0 || x > L_) throw std::invalid_argument("eval_at: point outside domain");
        double h = spacing();
        int e = std::min(static_cast<int>(std::floor(x / h)), n_ - 1);
        int first_node = (variant_ == FemVariant::Corrected) ? 0 : 1;
        int left = e - first_node;
        int right = e + 1 - first_node;
        double s = (x - h * e) / h;
        double v = 0.0;
        if (left >= 0) v += coeffs[left] * (1.0 - s);
        if (right < static_cast<int>(dim())) v += coeffs[right] * s;
        return v;
    }

  private:
    double L_;
    int n_;
    FemVariant variant_;
    std::vector<double> nodes_;
    std::vector<double> quad_w_;
    Tridiag mass_;
    Tridiag stiff_;
    TridiagCholesky chol_m_;
};

inline FemBasis fem_assemble(double length, int n, FemVariant variant = FemVariant::Corrected) {
    return FemBasis(length, n, variant);
}

/// L2 projection of nodal samples: solves M c = M v, kept in the explicit
/// load-then-solve form so the contract matches function-based projection.
inline Field l2_project_fem(std::span<const double> values, const FemBasis& basis) {
    if (values.size() != basis.dim())
        throw std::invalid_argument("l2_project_fem: sample count must match node count");
    Field f;
    f.kind = BasisKind::FemNodal;
    f.c.resize(basis.dim());
    basis.mass().matvec(values, f.c);
    basis.mass_chol().solve(f.c);
    return f;
}

/// L2 projection of a function: per-element Gauss-Legendre load vector, then
/// a mass solve. Exact for polynomials up to degree 9 per element.
inline Field l2_project_fem_function(const std::function<double(double)>& u, const FemBasis& basis) {
    static constexpr double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                     0.5384693101056831, 0.9061798459386640};
    static constexpr double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                     0.4786286704993665, 0.2369268850561891};
    std::size_t d = basis.dim();
    int first_node = (basis.variant() == FemVariant::Corrected) ? 0 : 1;
    double h = basis.spacing();
    std::vector<double> b(d, 0.0);
    for (int e = 0; e < basis.elements(); ++e) {
        int left = e - first_node;
        int right = e + 1 - first_node;
        double x0 = h * e;
        for (int q = 0; q < 5; ++q) {
            double s = 0.5 * (gx[q] + 1.0);
            double x = x0 + h * s;
            double wu = 0.5 * h * gw[q] * u(x);
            if (left >= 0) b[left] += wu * (1.0 - s);
            if (right < static_cast<int>(d)) b[right] += wu * s;
        }
    }
    Field f;
    f.kind = BasisKind::FemNodal;
    f.c = std::move(b);
    basis.mass_chol().solve(f.c);
    return f;
}

/// L2 projection of the indicator of [a, b]: hat functions are linear per
/// element, so each load contribution is midpoint-exact on the clipped span.
inline Field l2_project_fem_indicator(double a, double b, const FemBasis& basis) {
    if (!(0.0 <= a && a <= b && b <= basis.length()))
        throw std::invalid_argument("l2_project_fem_indicator: need 0 <= a <= b <= L");
    std::size_t d = basis.dim();
    int first_node = (basis.variant() == FemVariant::Corrected) ? 0 : 1;
    double h = basis.spacing();
    std::vector<double> load(d, 0.0);
    for (int e = 0; e < basis.elements(); ++e) {
        double lo = std::max(a, h * e);
        double hi = std::min(b, h * (e + 1));
        if (hi <= lo) continue;
        double mid_s = (0.5 * (lo + hi) - h * e) / h;
        double len = hi - lo;
        int left = e - first_node;
        int right = e + 1 - first_node;
        if (left >= 0) load[left] += len * (1.0 - mid_s);
        if (right < static_cast<int>(d)) load[right] += len * mid_s;
    }
    Field f;
    f.kind = BasisKind::FemNodal;
    f.c = std::move(load);
    basis.mass_chol().solve(f.c);
    return f;
}

inline std::vector<double> evaluate_field(const Field& f, std::span<const double> points,
                                          const FemBasis& basis) {
    if (f.kind != BasisKind::FemNodal || f.size() != basis.dim())
        throw std::invalid_argument("evaluate_field: field does not match basis");
    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = basis.eval_at(f.c, points[i]);
    return out;
}

}  // namespace fctl
