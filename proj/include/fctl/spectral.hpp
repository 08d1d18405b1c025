#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "fctl/common.hpp"
#include "fctl/field.hpp"

namespace fctl {

/// Neumann cosine basis on (0, L):
///   e_0 = sqrt(1/L),  e_k = sqrt(2/L) cos(k pi x / L),  -e_k'' = lambda_k e_k,
///   lambda_k = (k pi / L)^2.
///
/// Nonlinearities are evaluated pseudo-spectrally on a uniform collocation
/// grid with Q = 2(n+1) trapezoid intervals. The composite trapezoid rule on
/// Q intervals integrates cos(m pi x / L) exactly for 1 <= m <= 2Q-1, so the
/// discrete mass matrix of e_0..e_n is exactly the identity: reduce() after
/// synth() is the identity map and quadrature projection is idempotent up to
/// roundoff.
class SpectralBasis {
  public:
    static constexpr BasisKind kind = BasisKind::Spectral;

    SpectralBasis(double length, int n) : L_(length), n_(n) {
        if (!(length > 0.0)) throw std::invalid_argument("spectral basis: length must be positive");
        if (n < 1) throw std::invalid_argument("spectral basis: need highest mode >= 1");
        std::size_t d = dim();
        lambda_.resize(d);
        for (std::size_t k = 0; k < d; ++k) {
            double w = static_cast<double>(k) * kPi / L_;
            lambda_[k] = w * w;
        }
        std::size_t q = 2 * d;  // trapezoid interval count
        qx_.resize(q + 1);
        qw_.resize(q + 1);
        double h = L_ / static_cast<double>(q);
        for (std::size_t i = 0; i <= q; ++i) {
            qx_[i] = h * static_cast<double>(i);
            qw_[i] = (i == 0 || i == q) ? 0.5 * h : h;
        }
        synth_.resize((q + 1) * d);
        for (std::size_t i = 0; i <= q; ++i)
            for (std::size_t k = 0; k < d; ++k) synth_[i * d + k] = mode(static_cast<int>(k), qx_[i]);
    }

    int modes() const { return n_; }
    std::size_t dim() const { return static_cast<std::size_t>(n_) + 1; }
    double length() const { return L_; }

    std::span<const double> eigenvalues() const { return lambda_; }
    std::span<const double> collocation() const { return qx_; }
    std::span<const double> quad_weights() const { return qw_; }

    /// Basis function e_k evaluated at x.
    double mode(int k, double x) const {
        if (k == 0) return std::sqrt(1.0 / L_);
        return std::sqrt(2.0 / L_) * std::cos(static_cast<double>(k) * kPi * x / L_);
    }

    /// values_i = sum_k coeffs_k e_k(x_i) on the collocation grid.
    void synth(std::span<const double> coeffs, std::span<double> values) const {
        std::size_t d = dim();
        for (std::size_t i = 0; i < qx_.size(); ++i) {
            const double* row = synth_.data() + i * d;
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += row[k] * coeffs[k];
            values[i] = s;
        }
    }

    /// coeffs_k = sum_i w_i values_i e_k(x_i): trapezoid approximation of
    /// the L2 inner products against the basis.
    void reduce(std::span<const double> values, std::span<double> coeffs) const {
        std::size_t d = dim();
        for (std::size_t k = 0; k < d; ++k) coeffs[k] = 0.0;
        for (std::size_t i = 0; i < qx_.size(); ++i) {
            const double* row = synth_.data() + i * d;
            double wv = qw_[i] * values[i];
            for (std::size_t k = 0; k < d; ++k) coeffs[k] += wv * row[k];
        }
    }

    /// In-place multiply by (I + dt Lambda)^{-1}, the implicit diffusion step.
    void resolvent_solve(std::span<double> coeffs, double dt) const {
        for (std::size_t k = 0; k < dim(); ++k) coeffs[k] /= 1.0 + dt * lambda_[k];
    }

    double integrate(std::span<const double> values) const {
        double s = 0.0;
        for (std::size_t i = 0; i < qx_.size(); ++i) s += qw_[i] * values[i];
        return s;
    }

    double l2_inner(std::span<const double> a, std::span<const double> b) const { return dot(a, b); }
    double l2_norm_sq(std::span<const double> a) const { return norm2_sq(a); }

    double eval_at(std::span<const double> coeffs, double x) const {
        double s = 0.0;
        for (std::size_t k = 0; k < dim(); ++k) s += coeffs[k] * mode(static_cast<int>(k), x);
        return s;
    }

  private:
    double L_;
    int n_;
    std::vector<double> lambda_;
    std::vector<double> qx_;
    std::vector<double> qw_;
    std::vector<double> synth_;  // (Q+1) x (n+1), row-major
};

inline SpectralBasis spectral_basis(double length, int n) { return SpectralBasis(length, n); }

/// Quadrature L2 projection of point samples taken on the basis's own
/// collocation grid.
inline Field project_spectral(std::span<const double> samples, const SpectralBasis& basis) {
    if (samples.size() != basis.collocation().size())
        throw std::invalid_argument("project_spectral: samples must match the collocation grid");
    Field f;
    f.kind = BasisKind::Spectral;
    f.c.resize(basis.dim());
    basis.reduce(samples, f.c);
    return f;
}

/// Exact projection coefficients of the indicator of [a, b] in (0, L):
///   <1_[a,b], e_0> = (b-a)/sqrt(L),
///   <1_[a,b], e_k> = sqrt(2/L) (L/(k pi)) (sin(k pi b / L) - sin(k pi a / L)).
inline Field project_indicator_spectral(double a, double b, const SpectralBasis& basis) {
    double L = basis.length();
    if (!(0.0 <= a && a <= b && b <= L))
        throw std::invalid_argument("project_indicator_spectral: need 0 <= a <= b <= L");
    Field f;
    f.kind = BasisKind::Spectral;
    f.c.resize(basis.dim());
    f.c[0] = (b - a) / std::sqrt(L);
    for (std::size_t k = 1; k < basis.dim(); ++k) {
        double w = static_cast<double>(k) * kPi / L;
        f.c[k] = std::sqrt(2.0 / L) / w * (std::sin(w * b) - std::sin(w * a));
    }
    return f;
}

inline std::vector<double> evaluate_field(const Field& f, std::span<const double> points,
                                          const SpectralBasis& basis) {
    if (f.kind != BasisKind::Spectral || f.size() != basis.dim())
        throw std::invalid_argument("evaluate_field: field does not match basis");
    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i] >= 0.0 && points[i] <= basis.length()))
            throw std::invalid_argument("evaluate_field: point outside [0, L]");
        out[i] = basis.eval_at(f.c, points[i]);
    }
    return out;
}

}  // namespace fctl
