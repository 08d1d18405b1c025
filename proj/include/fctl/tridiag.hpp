#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace fctl {

/// Symmetric tridiagonal matrix stored by diagonals.
struct Tridiag {
    std::vector<double> diag;  // size d
    std::vector<double> off;   // size d-1, sub- and super-diagonal

    std::size_t size() const { return diag.size(); }

    void matvec(std::span<const double> x, std::span<double> y) const {
        std::size_t d = size();
        for (std::size_t i = 0; i < d; ++i) {
            double s = diag[i] * x[i];
            if (i > 0) s += off[i - 1] * x[i - 1];
            if (i + 1 < d) s += off[i] * x[i + 1];
            y[i] = s;
        }
    }

    double quad_form(std::span<const double> x) const {
        std::size_t d = size();
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            s += diag[i] * x[i] * x[i];
            if (i + 1 < d) s += 2.0 * off[i] * x[i] * x[i + 1];
        }
        return s;
    }

    double bilinear(std::span<const double> x, std::span<const double> y) const {
        std::size_t d = size();
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            double row = diag[i] * y[i];
            if (i > 0) row += off[i - 1] * y[i - 1];
            if (i + 1 < d) row += off[i] * y[i + 1];
            s += x[i] * row;
        }
        return s;
    }
};

/// Cholesky factor L (lower bidiagonal, A = L Lᵀ) of an SPD tridiagonal matrix.
class TridiagCholesky {
  public:
    TridiagCholesky() = default;

    explicit TridiagCholesky(const Tridiag& a) { factor(a); }

    void factor(const Tridiag& a) {
        std::size_t d = a.size();
        d_.assign(d, 0.0);
        e_.assign(d > 0 ? d - 1 : 0, 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            double v = a.diag[i];
            if (i > 0) v -= e_[i - 1] * e_[i - 1];
            if (v <= 0.0) throw std::invalid_argument("tridiagonal matrix not positive definite");
            d_[i] = std::sqrt(v);
            if (i + 1 < d) e_[i] = a.off[i] / d_[i];
        }
    }

    std::size_t size() const { return d_.size(); }

    /// x <- A⁻¹ x via forward then backward substitution.
    void solve(std::span<double> x) const {
        std::size_t d = size();
        for (std::size_t i = 0; i < d; ++i) {
            double v = x[i];
            if (i > 0) v -= e_[i - 1] * x[i - 1];
            x[i] = v / d_[i];
        }
        for (std::size_t i = d; i-- > 0;) {
            double v = x[i];
            if (i + 1 < d) v -= e_[i] * x[i + 1];
            x[i] = v / d_[i];
        }
    }

    /// x <- L x. Applied to iid standard Gaussians this yields N(0, A) draws.
    void mult_lower(std::span<double> x) const {
        std::size_t d = size();
        for (std::size_t i = d; i-- > 0;) {
            double v = d_[i] * x[i];
            if (i > 0) v += e_[i - 1] * x[i - 1];
            x[i] = v;
        }
    }

  private:
    std::vector<double> d_;
    std::vector<double> e_;
};

}  // namespace fctl
