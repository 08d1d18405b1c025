#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fctl/common.hpp"
#include "fctl/fem.hpp"
#include "fctl/field.hpp"
#include "fctl/rng.hpp"
#include "fctl/spectral.hpp"
#include "fctl/trajectory.hpp"

namespace fctl {

inline double nagumo_f(double u) { return -u * (u - 0.5) * (u - 1.0); }
inline double nagumo_fprime(double u) { return -3.0 * u * u + 3.0 * u - 0.5; }

/// (f(u), f'(u)) of the Nagumo drift.
inline std::pair<double, double> nagumo_reaction(double u) {
    return {nagumo_f(u), nagumo_fprime(u)};
}

/// Pointwise reaction f with derivative, applied to arrays of point values.
struct Reaction {
    std::string name;
    bool zero = false;
    std::function<void(std::span<const double>, std::span<double>)> value;
    std::function<void(std::span<const double>, std::span<double>)> deriv;
};

inline Reaction zero_reaction() {
    Reaction r;
    r.name = "zero";
    r.zero = true;
    r.value = [](std::span<const double> u, std::span<double> out) {
        for (std::size_t i = 0; i < u.size(); ++i) out[i] = 0.0;
    };
    r.deriv = r.value;
    return r;
}

inline Reaction nagumo_reaction_op() {
    Reaction r;
    r.name = "nagumo";
    r.value = [](std::span<const double> u, std::span<double> out) {
        for (std::size_t i = 0; i < u.size(); ++i) out[i] = nagumo_f(u[i]);
    };
    r.deriv = [](std::span<const double> u, std::span<double> out) {
        for (std::size_t i = 0; i < u.size(); ++i) out[i] = nagumo_fprime(u[i]);
    };
    return r;
}

/// Running cost density l(t, x, u) with its state derivative, evaluated on
/// point values. Both outputs are filled in one call.
struct RunningCost {
    std::string name;
    bool zero = false;
    std::function<void(double t, std::span<const double> x, std::span<const double> u,
                       std::span<double> l, std::span<double> lu)>
        eval;
};

struct TerminalCost {
    std::string name;
    bool zero = false;
    std::function<void(std::span<const double> x, std::span<const double> u, std::span<double> m,
                       std::span<double> mu)>
        eval;
};

inline RunningCost zero_running_cost() {
    RunningCost c;
    c.name = "zero";
    c.zero = true;
    c.eval = [](double, std::span<const double>, std::span<const double> u, std::span<double> l,
                std::span<double> lu) {
        for (std::size_t i = 0; i < u.size(); ++i) l[i] = lu[i] = 0.0;
    };
    return c;
}

inline TerminalCost zero_terminal_cost() {
    TerminalCost c;
    c.name = "zero";
    c.zero = true;
    c.eval = [](std::span<const double>, std::span<const double> u, std::span<double> m,
                std::span<double> mu) {
        for (std::size_t i = 0; i < u.size(); ++i) m[i] = mu[i] = 0.0;
    };
    return c;
}

/// l = u^2 / 2.
inline RunningCost quadratic_running_cost() {
    RunningCost c;
    c.name = "quadratic";
    c.eval = [](double, std::span<const double>, std::span<const double> u, std::span<double> l,
                std::span<double> lu) {
        for (std::size_t i = 0; i < u.size(); ++i) {
            l[i] = 0.5 * u[i] * u[i];
            lu[i] = u[i];
        }
    };
    return c;
}

/// m = u^2 / 2.
inline TerminalCost quadratic_terminal_cost() {
    TerminalCost c;
    c.name = "quadratic";
    c.eval = [](std::span<const double>, std::span<const double> u, std::span<double> m,
                std::span<double> mu) {
        for (std::size_t i = 0; i < u.size(); ++i) {
            m[i] = 0.5 * u[i] * u[i];
            mu[i] = u[i];
        }
    };
    return c;
}

/// l(t, x, u) = (u - u0_t(x))^2 against precomputed point values of the
/// reference path on the cost grid; the time index is recovered from t.
inline RunningCost tracking_running_cost(
    std::shared_ptr<const std::vector<std::vector<double>>> reference_values, double dt) {
    RunningCost c;
    c.name = "tracking";
    c.eval = [reference_values, dt](double t, std::span<const double>, std::span<const double> u,
                                    std::span<double> l, std::span<double> lu) {
        auto j = static_cast<std::size_t>(std::llround(t / dt));
        if (j >= reference_values->size())
            throw std::invalid_argument("tracking cost: time outside reference grid");
        const std::vector<double>& ref = (*reference_values)[j];
        for (std::size_t i = 0; i < u.size(); ++i) {
            double d = u[i] - ref[i];
            l[i] = d * d;
            lu[i] = 2.0 * d;
        }
    };
    return c;
}

/// m(x, u) = (u - u0_T(x))^2.
inline TerminalCost tracking_terminal_cost(std::shared_ptr<const std::vector<double>> reference_values) {
    TerminalCost c;
    c.name = "tracking";
    c.eval = [reference_values](std::span<const double>, std::span<const double> u,
                                std::span<double> m, std::span<double> mu) {
        const std::vector<double>& ref = *reference_values;
        for (std::size_t i = 0; i < u.size(); ++i) {
            double d = u[i] - ref[i];
            m[i] = d * d;
            mu[i] = 2.0 * d;
        }
    };
    return c;
}

/// Controlled reaction-diffusion problem on (0, L) with Neumann boundary:
///   du = [Laplace(u) + f(u) + g] dt + sigma dW,
///   J  = E[ integral of l + (nu/2) |g|^2 dt + terminal m ].
template <class B>
struct ControlProblem {
    B basis;
    double T = 0.0;
    double dt = 0.0;
    double sigma = 0.0;
    double nu = 0.0;
    Reaction reaction;
    RunningCost running;
    TerminalCost terminal;
    Field u0;
    std::shared_ptr<const Trajectory> reference;  // tracking problems only

    int steps() const { return static_cast<int>(std::llround(T / dt)); }

    void validate() const {
        if (!(T > 0.0)) throw std::invalid_argument("problem: T must be positive");
        if (!(dt > 0.0 && dt < T)) throw std::invalid_argument("problem: need 0 < dt < T");
        double ratio = T / dt;
        if (std::abs(ratio - std::llround(ratio)) > 1e-9 * ratio)
            throw std::invalid_argument("problem: T/dt must be an integer");
        if (nu < 0.0) throw std::invalid_argument("problem: nu must be nonnegative");
        if (sigma < 0.0) throw std::invalid_argument("problem: sigma must be nonnegative");
        if (u0.size() != basis.dim() || u0.kind != B::kind)
            throw std::invalid_argument("problem: u0 does not match basis");
        if (!all_finite(u0.c)) throw std::invalid_argument("problem: u0 not finite");
    }
};

/// Gaussian increments for one path: iid N(0, dt) per spectral mode, or
/// N(0, dt M) per FEM slice via the Cholesky factor of M.
template <class B>
NoisePath sample_noise(std::uint64_t seed, int steps, double dt, const B& basis) {
    if (steps < 1) throw std::invalid_argument("sample_noise: need steps >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("sample_noise: need dt > 0");
    NoisePath path;
    path.seed = seed;
    path.steps = steps;
    path.dim = static_cast<int>(basis.dim());
    path.increments.resize(static_cast<std::size_t>(steps) * basis.dim());
    GaussianStream rng(seed);
    double scale = std::sqrt(dt);
    for (double& z : path.increments) z = scale * rng.gaussian();
    if constexpr (B::kind == BasisKind::FemNodal) {
        for (int j = 0; j < steps; ++j) {
            std::span<double> slice(path.increments.data() + static_cast<std::size_t>(j) * basis.dim(),
                                    basis.dim());
            basis.correlate(slice);
        }
    }
    return path;
}

template <class B>
NoisePath zero_noise(int steps, const B& basis) {
    NoisePath path;
    path.steps = steps;
    path.dim = static_cast<int>(basis.dim());
    path.increments.assign(static_cast<std::size_t>(steps) * basis.dim(), 0.0);
    return path;
}

namespace detail {

/// Point values of a coefficient vector on the basis cost/collocation grid.
template <class B>
void point_values(const B& basis, std::span<const double> coeffs, std::vector<double>& values) {
    values.resize(basis.collocation().size());
    basis.synth(coeffs, values);
}

}  // namespace detail

/// Spatial cost integral at one time: integral of l(t, x, u) plus the control
/// penalty (nu/2)|g|^2 in L2, both via the basis quadrature.
template <class B>
double cost_integrand(const ControlProblem<B>& pb, double t, const Field& u, const Field& g) {
    if (u.kind != B::kind || g.kind != B::kind || u.size() != pb.basis.dim() ||
        g.size() != pb.basis.dim())
        throw std::invalid_argument("cost_integrand: field does not match problem basis");
    std::vector<double> vals;
    detail::point_values(pb.basis, u.c, vals);
    std::vector<double> l(vals.size()), lu(vals.size());
    pb.running.eval(t, pb.basis.collocation(), vals, l, lu);
    return pb.basis.integrate(l) + 0.5 * pb.nu * pb.basis.l2_norm_sq(g.c);
}

/// L2 gradients of the spatial cost integrals at one time: fields L', M' with
/// <L', v> = d/de integral l(u + e v) and likewise for the terminal cost.
template <class B>
std::pair<Field, Field> cost_gradients(const ControlProblem<B>& pb, double t, const Field& u) {
    if (u.kind != B::kind || u.size() != pb.basis.dim())
        throw std::invalid_argument("cost_gradients: field does not match problem basis");
    std::vector<double> vals;
    detail::point_values(pb.basis, u.c, vals);
    std::vector<double> l(vals.size()), lu(vals.size());
    std::vector<double> m(vals.size()), mu(vals.size());
    pb.running.eval(t, pb.basis.collocation(), vals, l, lu);
    pb.terminal.eval(pb.basis.collocation(), vals, m, mu);
    Field lgrad, mgrad;
    lgrad.kind = mgrad.kind = B::kind;
    lgrad.c.resize(pb.basis.dim());
    mgrad.c.resize(pb.basis.dim());
    if constexpr (B::kind == BasisKind::Spectral) {
        pb.basis.reduce(lu, lgrad.c);
        pb.basis.reduce(mu, mgrad.c);
    } else {
        // Lumped-quadrature functional: L2 representer is M^{-1}(w . lu).
        auto w = pb.basis.quad_weights();
        for (std::size_t i = 0; i < w.size(); ++i) {
            lgrad.c[i] = w[i] * lu[i];
            mgrad.c[i] = w[i] * mu[i];
        }
        pb.basis.gram_solve(lgrad.c);
        pb.basis.gram_solve(mgrad.c);
    }
    return {std::move(lgrad), std::move(mgrad)};
}

}  // namespace fctl
