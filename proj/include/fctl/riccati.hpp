#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "fctl/common.hpp"
#include "fctl/field.hpp"
#include "fctl/riccati_gains.hpp"
#include "fctl/spectral.hpp"

namespace fctl {

/// Exact solution of p' = 1 + 2 lambda p - p^2 backward from p(T) = -1,
/// via the substitution p = lambda - mu w, mu = sqrt(lambda^2 + 1), which
/// turns the flow into w' = -mu (1 - w^2) with w > 1 (coth branch). Used as
/// the oracle for the grid solver below.
inline double riccati_mode_exact(double lambda, double t_to_go) {
    if (t_to_go < 0.0) throw std::invalid_argument("riccati_mode_exact: negative time to go");
    double mu = std::sqrt(lambda * lambda + 1.0);
    double w0 = (lambda + 1.0) / mu;  // w at the terminal time; w0 >= 1
    if (w0 <= 1.0 + 1e-15) return -1.0;  // lambda = 0: stationary at -1
    // acoth(w0) = atanh(1/w0)
    double arg = mu * t_to_go + std::atanh(1.0 / w0);
    // coth saturates to 1 quickly; avoid overflow in cosh/sinh.
    double w = arg > 20.0 ? 1.0 / std::tanh(arg) : std::cosh(arg) / std::sinh(arg);
    return lambda - mu * w;
}

/// Stationary root lambda - sqrt(lambda^2 + 1), the backward long-horizon
/// limit of the mode gain.
inline double riccati_stationary_root(double lambda) {
    return lambda - std::sqrt(lambda * lambda + 1.0);
}

namespace detail {

inline double riccati_rhs(double lambda, double p) { return 1.0 + 2.0 * lambda * p - p * p; }

}  // namespace detail

/// Backward classical RK4 integration of the decoupled per-mode Riccati ODEs
///   p_k' = 1 + 2 lambda_k p_k - p_k^2,  p_k(T) = -1,
/// tabulated on the dt grid so feedback lookup needs no interpolation.
///
/// Stiff modes (dt lambda_k >> 1) relax toward the stationary root much
/// faster than one grid step, where single-step RK4 is unstable; each grid
/// interval is therefore integrated with enough equal substeps to keep the
/// substep times the relaxation rate small. Once a mode reaches its fixed
/// point the remaining grid values are filled without further integration.
inline RiccatiGainTable riccati_solve(double L, int n, double T, double dt) {
    if (!(L > 0.0 && T > 0.0 && dt > 0.0 && n >= 0))
        throw std::invalid_argument("riccati_solve: parameters must be positive");
    double ratio = T / dt;
    auto N = static_cast<int>(std::llround(ratio));
    if (N < 1 || std::abs(ratio - N) > 1e-9 * ratio)
        throw std::invalid_argument("riccati_solve: T/dt must be a positive integer");

    RiccatiGainTable table;
    table.L = L;
    table.T = T;
    table.dt = dt;
    table.p.assign(n + 1, std::vector<double>(N + 1));
    for (int k = 0; k <= n; ++k) {
        double w = k * kPi / L;
        double lambda = w * w;
        double mu = std::sqrt(lambda * lambda + 1.0);
        // Relaxation rate of the linearized backward flow is ~2 mu.
        int substeps = std::max(1, static_cast<int>(std::ceil(dt * 2.0 * mu / 0.01)));
        substeps = std::min(substeps, 200000);
        double h = dt / substeps;
        std::vector<double>& pk = table.p[k];
        pk[N] = -1.0;
        double p = -1.0;
        bool settled = false;
        for (int j = N - 1; j >= 0; --j) {
            if (!settled) {
                double prev = p;
                for (int s = 0; s < substeps; ++s) {
                    // Backward step: dp/ds = -rhs with s = time to go.
                    double k1 = -detail::riccati_rhs(lambda, p);
                    double k2 = -detail::riccati_rhs(lambda, p + 0.5 * h * k1);
                    double k3 = -detail::riccati_rhs(lambda, p + 0.5 * h * k2);
                    double k4 = -detail::riccati_rhs(lambda, p + h * k3);
                    p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                }
                if (p == prev) settled = true;
            }
            pk[j] = p;
        }
    }
    return table;
}

/// Benchmark feedback g_k = p_k(t) u_k (spectral coefficients only).
inline Field riccati_feedback(const RiccatiGainTable& table, double t, const Field& u) {
    if (u.kind != BasisKind::Spectral)
        throw std::invalid_argument("riccati_feedback: spectral fields only");
    if (u.size() != static_cast<std::size_t>(table.modes()) + 1)
        throw std::invalid_argument("riccati_feedback: mode count mismatch");
    int j = riccati_time_index(table, t);
    Field g;
    g.kind = BasisKind::Spectral;
    g.c.resize(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) g.c[k] = table.p[k][j] * u.c[k];
    return g;
}

/// Expected cost of the discrete closed loop under the tabulated feedback,
/// computed exactly from the per-mode second-moment recursion:
///   E u_{j+1,k}^2 = a_j^2 E u_{j,k}^2 + (sigma sqrt(dt) / (1 + dt lambda_k))^2,
///   a_j = (1 + dt p_k(t_j)) / (1 + dt lambda_k),
/// accumulated with the same left-endpoint cost rule as pathwise_cost, so it
/// is the exact expectation of the Monte-Carlo estimator (quadratic costs,
/// Gaussian state).
inline double lq_optimal_cost(const RiccatiGainTable& table, const Field& u0, double sigma) {
    if (u0.kind != BasisKind::Spectral)
        throw std::invalid_argument("lq_optimal_cost: spectral fields only");
    if (u0.size() != static_cast<std::size_t>(table.modes()) + 1)
        throw std::invalid_argument("lq_optimal_cost: mode count mismatch");
    int N = table.steps();
    double dt = table.dt;
    double total = 0.0;
    for (std::size_t k = 0; k < u0.size(); ++k) {
        double w = static_cast<double>(k) * kPi / table.L;
        double lambda = w * w;
        double m2 = u0.c[k] * u0.c[k];
        double cost = 0.0;
        double noise_var = sigma * std::sqrt(dt) / (1.0 + dt * lambda);
        noise_var *= noise_var;
        for (int j = 0; j < N; ++j) {
            double g = table.p[k][j];
            cost += dt * 0.5 * (1.0 + g * g) * m2;
            double a = (1.0 + dt * g) / (1.0 + dt * lambda);
            m2 = a * a * m2 + noise_var;
        }
        cost += 0.5 * m2;
        total += cost;
    }
    return total;
}

/// Continuous-time value function of the benchmark problem,
///   V(0, u0) = -1/2 sum_k p_k(0) u0_k^2 - (sigma^2/2) sum_k integral p_k,
/// the dt -> 0 limit of lq_optimal_cost (time integral by trapezoid).
inline double lq_optimal_cost_continuous(const RiccatiGainTable& table, const Field& u0,
                                         double sigma) {
    if (u0.kind != BasisKind::Spectral)
        throw std::invalid_argument("lq_optimal_cost_continuous: spectral fields only");
    if (u0.size() != static_cast<std::size_t>(table.modes()) + 1)
        throw std::invalid_argument("lq_optimal_cost_continuous: mode count mismatch");
    int N = table.steps();
    double dt = table.dt;
    double total = 0.0;
    for (std::size_t k = 0; k < u0.size(); ++k) {
        const std::vector<double>& pk = table.p[k];
        total += -0.5 * pk[0] * u0.c[k] * u0.c[k];
        double integral = 0.0;
        for (int j = 0; j < N; ++j) integral += 0.5 * dt * (pk[j] + pk[j + 1]);
        total += -0.5 * sigma * sigma * integral;
    }
    return total;
}

}  // namespace fctl
