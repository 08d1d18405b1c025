#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "fctl/ansatz.hpp"
#include "fctl/common.hpp"
#include "fctl/problem.hpp"
#include "fctl/trajectory.hpp"

namespace fctl {

inline constexpr double kBlowupNorm = 1e8;

/// Semi-implicit Euler-Maruyama sweep: diffusion implicit, reaction and
/// control explicit at the left endpoint.
///   spectral: u_{j+1,k} = [u_j + dt (F(u_j) + g_j) + sigma xi_j]_k / (1 + dt lambda_k)
///   FEM:      (M + dt K) u_{j+1} = M (u_j + dt (f(u_j) + g_j)) + sigma xi_j
template <class B>
Trajectory forward_solve(const ControlProblem<B>& pb, const FeedbackParams& fp,
                         const NoisePath& noise) {
    pb.validate();
    int N = pb.steps();
    std::size_t d = pb.basis.dim();
    if (noise.steps != N || noise.dim != static_cast<int>(d))
        throw std::invalid_argument("forward_solve: noise shape does not match problem");
    detail::check_eval_args(fp, 0.0, d);
    if (fp.shape.basis != B::kind)
        throw std::invalid_argument("forward_solve: feedback basis mismatch");

    Trajectory traj;
    traj.dt = pb.dt;
    traj.times.resize(N + 1);
    for (int j = 0; j <= N; ++j) traj.times[j] = pb.dt * j;
    traj.states.resize(N + 1);
    traj.controls.resize(N);
    traj.states[0] = pb.u0.c;

    std::vector<double> vals, fvals, fc(d);
    [[maybe_unused]] TridiagCholesky implicit;
    [[maybe_unused]] std::vector<double> tmp;
    if constexpr (B::kind == BasisKind::FemNodal) {
        implicit = pb.basis.implicit_factor(pb.dt);
        tmp.resize(d);
    }

    for (int j = 0; j < N; ++j) {
        const std::vector<double>& u = traj.states[j];
        std::vector<double>& g = traj.controls[j];
        g.resize(d);
        detail::eval_core(fp, traj.times[j], u, g);
        std::vector<double>& next = traj.states[j + 1];
        next.resize(d);
        std::span<const double> xi = noise.slice(j);
        if constexpr (B::kind == BasisKind::Spectral) {
            if (!pb.reaction.zero) {
                detail::point_values(pb.basis, u, vals);
                fvals.resize(vals.size());
                pb.reaction.value(vals, fvals);
                pb.basis.reduce(fvals, fc);
            }
            auto lambda = pb.basis.eigenvalues();
            for (std::size_t k = 0; k < d; ++k) {
                double drift = pb.reaction.zero ? g[k] : fc[k] + g[k];
                next[k] = (u[k] + pb.dt * drift + pb.sigma * xi[k]) / (1.0 + pb.dt * lambda[k]);
            }
        } else {
            fvals.resize(d);
            pb.reaction.value(u, fvals);
            for (std::size_t i = 0; i < d; ++i) tmp[i] = u[i] + pb.dt * (fvals[i] + g[i]);
            pb.basis.gram_mult(tmp, next);
            for (std::size_t i = 0; i < d; ++i) next[i] += pb.sigma * xi[i];
            implicit.solve(next);
        }
        if (!(norm2(next) <= kBlowupNorm)) throw DivergedError(j + 1);
    }
    return traj;
}

/// Cost of one realized path: left-endpoint rectangle rule over the running
/// cost plus the terminal term.
template <class B>
double pathwise_cost(const ControlProblem<B>& pb, const FeedbackParams& fp, const Trajectory& traj) {
    int N = pb.steps();
    std::size_t d = pb.basis.dim();
    if (traj.steps() != N) throw std::invalid_argument("pathwise_cost: trajectory length mismatch");
    bool cached = traj.controls.size() == static_cast<std::size_t>(N);
    std::vector<double> vals, l, lu, g(d);
    double cost = 0.0;
    for (int j = 0; j < N; ++j) {
        double t = traj.times[j];
        detail::point_values(pb.basis, traj.states[j], vals);
        l.resize(vals.size());
        lu.resize(vals.size());
        pb.running.eval(t, pb.basis.collocation(), vals, l, lu);
        double stage = pb.basis.integrate(l);
        if (pb.nu != 0.0) {
            std::span<const double> gj;
            if (cached) {
                gj = traj.controls[j];
            } else {
                detail::eval_core(fp, t, traj.states[j], g);
                gj = g;
            }
            stage += 0.5 * pb.nu * pb.basis.l2_norm_sq(gj);
        }
        cost += pb.dt * stage;
    }
    if (!pb.terminal.zero) {
        detail::point_values(pb.basis, traj.states[N], vals);
        l.resize(vals.size());
        lu.resize(vals.size());
        pb.terminal.eval(pb.basis.collocation(), vals, l, lu);
        cost += pb.basis.integrate(l);
    }
    return cost;
}

/// Deterministic uncontrolled solve (sigma = 0, G = 0) of the same dynamics;
/// the tracking problems use its path as the reference profile.
template <class B>
Trajectory reference_profile(const ControlProblem<B>& pb) {
    ControlProblem<B> det = pb;
    det.sigma = 0.0;
    det.reference = nullptr;
    det.running = zero_running_cost();
    det.terminal = zero_terminal_cost();
    FeedbackParams zero = make_zero_feedback(static_cast<int>(pb.basis.dim()), B::kind);
    NoisePath none = zero_noise(pb.steps(), pb.basis);
    return forward_solve(det, zero, none);
}

}  // namespace fctl
