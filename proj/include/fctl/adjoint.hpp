#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "fctl/ansatz.hpp"
#include "fctl/common.hpp"
#include "fctl/forward.hpp"
#include "fctl/problem.hpp"
#include "fctl/trajectory.hpp"

namespace fctl {

namespace detail {

/// Dual pairing vector of the running cost at (t, u): the vector s with
/// s . y = d/de [ quadrature of l(t, x, u + e y) ]. Spectral: projection of
/// the pointwise derivative; FEM: quadrature weights times nodal derivative.
template <class B>
void running_cost_dual(const ControlProblem<B>& pb, double t, std::span<const double> u,
                       std::vector<double>& scratch_vals, std::vector<double>& scratch_l,
                       std::vector<double>& scratch_lu, std::vector<double>& out) {
    point_values(pb.basis, u, scratch_vals);
    scratch_l.resize(scratch_vals.size());
    scratch_lu.resize(scratch_vals.size());
    pb.running.eval(t, pb.basis.collocation(), scratch_vals, scratch_l, scratch_lu);
    out.resize(pb.basis.dim());
    if constexpr (B::kind == BasisKind::Spectral) {
        pb.basis.reduce(scratch_lu, out);
    } else {
        auto w = pb.basis.quad_weights();
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = w[i] * scratch_lu[i];
    }
}

template <class B>
void terminal_cost_dual(const ControlProblem<B>& pb, std::span<const double> u,
                        std::vector<double>& scratch_vals, std::vector<double>& scratch_m,
                        std::vector<double>& scratch_mu, std::vector<double>& out) {
    point_values(pb.basis, u, scratch_vals);
    scratch_m.resize(scratch_vals.size());
    scratch_mu.resize(scratch_vals.size());
    pb.terminal.eval(pb.basis.collocation(), scratch_vals, scratch_m, scratch_mu);
    out.resize(pb.basis.dim());
    if constexpr (B::kind == BasisKind::Spectral) {
        pb.basis.reduce(scratch_mu, out);
    } else {
        auto w = pb.basis.quad_weights();
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = w[i] * scratch_mu[i];
    }
}

/// Reaction Jacobian transpose applied to a dual vector: spectral
/// S^T W diag(f'(Su)) S v (assembled through collocation), FEM diag(f'(u)) v.
template <class B>
void reaction_jacobian_dual(const ControlProblem<B>& pb, std::span<const double> u,
                            std::span<const double> v, std::vector<double>& scratch_vals,
                            std::vector<double>& scratch_f, std::vector<double>& scratch_vv,
                            std::vector<double>& out) {
    out.resize(pb.basis.dim());
    if (pb.reaction.zero) {
        for (double& x : out) x = 0.0;
        return;
    }
    if constexpr (B::kind == BasisKind::Spectral) {
        point_values(pb.basis, u, scratch_vals);
        scratch_f.resize(scratch_vals.size());
        pb.reaction.deriv(scratch_vals, scratch_f);
        scratch_vv.resize(scratch_vals.size());
        pb.basis.synth(v, scratch_vv);
        for (std::size_t i = 0; i < scratch_vv.size(); ++i) scratch_vv[i] *= scratch_f[i];
        pb.basis.reduce(scratch_vv, out);
    } else {
        scratch_f.resize(u.size());
        pb.reaction.deriv(u, scratch_f);
        for (std::size_t i = 0; i < u.size(); ++i) out[i] = scratch_f[i] * v[i];
    }
}

template <class B>
void check_adjoint_input(const ControlProblem<B>& pb, const Trajectory& traj) {
    if (traj.steps() != pb.steps())
        throw std::invalid_argument("adjoint: trajectory length mismatch");
    for (const auto& u : traj.states) {
        if (u.size() != pb.basis.dim())
            throw std::invalid_argument("adjoint: trajectory state size mismatch");
        if (!all_finite(u)) throw std::invalid_argument("adjoint: trajectory not finite");
    }
    if (traj.controls.size() != static_cast<std::size_t>(pb.steps()))
        throw std::invalid_argument("adjoint: trajectory is missing cached controls");
}

}  // namespace detail

/// Backward costate sweep along one frozen path. The recursion is the exact
/// transpose of the linearized forward scheme, so the assembled gradient is
/// the exact gradient of the discrete pathwise cost:
///   p_N = M'(u_N)
///   phat = resolvent(p_{j+1})            (spectral (1+dt A)^{-1}, FEM (M+dtK)^{-1} M)
///   p_j  = phat + dt [ F'(u_j) phat + Phi_u^* phat + L'(t_j, u_j)
///                      + nu Phi_u^* g_j ]     (all L2 representations)
/// With zero sources this reduces to repeated resolvent application, the
/// plain backward semi-implicit sweep.
template <class B>
AdjointTrajectory adjoint_solve(const ControlProblem<B>& pb, const FeedbackParams& fp,
                                const Trajectory& traj) {
    pb.validate();
    detail::check_adjoint_input(pb, traj);
    detail::check_eval_args(fp, 0.0, pb.basis.dim());
    int N = pb.steps();
    std::size_t d = pb.basis.dim();

    AdjointTrajectory adj;
    adj.dt = pb.dt;
    adj.costates.resize(N + 1);

    std::vector<double> vals, s1, s2, dual, phat(d), react, scratch;
    [[maybe_unused]] TridiagCholesky implicit;
    [[maybe_unused]] std::vector<double> mphat, mg;
    if constexpr (B::kind == BasisKind::FemNodal) {
        implicit = pb.basis.implicit_factor(pb.dt);
        mphat.resize(d);
        mg.resize(d);
    }

    detail::terminal_cost_dual(pb, traj.states[N], vals, s1, s2, adj.costates[N]);
    if constexpr (B::kind == BasisKind::FemNodal) pb.basis.gram_solve(adj.costates[N]);

    std::vector<double> vjp(d), vjp_g(d);
    for (int j = N - 1; j >= 0; --j) {
        double t = traj.times[j];
        const std::vector<double>& u = traj.states[j];
        const std::vector<double>& g = traj.controls[j];
        std::vector<double>& p = adj.costates[j];
        p.resize(d);

        if constexpr (B::kind == BasisKind::Spectral) {
            phat = adj.costates[j + 1];
            pb.basis.resolvent_solve(phat, pb.dt);
            detail::reaction_jacobian_dual(pb, u, phat, vals, s1, s2, react);
            detail::vjp_state_core(fp, t, u, phat, vjp);
            detail::running_cost_dual(pb, t, u, vals, s1, s2, dual);
            if (pb.nu != 0.0) {
                detail::vjp_state_core(fp, t, u, g, vjp_g);
            } else {
                for (double& x : vjp_g) x = 0.0;
            }
            for (std::size_t k = 0; k < d; ++k)
                p[k] = phat[k] + pb.dt * (react[k] + vjp[k] + dual[k] + pb.nu * vjp_g[k]);
        } else {
            // phat = (M+dtK)^{-1} M p_{j+1}; costates stored in primal (nodal) form.
            pb.basis.gram_mult(adj.costates[j + 1], phat);
            implicit.solve(phat);
            pb.basis.gram_mult(phat, mphat);
            detail::reaction_jacobian_dual(pb, u, mphat, vals, s1, s2, react);
            detail::vjp_state_core(fp, t, u, mphat, vjp);
            detail::running_cost_dual(pb, t, u, vals, s1, s2, dual);
            if (pb.nu != 0.0) {
                pb.basis.gram_mult(g, mg);
                detail::vjp_state_core(fp, t, u, mg, vjp_g);
            } else {
                for (double& x : vjp_g) x = 0.0;
            }
            for (std::size_t i = 0; i < d; ++i)
                p[i] = react[i] + vjp[i] + dual[i] + pb.nu * vjp_g[i];
            pb.basis.gram_solve(p);
            for (std::size_t i = 0; i < d; ++i) p[i] = phat[i] + pb.dt * p[i];
        }
    }
    return adj;
}

/// One path's gradient contribution: left-endpoint quadrature of the
/// parameter pairing against nu g_j + resolvent(p_{j+1}).
template <class B>
std::vector<double> pathwise_gradient(const ControlProblem<B>& pb, const FeedbackParams& fp,
                                      const Trajectory& traj, const AdjointTrajectory& adj) {
    detail::check_adjoint_input(pb, traj);
    int N = pb.steps();
    std::size_t d = pb.basis.dim();
    if (adj.costates.size() != static_cast<std::size_t>(N) + 1)
        throw std::invalid_argument("pathwise_gradient: costate length mismatch");

    std::vector<double> grad(fp.alpha.size(), 0.0);
    std::vector<double> step(fp.alpha.size());
    std::vector<double> phat(d), w(d);
    [[maybe_unused]] TridiagCholesky implicit;
    if constexpr (B::kind == BasisKind::FemNodal) implicit = pb.basis.implicit_factor(pb.dt);

    for (int j = 0; j < N; ++j) {
        double t = traj.times[j];
        if constexpr (B::kind == BasisKind::Spectral) {
            phat = adj.costates[j + 1];
            pb.basis.resolvent_solve(phat, pb.dt);
            for (std::size_t k = 0; k < d; ++k) w[k] = pb.nu * traj.controls[j][k] + phat[k];
        } else {
            pb.basis.gram_mult(adj.costates[j + 1], phat);
            implicit.solve(phat);
            for (std::size_t i = 0; i < d; ++i) w[i] = pb.nu * traj.controls[j][i] + phat[i];
            pb.basis.gram_mult(w, phat);
            std::swap(w, phat);
        }
        detail::vjp_params_core(fp, t, traj.states[j], w, step);
        axpy(pb.dt, step, grad);
    }
    return grad;
}

/// Pathwise directional derivative of the discrete cost along a parameter
/// direction, via the linearized state equation on the frozen path. Exact
/// chain rule of the discrete cost; test oracle for pathwise_gradient.
template <class B>
double forward_sensitivity(const ControlProblem<B>& pb, const FeedbackParams& fp,
                           const Trajectory& traj, std::span<const double> beta) {
    pb.validate();
    detail::check_adjoint_input(pb, traj);
    if (beta.size() != fp.alpha.size())
        throw std::invalid_argument("forward_sensitivity: direction length mismatch");
    int N = pb.steps();
    std::size_t d = pb.basis.dim();

    std::vector<double> y(d, 0.0), ynext(d), jv(d), jb(d), react(d);
    std::vector<double> vals, s1, s2, dual;
    [[maybe_unused]] TridiagCholesky implicit;
    [[maybe_unused]] std::vector<double> mg(d), tmp(d);
    if constexpr (B::kind == BasisKind::FemNodal) implicit = pb.basis.implicit_factor(pb.dt);

    double acc = 0.0;
    for (int j = 0; j < N; ++j) {
        double t = traj.times[j];
        const std::vector<double>& u = traj.states[j];
        const std::vector<double>& g = traj.controls[j];

        detail::running_cost_dual(pb, t, u, vals, s1, s2, dual);
        detail::jvp_state_core(fp, t, u, y, jv);
        detail::jvp_params_core(fp, t, u, beta, jb);
        if constexpr (B::kind == BasisKind::Spectral) {
            acc += pb.dt * dot(dual, y);
            if (pb.nu != 0.0)
                for (std::size_t k = 0; k < d; ++k) acc += pb.dt * pb.nu * g[k] * (jv[k] + jb[k]);
        } else {
            acc += pb.dt * dot(dual, y);
            if (pb.nu != 0.0) {
                pb.basis.gram_mult(g, mg);
                for (std::size_t i = 0; i < d; ++i) acc += pb.dt * pb.nu * mg[i] * (jv[i] + jb[i]);
            }
        }

        // y_{j+1} = resolvent(y_j + dt (F'(u_j) y_j + Phi_u y_j + Phi_alpha beta))
        if constexpr (B::kind == BasisKind::Spectral) {
            detail::reaction_jacobian_dual(pb, u, y, vals, s1, s2, react);
            for (std::size_t k = 0; k < d; ++k)
                ynext[k] = y[k] + pb.dt * (react[k] + jv[k] + jb[k]);
            pb.basis.resolvent_solve(ynext, pb.dt);
        } else {
            detail::reaction_jacobian_dual(pb, u, y, vals, s1, s2, react);
            for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + pb.dt * (react[i] + jv[i] + jb[i]);
            pb.basis.gram_mult(tmp, ynext);
            implicit.solve(ynext);
        }
        std::swap(y, ynext);
    }
    std::vector<double> mdual;
    detail::terminal_cost_dual(pb, traj.states[N], vals, s1, s2, mdual);
    acc += dot(mdual, y);
    return acc;
}

}  // namespace fctl
