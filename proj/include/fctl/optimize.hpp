#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fctl/adjoint.hpp"
#include "fctl/ansatz.hpp"
#include "fctl/common.hpp"
#include "fctl/forward.hpp"
#include "fctl/problem.hpp"

namespace fctl {

struct GradientEstimate {
    std::vector<double> mean;
    std::vector<double> std_error;  // per coordinate
    int samples = 0;
    int failures = 0;  // paths that diverged twice and were dropped
};

struct CostEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int samples = 0;
    int failures = 0;
};

struct TrainConfig {
    double step = 0.0;
    int batch = 1;
    int max_iters = 0;
    double rho = 0.0;       // stop when the estimated gradient norm drops below
    std::uint64_t seed = 0;
    double decay_tau = 0.0;  // 0 = constant step, else s / (1 + it / tau)
    int eval_batch = 0;      // 0 = use batch
    int snapshot_every = 0;  // 0 = no snapshots
    int jobs = 1;
    bool quiet = true;
};

struct TrainRecord {
    int iteration = 0;
    double cost = 0.0;
    double cost_std_error = 0.0;
    double grad_norm = 0.0;
    double step_size = 0.0;
    double wall_seconds = 0.0;
};

struct TrainResult {
    FeedbackParams params;
    std::vector<TrainRecord> history;
    std::vector<std::pair<int, FeedbackParams>> snapshots;
    std::string stop_reason;  // "rho", "max-iters", or "nonfinite-params"
    int iterations = 0;
};

/// Monte-Carlo estimate of the cost gradient at fixed parameters. Sample i of
/// iteration `iteration` uses seed derive_seed(master, iteration, i); a
/// diverged path is retried once on the retry stream, then dropped and
/// counted. Per-sample results land in preassigned slots, so the reduction is
/// bit-identical for any job count.
template <class B>
GradientEstimate mc_gradient(const ControlProblem<B>& pb, const FeedbackParams& fp, int batch,
                             std::uint64_t master_seed, int iteration, int jobs = 1) {
    if (batch < 1) throw std::invalid_argument("mc_gradient: batch must be >= 1");
    std::size_t dm = fp.alpha.size();
    std::vector<std::vector<double>> per_sample(batch);
    std::vector<char> ok(batch, 0);
    parallel_for(batch, jobs, [&](std::size_t i) {
        for (int attempt = 0; attempt < 2; ++attempt) {
            std::uint64_t stream = attempt == 0 ? kStreamTrain : kStreamRetry;
            std::uint64_t seed = derive_seed(master_seed, static_cast<std::uint64_t>(iteration), i, stream);
            try {
                NoisePath noise = sample_noise(seed, pb.steps(), pb.dt, pb.basis);
                Trajectory traj = forward_solve(pb, fp, noise);
                AdjointTrajectory adj = adjoint_solve(pb, fp, traj);
                per_sample[i] = pathwise_gradient(pb, fp, traj, adj);
                ok[i] = 1;
                return;
            } catch (const DivergedError&) {
                continue;
            }
        }
    });

    GradientEstimate est;
    est.mean.assign(dm, 0.0);
    est.std_error.assign(dm, 0.0);
    for (int i = 0; i < batch; ++i) {
        if (!ok[i]) {
            ++est.failures;
            continue;
        }
        ++est.samples;
        axpy(1.0, per_sample[i], est.mean);
    }
    if (est.samples == 0) throw DivergedError(-1);
    double inv = 1.0 / est.samples;
    for (double& v : est.mean) v *= inv;
    if (est.samples > 1) {
        for (int i = 0; i < batch; ++i) {
            if (!ok[i]) continue;
            for (std::size_t c = 0; c < dm; ++c) {
                double d = per_sample[i][c] - est.mean[c];
                est.std_error[c] += d * d;
            }
        }
        for (double& v : est.std_error)
            v = std::sqrt(v / (est.samples * (est.samples - 1.0)));
    }
    return est;
}

/// Forward-only Monte-Carlo estimate of the expected cost on a given seed
/// stream (kStreamEval for reporting, so evaluation never reuses training
/// noise).
template <class B>
CostEstimate mc_cost(const ControlProblem<B>& pb, const FeedbackParams& fp, int batch,
                     std::uint64_t master_seed, int iteration, std::uint64_t stream = kStreamEval,
                     int jobs = 1) {
    if (batch < 1) throw std::invalid_argument("mc_cost: batch must be >= 1");
    std::vector<double> costs(batch, 0.0);
    std::vector<char> ok(batch, 0);
    parallel_for(batch, jobs, [&](std::size_t i) {
        for (int attempt = 0; attempt < 2; ++attempt) {
            std::uint64_t sub = attempt == 0 ? stream : stream + 16;
            std::uint64_t seed = derive_seed(master_seed, static_cast<std::uint64_t>(iteration), i, sub);
            try {
                NoisePath noise = sample_noise(seed, pb.steps(), pb.dt, pb.basis);
                Trajectory traj = forward_solve(pb, fp, noise);
                costs[i] = pathwise_cost(pb, fp, traj);
                ok[i] = 1;
                return;
            } catch (const DivergedError&) {
                continue;
            }
        }
    });
    CostEstimate est;
    for (int i = 0; i < batch; ++i) {
        if (!ok[i]) {
            ++est.failures;
            continue;
        }
        ++est.samples;
        est.mean += costs[i];
    }
    if (est.samples == 0) throw DivergedError(-1);
    est.mean /= est.samples;
    if (est.samples > 1) {
        double ss = 0.0;
        for (int i = 0; i < batch; ++i) {
            if (!ok[i]) continue;
            double d = costs[i] - est.mean;
            ss += d * d;
        }
        est.std_error = std::sqrt(ss / (est.samples * (est.samples - 1.0)));
    }
    return est;
}

/// Plain SGD: alpha <- alpha - s_it grad, s_it = s / (1 + it / tau) when a
/// decay scale is set. Stops when the estimated gradient norm drops below rho
/// (checked before the update, so rho = inf returns the initial parameters
/// after zero updates) or after max_iters. Cost history is estimated on the
/// separate evaluation seed stream.
template <class B>
TrainResult sgd_train(const ControlProblem<B>& pb, FeedbackParams params, const TrainConfig& cfg) {
    if (!(cfg.step > 0.0) || cfg.batch < 1 || cfg.max_iters < 0 || !(cfg.rho > 0.0))
        throw std::invalid_argument("sgd_train: invalid config");
    TrainResult result;
    result.stop_reason = "max-iters";
    auto t0 = std::chrono::steady_clock::now();
    int eval_batch = cfg.eval_batch > 0 ? cfg.eval_batch : cfg.batch;
    for (int it = 0; it < cfg.max_iters; ++it) {
        GradientEstimate grad = mc_gradient(pb, params, cfg.batch, cfg.seed, it, cfg.jobs);
        CostEstimate cost = mc_cost(pb, params, eval_batch, cfg.seed, it, kStreamEval, cfg.jobs);
        double gn = norm2(grad.mean);
        double s_it = cfg.decay_tau > 0.0 ? cfg.step / (1.0 + it / cfg.decay_tau) : cfg.step;
        TrainRecord rec;
        rec.iteration = it;
        rec.cost = cost.mean;
        rec.cost_std_error = cost.std_error;
        rec.grad_norm = gn;
        rec.step_size = s_it;
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.history.push_back(rec);
        if (gn < cfg.rho) {
            result.stop_reason = "rho";
            result.iterations = it;
            result.params = std::move(params);
            return result;
        }
        axpy(-s_it, grad.mean, std::span<double>(params.alpha));
        if (!all_finite(params.alpha)) {
            result.stop_reason = "nonfinite-params";
            result.iterations = it + 1;
            result.snapshots.emplace_back(it + 1, params);
            result.params = std::move(params);
            return result;
        }
        if (cfg.snapshot_every > 0 && (it + 1) % cfg.snapshot_every == 0)
            result.snapshots.emplace_back(it + 1, params);
    }
    result.iterations = cfg.max_iters;
    result.params = std::move(params);
    return result;
}

struct GradCheckRow {
    double h = 0.0;
    double fd = 0.0;
    double abs_err = 0.0;
    double rel_err = 0.0;
};

struct GradCheckReport {
    double adjoint_dot = 0.0;        // <pathwise_gradient, direction>
    double sensitivity = 0.0;        // forward_sensitivity along direction
    double sensitivity_rel_err = 0.0;
    std::vector<GradCheckRow> rows;  // central differences over the h range
    double best_rel_err = 1.0;
    bool pass = false;
};

/// Compares the adjoint direction derivative against the linearized-equation
/// sensitivity and common-random-number central differences on one frozen
/// path.
template <class B>
GradCheckReport grad_check(const ControlProblem<B>& pb, const FeedbackParams& fp,
                           std::span<const double> direction, std::span<const double> h_values,
                           std::uint64_t seed, double tol_sensitivity = 1e-8,
                           double tol_fd = 1e-6) {
    if (direction.size() != fp.alpha.size())
        throw std::invalid_argument("grad_check: direction length mismatch");
    NoisePath noise = sample_noise(seed, pb.steps(), pb.dt, pb.basis);
    Trajectory traj = forward_solve(pb, fp, noise);
    AdjointTrajectory adj = adjoint_solve(pb, fp, traj);
    std::vector<double> grad = pathwise_gradient(pb, fp, traj, adj);

    GradCheckReport report;
    report.adjoint_dot = dot(grad, direction);
    report.sensitivity = forward_sensitivity(pb, fp, traj, direction);
    double scale = std::max(std::abs(report.sensitivity), 1e-14);
    report.sensitivity_rel_err = std::abs(report.adjoint_dot - report.sensitivity) / scale;

    for (double h : h_values) {
        FeedbackParams plus = fp, minus = fp;
        axpy(h, direction, std::span<double>(plus.alpha));
        axpy(-h, direction, std::span<double>(minus.alpha));
        double jp = pathwise_cost(pb, plus, forward_solve(pb, plus, noise));
        double jm = pathwise_cost(pb, minus, forward_solve(pb, minus, noise));
        GradCheckRow row;
        row.h = h;
        row.fd = (jp - jm) / (2.0 * h);
        row.abs_err = std::abs(row.fd - report.adjoint_dot);
        row.rel_err = row.abs_err / std::max(std::abs(report.adjoint_dot), 1e-14);
        report.rows.push_back(row);
        report.best_rel_err = std::min(report.best_rel_err, row.rel_err);
    }
    report.pass = report.sensitivity_rel_err <= tol_sensitivity &&
                  (h_values.empty() || report.best_rel_err <= tol_fd);
    return report;
}

}  // namespace fctl
