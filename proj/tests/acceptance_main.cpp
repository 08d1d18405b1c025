// Acceptance gate: every numbered criterion checks one end-to-end property of
// the toolkit at a fixed desk scale and prints a single pass/fail line.
//
//   acceptance                 runs all criteria
//   acceptance --criterion k   runs criterion k (repeatable)
//
// Criteria 7 and 8 share an expensive training run; selecting both in one
// invocation reuses it.  Exit code is the number of failed criteria.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fctl/fctl.hpp"
#include "support.hpp"

using namespace fctl;

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

/// Collects sub-check failures and informational lines for one criterion.
struct Criterion {
    std::vector<std::string> failures;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    void note(const std::string& line) { notes.push_back(line); }
};

/// State shared between criteria run in the same invocation.
struct Shared {
    std::optional<ControlProblem<FemBasis>> nagumo;
    std::optional<double> two_layer_cost;  // criterion 7's trained evaluation cost
};

// ---------------------------------------------------------------------------
// 1. Pathwise gradient vs forward sensitivity and central differences.

void criterion1(Criterion& c, Shared&) {
    auto pb = testsupport::heat_spectral(16, 20.0, 2.5, 0.05, 0.05);  // 50 time steps
    const std::vector<double> hs = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

    double worst_sens = 0.0;
    double worst_fd = 0.0;
    int quadratic_pairs = 0;
    for (int pair = 0; pair < 20; ++pair) {
        FeedbackParams fp = make_one_layer_feedback(17, BasisKind::Spectral, 50, Activation::Tanh,
                                                    pb.T, derive_seed(101, pair, 0, 3), 0.0, true);
        GaussianStream rng(derive_seed(101, pair, 1, 3));
        for (double& a : fp.alpha) a += 0.3 * rng.gaussian();  // activate every block
        std::vector<double> beta(fp.alpha.size());
        for (double& b : beta) b = rng.gaussian();
        double nb = norm2(beta);
        for (double& b : beta) b /= nb;

        GradCheckReport rep = grad_check(pb, fp, beta, hs, derive_seed(101, pair, 2, 3));
        worst_sens = std::max(worst_sens, rep.sensitivity_rel_err);
        worst_fd = std::max(worst_fd, rep.best_rel_err);

        // Until the cancellation floor, halving h by 10 should cut the error
        // by about 100; accept any decade that shrinks it at least 20-fold.
        bool quadratic = false;
        for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i) {
            if (rep.rows[i].rel_err < 1e-9) break;
            if (rep.rows[i].rel_err > 20.0 * rep.rows[i + 1].rel_err) quadratic = true;
        }
        if (quadratic) ++quadratic_pairs;
    }
    c.note("worst sensitivity rel err " + num(worst_sens) + ", worst FD rel err " + num(worst_fd) +
           ", quadratic decades in " + std::to_string(quadratic_pairs) + "/20 pairs");
    c.check(worst_sens <= 1e-8,
            "adjoint/sensitivity rel err " + num(worst_sens) + " exceeds 1e-8");
    c.check(worst_fd <= 1e-6, "finite-difference rel err " + num(worst_fd) + " exceeds 1e-6");
    c.check(quadratic_pairs == 20, "finite differences did not converge quadratically in " +
                                       std::to_string(20 - quadratic_pairs) + " of 20 pairs");
}

// ---------------------------------------------------------------------------
// 2. Backward gain structure: pinned mode zero, terminal value, stiff limit.

void criterion2(Criterion& c, Shared&) {
    RiccatiGainTable table = riccati_solve(20.0, 32, 20.0, 0.05);
    int N = table.steps();

    double worst0 = 0.0;
    for (int j = 0; j <= N; ++j) worst0 = std::max(worst0, std::abs(table.p[0][j] + 1.0));
    c.note("max |p_0 + 1| on the grid: " + num(worst0));
    c.check(worst0 <= 1e-10, "mode-zero gain deviates from -1 by " + num(worst0));

    bool terminal_exact = true;
    for (int k = 0; k <= table.modes(); ++k)
        if (table.p[static_cast<std::size_t>(k)][static_cast<std::size_t>(N)] != -1.0)
            terminal_exact = false;
    c.check(terminal_exact, "terminal gain slice is not exactly -1");

    double root = riccati_stationary_root(1.0);
    double target = 1.0 - std::sqrt(2.0);
    c.check(std::abs(root - target) <= 1e-14,
            "stationary root at unit rate is " + num(root) + ", expected " + num(target));

    double closed = riccati_mode_exact(1.0, 20.0);
    c.note("long-horizon gain at unit rate: " + num(closed) + " vs root " + num(target));
    c.check(std::abs(closed - target) <= 1e-6,
            "long-horizon closed form misses the stationary root by " +
                num(std::abs(closed - target)));

    // Same limit through the grid solver: on a pi-length domain the first
    // mode has unit rate.
    RiccatiGainTable pi_table = riccati_solve(std::acos(-1.0), 1, 20.0, 0.05);
    double grid0 = pi_table.p[1][0];
    c.check(std::abs(grid0 - target) <= 1e-6,
            "grid solver long-horizon value " + num(grid0) + " misses " + num(target));
}

// ---------------------------------------------------------------------------
// 3. Closed-loop Monte Carlo cost vs the exact benchmark cost.

void criterion3(Criterion& c, Shared&) {
    auto pb = testsupport::heat_spectral(64, 20.0, 20.0, 0.05, 0.05);
    auto table = std::make_shared<RiccatiGainTable>(riccati_solve(20.0, 64, 20.0, 0.05));
    double exact = lq_optimal_cost(*table, pb.u0, pb.sigma);

    FeedbackParams fp = make_riccati_feedback(table);
    CostEstimate mc = mc_cost(pb, fp, 10000, 303, 0, kStreamEval, 1);
    double gap_se = std::abs(mc.mean - exact) / mc.std_error;
    c.note("mc cost " + num(mc.mean) + " +- " + num(mc.std_error) + ", exact " + num(exact) +
           ", gap " + num(gap_se) + " SE");
    c.check(mc.failures == 0, std::to_string(mc.failures) + " of 10000 paths diverged");
    c.check(gap_se <= 3.0, "closed-loop cost differs from the benchmark by " + num(gap_se) +
                               " standard errors");
}

// ---------------------------------------------------------------------------
// 4. Training on the benchmark problem approaches the known optimum.

void criterion4(Criterion& c, Shared&) {
    auto pb = testsupport::heat_spectral(64, 20.0, 20.0, 0.05, 0.05);
    auto table = std::make_shared<RiccatiGainTable>(riccati_solve(20.0, 64, 20.0, 0.05));
    double exact = lq_optimal_cost(*table, pb.u0, pb.sigma);
    FeedbackParams ric = make_riccati_feedback(table);

    FeedbackParams fp = make_one_layer_feedback(65, BasisKind::Spectral, 50, Activation::Tanh,
                                                pb.T, derive_seed(404, 0, 0, 7), 0.0, false);
    TrainConfig tc;
    tc.step = 2e-3;
    tc.decay_tau = 400.0;
    tc.batch = 8;
    tc.max_iters = 2000;
    tc.rho = 1e-12;
    tc.seed = 404;
    tc.eval_batch = 8;
    tc.snapshot_every = 667;  // thirds of the run
    TrainResult tr = sgd_train(pb, fp, tc);

    CostEstimate final_cost =
        mc_cost(pb, tr.params, 10000, 404, tr.iterations + 1, kStreamEval, 1);
    c.note("trained cost " + num(final_cost.mean) + " +- " + num(final_cost.std_error) +
           ", benchmark " + num(exact) + " (" + tr.stop_reason + " after " +
           std::to_string(tr.iterations) + " iterations)");
    c.check(final_cost.failures == 0,
            std::to_string(final_cost.failures) + " evaluation paths diverged");
    c.check(final_cost.mean <= 1.10 * exact,
            "trained cost " + num(final_cost.mean) + " is more than 10% above the benchmark " +
                num(exact));
    c.check(final_cost.mean >= exact - 3.0 * final_cost.std_error,
            "trained cost sits below the optimum by more than 3 standard errors");

    // Control distance to the benchmark feedback, measured along the learned
    // closed loop on common fresh noise, at each third of training.
    std::vector<const FeedbackParams*> stages;
    for (const auto& [it, snap] : tr.snapshots)
        if (it == 667 || it == 1334) stages.push_back(&snap);
    stages.push_back(&tr.params);
    c.check(stages.size() == 3, "expected snapshots at both interior thirds");

    std::vector<double> dist(stages.size(), 0.0);
    const int paths = 32;
    for (std::size_t s = 0; s < stages.size(); ++s) {
        double acc = 0.0;
        for (int i = 0; i < paths; ++i) {
            NoisePath noise =
                sample_noise(derive_seed(4040, i, 0, kStreamEval), pb.steps(), pb.dt, pb.basis);
            Trajectory traj = forward_solve(pb, *stages[s], noise);
            Field state;
            state.kind = BasisKind::Spectral;
            std::vector<double> diff;
            for (int j = 0; j < pb.steps(); ++j) {
                state.c = traj.states[static_cast<std::size_t>(j)];
                Field bench = feedback_eval(ric, traj.times[static_cast<std::size_t>(j)], state,
                                            pb.basis);
                diff = traj.controls[static_cast<std::size_t>(j)];
                for (std::size_t q = 0; q < diff.size(); ++q) diff[q] -= bench.c[q];
                acc += pb.dt * pb.basis.l2_norm_sq(diff);
            }
        }
        dist[s] = std::sqrt(acc / paths);
    }
    c.note("control distance to benchmark across thirds: " + num(dist[0]) + " -> " +
           num(dist[1]) + " -> " + num(dist[2]));
    c.check(dist[0] > dist[1] && dist[1] > dist[2],
            "control distance to the benchmark does not decrease across training thirds");
}

// ---------------------------------------------------------------------------
// 5. Spectral projection error bound on rough test profiles.

void criterion5(Criterion& c, Shared&) {
    struct Profile {
        const char* name;
        double (*u)(double);
        double (*du)(double);
    };
    constexpr double delta = 0.1;  // smoothing width of the kink profile
    const Profile profiles[] = {
        {"x", [](double x) { return x; }, [](double) { return 1.0; }},
        {"x(1-x)", [](double x) { return x * (1.0 - x); }, [](double x) { return 1.0 - 2.0 * x; }},
        {"smoothed |x-1/2|",
         [](double x) {
             double z = x - 0.5;
             return std::abs(z) <= delta ? z * z / (2.0 * delta) + delta / 2.0 : std::abs(z);
         },
         [](double x) { return std::clamp((x - 0.5) / delta, -1.0, 1.0); }},
    };

    const int quad = 1 << 15;  // Simpson panels on (0, 1)
    const double h = 1.0 / quad;
    const int nmax = 256;
    const double pi = std::acos(-1.0);

    auto simpson = [&](auto f) {
        double acc = f(0.0) + f(1.0);
        for (int i = 1; i < quad; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
        return acc * h / 3.0;
    };

    bool all_hold = true;
    std::string first_violation;
    for (const Profile& p : profiles) {
        double l2_sq = simpson([&](double x) { return p.u(x) * p.u(x); });
        double h1_sq = l2_sq + simpson([&](double x) { return p.du(x) * p.du(x); });

        std::vector<double> coeff(nmax + 1);
        for (int k = 0; k <= nmax; ++k) {
            double scale = k == 0 ? 1.0 : std::sqrt(2.0);
            coeff[k] = simpson([&](double x) { return p.u(x) * scale * std::cos(k * pi * x); });
        }

        double captured = 0.0;
        double worst_margin = 1e300;
        for (int n = 0; n <= nmax; ++n) {
            captured += coeff[n] * coeff[n];
            if (n < 4) continue;
            double err = std::sqrt(std::max(l2_sq - captured, 0.0));
            double bound = std::sqrt(h1_sq) / (pi * n);
            worst_margin = std::min(worst_margin, bound - err);
            if (err > bound && all_hold) {
                all_hold = false;
                first_violation = std::string(p.name) + " at n=" + std::to_string(n) + ": error " +
                                  num(err) + " > bound " + num(bound);
            }
        }
        c.note(std::string(p.name) + ": smallest bound slack " + num(worst_margin));
    }
    c.check(all_hold, "projection bound violated for " + first_violation);
}

// ---------------------------------------------------------------------------
// 6. Scheme exactness: single modes, constants, noise variance identity.

void criterion6(Criterion& c, Shared&) {
    // Single excited mode decays by the exact resolvent factor.
    {
        SpectralBasis basis(20.0, 16);
        ControlProblem<SpectralBasis> pb{basis};
        pb.T = 1.0;
        pb.dt = 0.05;
        pb.sigma = 0.0;
        pb.reaction = zero_reaction();
        pb.running = zero_running_cost();
        pb.terminal = zero_terminal_cost();
        pb.u0.kind = BasisKind::Spectral;
        pb.u0.c.assign(17, 0.0);
        pb.u0.c[3] = 1.0;
        Trajectory traj = forward_solve(pb, make_zero_feedback(17, BasisKind::Spectral),
                                        zero_noise(pb.steps(), basis));
        double factor = 1.0 / (1.0 + pb.dt * basis.eigenvalues()[3]);
        double worst = 0.0;
        double expected = 1.0;
        for (int j = 0; j <= pb.steps(); ++j) {
            const auto& u = traj.states[static_cast<std::size_t>(j)];
            worst = std::max(worst, std::abs(u[3] - expected));
            for (std::size_t k = 0; k < u.size(); ++k)
                if (k != 3 && u[k] != 0.0) worst = std::max(worst, std::abs(u[k]));
            expected *= factor;
        }
        c.note("single-mode decay error " + num(worst));
        c.check(worst <= 1e-13, "single-mode decay error " + num(worst) + " exceeds 1e-13");
    }

    // Constants are fixed points of the drift on both discretizations.
    {
        auto spec = testsupport::heat_spectral(16, 20.0, 1.0, 0.05, 0.0);
        spec.u0.c.assign(17, 0.0);
        spec.u0.c[0] = 3.25 * std::sqrt(20.0);
        Trajectory ts = forward_solve(spec, make_zero_feedback(17, BasisKind::Spectral),
                                      zero_noise(spec.steps(), spec.basis));
        double worst = 0.0;
        for (const auto& u : ts.states)
            worst = std::max(worst, std::abs(u[0] - spec.u0.c[0]));

        FemBasis fem(20.0, 24);
        ControlProblem<FemBasis> pf{fem};
        pf.T = 1.0;
        pf.dt = 0.05;
        pf.sigma = 0.0;
        pf.reaction = zero_reaction();
        pf.running = zero_running_cost();
        pf.terminal = zero_terminal_cost();
        pf.u0.kind = BasisKind::FemNodal;
        pf.u0.c.assign(fem.dim(), 3.25);
        Trajectory tf = forward_solve(pf, make_zero_feedback(static_cast<int>(fem.dim()),
                                                             BasisKind::FemNodal),
                                      zero_noise(pf.steps(), fem));
        for (const auto& u : tf.states)
            for (double v : u) worst = std::max(worst, std::abs(v - 3.25));
        c.note("constant drift over 20 steps: " + num(worst));
        c.check(worst <= 1e-13, "constants drift by " + num(worst) + " over 20 steps");
    }

    // Accumulated noise variance matches the closed-form double sum.
    {
        auto pb = testsupport::heat_spectral(16, 20.0, 1.0, 0.05, 0.05);
        pb.u0.c.assign(17, 0.0);
        int N = pb.steps();
        double predicted = 0.0;
        for (int k = 0; k <= 16; ++k) {
            double r = 1.0 / (1.0 + pb.dt * pb.basis.eigenvalues()[static_cast<std::size_t>(k)]);
            double geom = 0.0;
            for (int i = 1; i <= N; ++i) geom += std::pow(r, 2.0 * i);
            predicted += pb.sigma * pb.sigma * pb.dt * geom;
        }

        FeedbackParams zero = make_zero_feedback(17, BasisKind::Spectral);
        const int samples = 10000;
        double sum = 0.0, sum_sq = 0.0;
        for (int i = 0; i < samples; ++i) {
            NoisePath noise = sample_noise(derive_seed(606, i, 0, kStreamEval), N, pb.dt, pb.basis);
            Trajectory traj = forward_solve(pb, zero, noise);
            double e = pb.basis.l2_norm_sq(traj.states.back());
            sum += e;
            sum_sq += e * e;
        }
        double mean = sum / samples;
        double se = std::sqrt((sum_sq / samples - mean * mean) / (samples - 1.0));
        double gap_se = std::abs(mean - predicted) / se;
        c.note("terminal variance " + num(mean) + " +- " + num(se) + ", predicted " +
               num(predicted) + ", gap " + num(gap_se) + " SE");
        c.check(gap_se <= 3.0,
                "sampled noise variance misses the identity by " + num(gap_se) + " SE");
    }
}

// ---------------------------------------------------------------------------
// 7/8 shared pieces: the tracking problem and its terminal error.

const ControlProblem<FemBasis>& nagumo_desk(Shared& sh) {
    if (!sh.nagumo) sh.nagumo.emplace(testsupport::nagumo_fem(100, 20.0, 20.0, 0.05, 0.05));
    return *sh.nagumo;
}

double terminal_tracking_error(const ControlProblem<FemBasis>& pb, const FeedbackParams& fp,
                               std::uint64_t seed) {
    NoisePath noise = sample_noise(seed, pb.steps(), pb.dt, pb.basis);
    Trajectory traj = forward_solve(pb, fp, noise);
    std::vector<double> diff = traj.states.back();
    const std::vector<double>& ref = pb.reference->states.back();
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= ref[i];
    return pb.basis.l2_norm_sq(diff);
}

/// Trains the two-layer feedback and records its evaluated cost; criterion 8
/// compares against this number, so it is cached for combined runs.
double two_layer_trained_cost(Criterion& c, Shared& sh) {
    if (sh.two_layer_cost) return *sh.two_layer_cost;
    const auto& pb = nagumo_desk(sh);
    FeedbackParams fp =
        make_two_layer_feedback(static_cast<int>(pb.basis.dim()), BasisKind::FemNodal, 32, 32,
                                Activation::Relu, pb.T, derive_seed(707, 0, 0, 7), 0.0, false);
    TrainConfig tc;
    tc.step = 5e-3;
    tc.decay_tau = 400.0;
    tc.batch = 32;
    tc.max_iters = 1500;
    tc.rho = 1e-12;
    tc.seed = 707;
    tc.eval_batch = 8;
    TrainResult tr = sgd_train(pb, fp, tc);

    const int paths = 200;
    double trained_err = 0.0, uncontrolled_err = 0.0;
    FeedbackParams zero =
        make_zero_feedback(static_cast<int>(pb.basis.dim()), BasisKind::FemNodal);
    int collapsed = 0;
    double ref_energy = pb.basis.l2_norm_sq(pb.reference->states.back());
    for (int i = 0; i < paths; ++i) {
        std::uint64_t seed = derive_seed(7070, i, 0, kStreamEval);
        trained_err += terminal_tracking_error(pb, tr.params, seed);
        double ue = terminal_tracking_error(pb, zero, seed);
        uncontrolled_err += ue;
        if (ue > 0.25 * ref_energy) ++collapsed;
    }
    trained_err /= paths;
    uncontrolled_err /= paths;

    CostEstimate cost = mc_cost(pb, tr.params, paths, 707, tr.iterations + 1, kStreamEval, 1);
    sh.two_layer_cost = cost.mean;

    c.note("terminal tracking error: trained " + num(trained_err) + ", uncontrolled " +
           num(uncontrolled_err) + " (ratio " + num(uncontrolled_err / trained_err) + ")");
    c.note("uncontrolled paths past 25% of the reference energy: " + std::to_string(collapsed) +
           "/" + std::to_string(paths) + " (reference energy " + num(ref_energy) + ")");
    c.note("trained evaluation cost " + num(cost.mean) + " +- " + num(cost.std_error) + " (" +
           tr.stop_reason + " after " + std::to_string(tr.iterations) + " iterations)");

    c.check(uncontrolled_err >= 5.0 * trained_err,
            "trained terminal error " + num(trained_err) + " is not 5x below uncontrolled " +
                num(uncontrolled_err));
    c.check(2 * collapsed > paths,
            "bump collapse in only " + std::to_string(collapsed) + " of " +
                std::to_string(paths) + " uncontrolled paths");
    return cost.mean;
}

void criterion7(Criterion& c, Shared& sh) {
    two_layer_trained_cost(c, sh);

    // Cross-check at the full experiment horizon: the uncontrolled bump is
    // metastable, and the noise needs far more than 20 time units to push a
    // typical path into a flat steady state. Verify that the absorbing
    // behavior the desk-scale clause asks about does occur by T = 100.
    auto full = testsupport::nagumo_fem(400, 20.0, 100.0, 0.05, 0.05);
    FeedbackParams zero =
        make_zero_feedback(static_cast<int>(full.basis.dim()), BasisKind::FemNodal);
    double full_energy = full.basis.l2_norm_sq(full.reference->states.back());
    const int full_paths = 30;
    int full_collapsed = 0;
    for (int i = 0; i < full_paths; ++i) {
        double ue = terminal_tracking_error(full, zero, derive_seed(7071, i, 0, kStreamEval));
        if (ue > 0.25 * full_energy) ++full_collapsed;
    }
    c.note("full-horizon cross-check (n = 400, T = 100): " + std::to_string(full_collapsed) +
           "/" + std::to_string(full_paths) + " uncontrolled paths past the 25% threshold");
    c.check(2 * full_collapsed > full_paths,
            "uncontrolled paths do not reach a flat steady state in a majority of full-horizon "
            "runs");
}

// ---------------------------------------------------------------------------
// 8. Pointwise radial-basis family: comparable cost, near-exact gradients.

void criterion8(Criterion& c, Shared& sh) {
    double reference_cost;
    if (sh.two_layer_cost) {
        reference_cost = *sh.two_layer_cost;
    } else {
        Criterion scratch;  // solo run: train the comparison feedback quietly
        reference_cost = two_layer_trained_cost(scratch, sh);
    }
    const auto& pb = nagumo_desk(sh);

    FeedbackParams fp = make_rbf_feedback(static_cast<int>(pb.basis.dim()), 16, 10, 6.0, pb.T,
                                          false, 0.0);
    TrainConfig tc;
    tc.step = 5e-3;
    tc.decay_tau = 600.0;
    tc.batch = 8;
    tc.max_iters = 1500;
    tc.rho = 1e-12;
    tc.seed = 808;
    tc.eval_batch = 8;
    TrainResult tr = sgd_train(pb, fp, tc);

    CostEstimate cost = mc_cost(pb, tr.params, 200, 808, tr.iterations + 1, kStreamEval, 1);
    c.note("radial-basis cost " + num(cost.mean) + " +- " + num(cost.std_error) +
           ", two-layer reference " + num(reference_cost) + " (" + tr.stop_reason + " after " +
           std::to_string(tr.iterations) + " iterations)");
    c.check(cost.mean <= 2.0 * reference_cost,
            "radial-basis cost " + num(cost.mean) + " exceeds twice the two-layer cost " +
                num(reference_cost));

    // Gradient check at randomized parameters on one frozen path.
    FeedbackParams gc = make_rbf_feedback(static_cast<int>(pb.basis.dim()), 16, 10, 6.0, pb.T,
                                          false, 0.0);
    GaussianStream rng(derive_seed(808, 1, 0, 3));
    for (double& a : gc.alpha) a += 0.05 * rng.gaussian();
    std::vector<double> beta(gc.alpha.size());
    for (double& b : beta) b = rng.gaussian();
    double nb = norm2(beta);
    for (double& b : beta) b /= nb;
    std::vector<double> hs = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    GradCheckReport rep = grad_check(pb, gc, beta, hs, derive_seed(808, 2, 0, 3));
    c.note("gradient check: sensitivity rel err " + num(rep.sensitivity_rel_err) +
           ", best FD rel err " + num(rep.best_rel_err));
    c.check(rep.pass && rep.best_rel_err <= 1e-6,
            "gradient check failed (sensitivity " + num(rep.sensitivity_rel_err) + ", FD " +
                num(rep.best_rel_err) + ")");
}

// ---------------------------------------------------------------------------

struct Entry {
    int number;
    const char* title;
    void (*run)(Criterion&, Shared&);
};

const Entry kEntries[] = {
    {1, "pathwise gradient matches forward sensitivity and central differences", criterion1},
    {2, "benchmark gains: pinned mode zero, terminal slice, long-horizon limit", criterion2},
    {3, "closed-loop Monte Carlo cost agrees with the exact benchmark cost", criterion3},
    {4, "trained feedback approaches the benchmark optimum", criterion4},
    {5, "spectral projection error bound holds up to n = 256", criterion5},
    {6, "time stepping is exact on modes, constants, and the variance identity", criterion6},
    {7, "trained feedback stabilizes the stochastic bump profile", criterion7},
    {8, "radial-basis feedback reaches comparable cost with near-exact gradients", criterion8},
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            int k = std::atoi(argv[++i]);
            if (k < 1 || k > 8) {
                std::fprintf(stderr, "acceptance: criterion number must be 1..8, got %s\n",
                             argv[i]);
                return 64;
            }
            selected.push_back(k);
        } else {
            std::fprintf(stderr, "usage: acceptance [--criterion k]...\n");
            return 64;
        }
    }
    if (selected.empty())
        for (const Entry& e : kEntries) selected.push_back(e.number);

    Shared shared;
    int failed = 0;
    for (int k : selected) {
        const Entry& entry = kEntries[k - 1];
        Criterion c;
        try {
            entry.run(c, shared);
        } catch (const std::exception& e) {
            c.failures.push_back(std::string("exception: ") + e.what());
        }
        std::printf("criterion %d: %s  %s\n", entry.number, c.failures.empty() ? "PASS" : "FAIL",
                    entry.title);
        for (const std::string& line : c.notes) std::printf("    %s\n", line.c_str());
        for (const std::string& line : c.failures) std::printf("    FAIL: %s\n", line.c_str());
        std::fflush(stdout);
        if (!c.failures.empty()) ++failed;
    }
    return failed;
}
