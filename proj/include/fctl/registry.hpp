#pragma once

// Experiment registry: turns a validated ExperimentConfig into a concrete
// control problem, feedback ansatz, and training configuration.
//
// Three problems are registered:
//   heat-lq           controlled stochastic heat equation with quadratic
//                     running and terminal cost (spectral by default);
//                     the Riccati benchmark applies to this one
//   nagumo-l2         stochastic Nagumo equation tracking the deterministic
//                     bump profile, L2 feedback (fem by default)
//   nagumo-nemytskii  same problem, radial-basis Nemytskii feedback
//
// build_experiment also returns the config with every default filled in, so
// artifact directories record the exact resolved settings.

#include <cmath>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "fctl/ansatz.hpp"
#include "fctl/common.hpp"
#include "fctl/config.hpp"
#include "fctl/fem.hpp"
#include "fctl/forward.hpp"
#include "fctl/problem.hpp"
#include "fctl/riccati.hpp"
#include "fctl/spectral.hpp"

namespace fctl {

using AnyProblem = std::variant<ControlProblem<SpectralBasis>, ControlProblem<FemBasis>>;

struct Experiment {
    AnyProblem problem;
    FeedbackParams feedback;
    TrainConfig train;
    ExperimentConfig resolved;
    std::shared_ptr<const RiccatiGainTable> gains;  // set for family=riccati
};

namespace detail {

inline void default_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (!cfg.has(key)) cfg.set(key, value);
}

/// Fills problem-dependent defaults into a copy of the config.
inline ExperimentConfig resolve_config(const ExperimentConfig& in) {
    ExperimentConfig cfg = in;
    std::string problem = cfg.require_string("problem");
    bool heat = problem == "heat-lq";
    bool nagumo = problem == "nagumo-l2" || problem == "nagumo-nemytskii";
    if (!heat && !nagumo) throw ConfigError("unknown problem name: " + problem);

    default_key(cfg, "basis", heat ? "spectral" : "fem");
    default_key(cfg, "fem_variant", "corrected");
    default_key(cfg, "n", "400");
    default_key(cfg, "L", "20");
    default_key(cfg, "T", heat ? "20" : "100");
    default_key(cfg, "dt", "0.05");
    default_key(cfg, "sigma", "0.05");
    default_key(cfg, "nu", "1");
    double L = cfg.get_double("L", 20.0);
    if (!cfg.has("u0")) {
        double a = heat ? L / 3.0 : L / 4.0;
        double b = heat ? 2.0 * L / 3.0 : 3.0 * L / 4.0;
        cfg.set("u0", "indicator:" + format_double(a) + ":" + format_double(b));
    }

    if (problem == "nagumo-nemytskii")
        default_key(cfg, "family", "rbf-nemytskii");
    else if (problem == "nagumo-l2")
        default_key(cfg, "family", "two-layer-relu-net");
    else
        default_key(cfg, "family", "one-layer-net");
    default_key(cfg, "activation", "tanh");
    default_key(cfg, "hidden1", heat ? "50" : "100");
    default_key(cfg, "hidden2", "100");
    default_key(cfg, "rbf_neurons", "40");
    default_key(cfg, "rbf_partition", "20");
    default_key(cfg, "rbf_kappa", "6");
    default_key(cfg, "rbf_centers", "trainable");
    default_key(cfg, "cutoff_radius", "0");
    default_key(cfg, "random_output", "0");

    default_key(cfg, "step", heat ? "2e-3" : "5e-3");
    default_key(cfg, "decay_tau", "0");
    default_key(cfg, "rho", "1e-9");
    default_key(cfg, "batch", "8");
    default_key(cfg, "max_iters", "2000");
    default_key(cfg, "eval_batch", "32");
    default_key(cfg, "snapshot_every", "0");
    default_key(cfg, "seed", "1");
    default_key(cfg, "jobs", "1");
    default_key(cfg, "sim_paths", "2");
    default_key(cfg, "dump_controls", "0");
    return cfg;
}

inline double positive(const ExperimentConfig& cfg, const std::string& key) {
    double v = cfg.get_double(key, 0.0);
    if (!(v > 0.0)) throw ConfigError("config key " + key + ": must be positive");
    return v;
}

inline long positive_int(const ExperimentConfig& cfg, const std::string& key) {
    long v = cfg.get_int(key, 0);
    if (v < 1) throw ConfigError("config key " + key + ": must be a positive integer");
    return v;
}

/// Parses "indicator:a:b", "constant:c", or "zero" and projects onto the basis.
template <class B>
Field build_initial_state(const B& basis, const std::string& u0) {
    auto piece = [&](std::size_t from) {
        auto next = u0.find(':', from);
        std::string tok = next == std::string::npos ? u0.substr(from) : u0.substr(from, next - from);
        try {
            std::size_t pos = 0;
            double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument("");
            return std::pair<double, std::size_t>(v, next);
        } catch (const std::exception&) {
            throw ConfigError("config key u0: bad number '" + tok + "'");
        }
    };
    if (u0 == "zero") {
        Field f;
        f.kind = B::kind;
        f.c.assign(basis.dim(), 0.0);
        return f;
    }
    if (u0.rfind("constant:", 0) == 0) {
        double c = piece(9).first;
        if constexpr (B::kind == BasisKind::Spectral) {
            Field f;
            f.kind = B::kind;
            f.c.assign(basis.dim(), 0.0);
            f.c[0] = c * std::sqrt(basis.length());
            return f;
        } else {
            return l2_project_fem_function([c](double) { return c; }, basis);
        }
    }
    if (u0.rfind("indicator:", 0) == 0) {
        auto [a, rest] = piece(10);
        if (rest == std::string::npos) throw ConfigError("config key u0: indicator needs a:b");
        double b = piece(rest + 1).first;
        if (!(a < b) || a < 0.0 || b > basis.length())
            throw ConfigError("config key u0: indicator interval outside the domain");
        if constexpr (B::kind == BasisKind::Spectral)
            return project_indicator_spectral(a, b, basis);
        else
            return l2_project_fem_indicator(a, b, basis);
    }
    throw ConfigError("config key u0: expected zero | constant:c | indicator:a:b");
}

/// Assembles a problem on an already-constructed basis, wiring tracking
/// costs against the deterministic uncontrolled profile when requested.
template <class B>
ControlProblem<B> build_problem_on(const B& basis, const ExperimentConfig& cfg) {
    std::string name = cfg.require_string("problem");
    ControlProblem<B> pb{basis};
    pb.T = positive(cfg, "T");
    pb.dt = positive(cfg, "dt");
    pb.sigma = cfg.get_double("sigma", 0.0);
    pb.nu = cfg.get_double("nu", 1.0);
    if (pb.sigma < 0.0) throw ConfigError("config key sigma: must be nonnegative");
    if (pb.nu < 0.0) throw ConfigError("config key nu: must be nonnegative");
    pb.u0 = build_initial_state(basis, cfg.require_string("u0"));

    if (name == "heat-lq") {
        pb.reaction = zero_reaction();
        pb.running = quadratic_running_cost();
        pb.terminal = quadratic_terminal_cost();
    } else {
        pb.reaction = nagumo_reaction_op();
        pb.running = zero_running_cost();
        pb.terminal = zero_terminal_cost();
        auto reference = std::make_shared<Trajectory>(reference_profile(pb));
        int N = pb.steps();
        auto values = std::make_shared<std::vector<std::vector<double>>>();
        values->reserve(static_cast<std::size_t>(N) + 1);
        for (int j = 0; j <= N; ++j) {
            std::vector<double> vals;
            point_values(basis, reference->states[static_cast<std::size_t>(j)], vals);
            values->push_back(std::move(vals));
        }
        auto terminal_values = std::make_shared<std::vector<double>>(values->back());
        pb.running = tracking_running_cost(values, pb.dt);
        pb.terminal = tracking_terminal_cost(terminal_values);
        pb.reference = reference;
    }
    pb.validate();
    return pb;
}

template <class B>
FeedbackParams build_feedback_on(const ControlProblem<B>& pb, const ExperimentConfig& cfg,
                                 std::shared_ptr<const RiccatiGainTable>* gains_out) {
    std::string family = cfg.require_string("family");
    int dim = static_cast<int>(pb.basis.dim());
    double T = pb.T;
    double cutoff = cfg.get_double("cutoff_radius", 0.0);
    if (cutoff < 0.0) throw ConfigError("config key cutoff_radius: must be nonnegative");
    bool random_output = cfg.get_bool("random_output", false);
    std::uint64_t seed = derive_seed(cfg.get_u64("seed", 1), 0, 0, 7);

    if (family == "zero") return make_zero_feedback(dim, B::kind);
    if (family == "linear-diagonal") return make_linear_diagonal_feedback(dim, B::kind);
    if (family == "one-layer-net" || family == "two-layer-relu-net") {
        Activation act = Activation::Relu;
        if (family == "one-layer-net") {
            std::string a = cfg.get_string("activation", "tanh");
            if (a == "tanh")
                act = Activation::Tanh;
            else if (a == "relu")
                act = Activation::Relu;
            else
                throw ConfigError("config key activation: expected tanh | relu");
            return make_one_layer_feedback(dim, B::kind, static_cast<int>(positive_int(cfg, "hidden1")),
                                           act, T, seed, cutoff, random_output);
        }
        return make_two_layer_feedback(dim, B::kind, static_cast<int>(positive_int(cfg, "hidden1")),
                                       static_cast<int>(positive_int(cfg, "hidden2")), act, T, seed,
                                       cutoff, random_output);
    }
    if (family == "rbf-nemytskii") {
        if (B::kind != BasisKind::FemNodal)
            throw ConfigError("config key family: rbf-nemytskii requires basis = fem");
        std::string centers = cfg.get_string("rbf_centers", "trainable");
        if (centers != "trainable" && centers != "fixed")
            throw ConfigError("config key rbf_centers: expected trainable | fixed");
        return make_rbf_feedback(dim, static_cast<int>(positive_int(cfg, "rbf_neurons")),
                                 static_cast<int>(positive_int(cfg, "rbf_partition")),
                                 positive(cfg, "rbf_kappa"), T, centers == "fixed", cutoff);
    }
    if (family == "riccati") {
        if (B::kind != BasisKind::Spectral)
            throw ConfigError("config key family: riccati requires basis = spectral");
        auto gains = std::make_shared<RiccatiGainTable>(
            riccati_solve(pb.basis.length(), dim - 1, pb.T, pb.dt));
        if (gains_out) *gains_out = gains;
        return make_riccati_feedback(gains);
    }
    throw ConfigError("unknown family name: " + family);
}

}  // namespace detail

inline TrainConfig build_train_config(const ExperimentConfig& cfg) {
    TrainConfig tc;
    tc.step = detail::positive(cfg, "step");
    tc.batch = static_cast<int>(detail::positive_int(cfg, "batch"));
    tc.max_iters = static_cast<int>(cfg.get_int("max_iters", 0));
    if (tc.max_iters < 0) throw ConfigError("config key max_iters: must be nonnegative");
    tc.rho = detail::positive(cfg, "rho");
    tc.seed = cfg.get_u64("seed", 1);
    tc.decay_tau = cfg.get_double("decay_tau", 0.0);
    if (tc.decay_tau < 0.0) throw ConfigError("config key decay_tau: must be nonnegative");
    tc.eval_batch = static_cast<int>(cfg.get_int("eval_batch", 0));
    if (tc.eval_batch < 0) throw ConfigError("config key eval_batch: must be nonnegative");
    tc.snapshot_every = static_cast<int>(cfg.get_int("snapshot_every", 0));
    if (tc.snapshot_every < 0) throw ConfigError("config key snapshot_every: must be nonnegative");
    tc.jobs = static_cast<int>(detail::positive_int(cfg, "jobs"));
    return tc;
}

/// Builds the full experiment described by a config: basis, problem, feedback
/// ansatz, and training settings, with defaults recorded in `resolved`.
inline Experiment build_experiment(const ExperimentConfig& in) {
    ExperimentConfig cfg = detail::resolve_config(in);
    std::string basis_name = cfg.require_string("basis");
    int n = static_cast<int>(detail::positive_int(cfg, "n"));
    double L = detail::positive(cfg, "L");

    auto assemble = [&](auto basis) -> Experiment {
        auto pb = detail::build_problem_on(basis, cfg);
        std::shared_ptr<const RiccatiGainTable> gains;
        FeedbackParams fp = detail::build_feedback_on(pb, cfg, &gains);
        return Experiment{AnyProblem(std::move(pb)), std::move(fp), build_train_config(cfg), cfg,
                          std::move(gains)};
    };

    if (basis_name == "spectral") return assemble(SpectralBasis(L, n));
    if (basis_name == "fem") {
        std::string variant = cfg.get_string("fem_variant", "corrected");
        FemVariant fv = FemVariant::Corrected;
        if (variant == "truncated")
            fv = FemVariant::Truncated;
        else if (variant != "corrected")
            throw ConfigError("config key fem_variant: expected corrected | truncated");
        return assemble(FemBasis(L, n, fv));
    }
    throw ConfigError("config key basis: expected spectral | fem");
}

}  // namespace fctl
