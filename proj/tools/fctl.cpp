// Experiment driver for the stochastic feedback-control toolkit.
//
// Subcommands:
//   train       stochastic gradient descent over the configured ansatz
//   simulate    forward rollouts under a configured or saved feedback
//   riccati     linear-quadratic benchmark gains and optimal cost
//   grad-check  adjoint gradient verification on one frozen noise path
//   evaluate    Monte-Carlo cost of saved parameters on fresh seeds
//
// Every artifact directory receives the fully resolved config (including the
// master seed) and a manifest with a content hash per file, so any run can be
// reproduced exactly from its artifacts.
//
// Exit codes: 0 success, 2 config error, 3 numerical divergence, 4 I/O error.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "fctl/fctl.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::optional<int> jobs;
    bool quiet = false;
    std::string params_stem;  // simulate/evaluate/grad-check: saved parameters
};

fctl::ExperimentConfig load_config(const CliOptions& opt) {
    fctl::ExperimentConfig cfg = fctl::ExperimentConfig::from_file(opt.config_path);
    for (const std::string& o : opt.overrides) cfg.apply_override(o);
    if (opt.seed) cfg.set_u64("seed", *opt.seed);
    if (opt.jobs) cfg.set_int("jobs", *opt.jobs);
    return cfg;
}

/// Default output root: --out, else $FCTL_OUT/<problem>-<subcommand>, else
/// ./out/<problem>-<subcommand>.
std::string resolve_out_dir(const CliOptions& opt, const fctl::ExperimentConfig& resolved,
                            const std::string& subcommand) {
    if (!opt.out_dir.empty()) return opt.out_dir;
    const char* root = std::getenv("FCTL_OUT");
    std::string base = root && *root ? root : "out";
    return base + "/" + resolved.require_string("problem") + "-" + subcommand;
}

void write_common_artifacts(const std::string& dir, const fctl::ExperimentConfig& resolved,
                            std::vector<std::string>& files) {
    fctl::write_text_file(dir + "/config.cfg", resolved.serialize());
    files.push_back("config.cfg");
}

/// Re-attaches the gain table when loading a family=riccati parameter file.
template <class B>
fctl::FeedbackParams load_saved_feedback(const std::string& stem,
                                         const fctl::ControlProblem<B>& pb) {
    fctl::FeedbackParams fp = fctl::load_feedback(stem);
    if (fp.shape.basis != B::kind)
        throw fctl::ConfigError("saved parameters were trained on a different basis kind");
    if (fp.shape.dim != static_cast<int>(pb.basis.dim()))
        throw fctl::ConfigError("saved parameters have dim " + std::to_string(fp.shape.dim) +
                                " but the problem has " + std::to_string(pb.basis.dim()));
    if (fp.shape.family == fctl::FeedbackFamily::Riccati) {
        if constexpr (B::kind == fctl::BasisKind::Spectral) {
            auto gains = std::make_shared<fctl::RiccatiGainTable>(fctl::riccati_solve(
                pb.basis.length(), static_cast<int>(pb.basis.dim()) - 1, pb.T, pb.dt));
            fp.gains = std::move(gains);
        } else {
            throw fctl::ConfigError("riccati feedback requires a spectral problem");
        }
    }
    return fp;
}

template <class B>
int run_train(const fctl::ControlProblem<B>& pb, fctl::Experiment& ex, const std::string& dir,
              bool quiet) {
    std::vector<std::string> files;
    write_common_artifacts(dir, ex.resolved, files);
    ex.train.quiet = quiet;
    fctl::TrainResult result = fctl::sgd_train(pb, ex.feedback, ex.train);

    fctl::write_history_csv(dir + "/history.csv", result.history);
    files.push_back("history.csv");
    fctl::save_feedback(dir + "/params", result.params);
    files.push_back("params.bin");
    files.push_back("params.meta");
    for (const auto& [it, snap] : result.snapshots) {
        char stem[64];
        std::snprintf(stem, sizeof(stem), "snapshot_%06d", it);
        fctl::save_feedback(dir + "/" + stem, snap);
        files.push_back(std::string(stem) + ".bin");
        files.push_back(std::string(stem) + ".meta");
    }

    int eval_batch = ex.train.eval_batch > 0 ? ex.train.eval_batch : ex.train.batch;
    fctl::CostEstimate final_cost = fctl::mc_cost(pb, result.params, eval_batch, ex.train.seed,
                                                  result.iterations + 1, fctl::kStreamEval,
                                                  ex.train.jobs);
    std::ostringstream summary;
    summary << "stop_reason = " << result.stop_reason << '\n';
    summary << "iterations = " << result.iterations << '\n';
    summary << "final_cost = " << fctl::csv_double(final_cost.mean) << '\n';
    summary << "final_cost_std_error = " << fctl::csv_double(final_cost.std_error) << '\n';
    summary << "eval_samples = " << final_cost.samples << '\n';
    summary << "eval_failures = " << final_cost.failures << '\n';
    fctl::write_text_file(dir + "/summary.txt", summary.str());
    files.push_back("summary.txt");
    fctl::write_manifest(dir, files);

    if (!quiet)
        std::cout << "train: " << result.stop_reason << " after " << result.iterations
                  << " iterations, final cost " << final_cost.mean << " +- "
                  << final_cost.std_error << "\n";
    if (result.stop_reason == "nonfinite-params") {
        std::cerr << "fctl: parameters became non-finite; diagnostic snapshot saved\n";
        return 3;
    }
    return 0;
}

template <class B>
int run_simulate(const fctl::ControlProblem<B>& pb, fctl::Experiment& ex,
                 const CliOptions& opt, const std::string& dir, bool quiet) {
    std::vector<std::string> files;
    write_common_artifacts(dir, ex.resolved, files);
    fctl::FeedbackParams fp = opt.params_stem.empty()
                                  ? ex.feedback
                                  : load_saved_feedback(opt.params_stem, pb);

    int sim_paths = static_cast<int>(ex.resolved.get_int("sim_paths", 2));
    bool dump_ctrl = ex.resolved.get_bool("dump_controls", false);
    std::uint64_t master = ex.train.seed;
    for (int i = 0; i < sim_paths; ++i) {
        std::uint64_t seed = fctl::derive_seed(master, 0, i, fctl::kStreamEval);
        fctl::NoisePath noise = fctl::sample_noise(seed, pb.steps(), pb.dt, pb.basis);
        fctl::Trajectory traj = fctl::forward_solve(pb, fp, noise);
        char name[64];
        std::snprintf(name, sizeof(name), "path_%03d", i);
        fctl::dump_states(dir + "/" + name + "_states.bin", traj, pb.basis.length());
        files.push_back(std::string(name) + "_states.bin");
        if (dump_ctrl) {
            fctl::dump_controls(dir + "/" + name + "_controls.bin", traj, pb.basis.length());
            files.push_back(std::string(name) + "_controls.bin");
        }
        fctl::write_norms_csv(dir + "/" + name + "_norms.csv", pb, traj);
        files.push_back(std::string(name) + "_norms.csv");
    }

    int eval_batch = ex.train.eval_batch > 0 ? ex.train.eval_batch : ex.train.batch;
    fctl::CostEstimate cost =
        fctl::mc_cost(pb, fp, eval_batch, master, 0, fctl::kStreamEval, ex.train.jobs);
    std::ostringstream summary;
    summary << "cost = " << fctl::csv_double(cost.mean) << '\n';
    summary << "cost_std_error = " << fctl::csv_double(cost.std_error) << '\n';
    summary << "samples = " << cost.samples << '\n';
    summary << "failures = " << cost.failures << '\n';
    fctl::write_text_file(dir + "/summary.txt", summary.str());
    files.push_back("summary.txt");
    fctl::write_manifest(dir, files);
    if (!quiet)
        std::cout << "simulate: cost " << cost.mean << " +- " << cost.std_error << " over "
                  << cost.samples << " paths\n";
    return 0;
}

template <class B>
int run_riccati(const fctl::ControlProblem<B>& pb, fctl::Experiment& ex, const std::string& dir,
                bool quiet) {
    if constexpr (B::kind != fctl::BasisKind::Spectral) {
        throw fctl::ConfigError("riccati benchmark requires basis = spectral");
    } else {
        std::vector<std::string> files;
        write_common_artifacts(dir, ex.resolved, files);
        fctl::RiccatiGainTable table = fctl::riccati_solve(
            pb.basis.length(), static_cast<int>(pb.basis.dim()) - 1, pb.T, pb.dt);
        fctl::write_gains_csv(dir + "/gains.csv", table);
        files.push_back("gains.csv");
        double cost = fctl::lq_optimal_cost(table, pb.u0, pb.sigma);
        double cost_cont = fctl::lq_optimal_cost_continuous(table, pb.u0, pb.sigma);
        std::ostringstream summary;
        summary << "optimal_cost = " << fctl::csv_double(cost) << '\n';
        summary << "optimal_cost_continuous_time = " << fctl::csv_double(cost_cont) << '\n';
        fctl::write_text_file(dir + "/summary.txt", summary.str());
        files.push_back("summary.txt");
        fctl::write_manifest(dir, files);
        if (!quiet) std::cout << "riccati: optimal cost " << cost << "\n";
        return 0;
    }
}

template <class B>
int run_grad_check(const fctl::ControlProblem<B>& pb, fctl::Experiment& ex,
                   const CliOptions& opt, const std::string& dir, bool quiet) {
    std::vector<std::string> files;
    write_common_artifacts(dir, ex.resolved, files);
    fctl::FeedbackParams fp = opt.params_stem.empty()
                                  ? ex.feedback
                                  : load_saved_feedback(opt.params_stem, pb);
    if (fp.alpha.empty())
        throw fctl::ConfigError("grad-check needs a trainable family, not " +
                                fctl::family_name(fp.shape.family));

    std::uint64_t master = ex.train.seed;
    std::vector<double> direction(fp.alpha.size());
    fctl::GaussianStream dir_rng(fctl::derive_seed(master, 0, 0, 11));
    for (double& v : direction) v = dir_rng.gaussian();
    double nrm = fctl::norm2(direction);
    for (double& v : direction) v /= nrm;

    std::vector<double> hs = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    fctl::GradCheckReport report =
        fctl::grad_check(pb, fp, direction, hs, fctl::derive_seed(master, 0, 0, 12));

    std::ostringstream csv;
    csv << "h,fd,abs_err,rel_err\n";
    for (const auto& row : report.rows)
        csv << fctl::csv_double(row.h) << ',' << fctl::csv_double(row.fd) << ','
            << fctl::csv_double(row.abs_err) << ',' << fctl::csv_double(row.rel_err) << '\n';
    fctl::write_text_file(dir + "/gradcheck.csv", csv.str());
    files.push_back("gradcheck.csv");

    std::ostringstream summary;
    summary << "adjoint_dot = " << fctl::csv_double(report.adjoint_dot) << '\n';
    summary << "sensitivity = " << fctl::csv_double(report.sensitivity) << '\n';
    summary << "sensitivity_rel_err = " << fctl::csv_double(report.sensitivity_rel_err) << '\n';
    summary << "best_fd_rel_err = " << fctl::csv_double(report.best_rel_err) << '\n';
    summary << "pass = " << (report.pass ? 1 : 0) << '\n';
    fctl::write_text_file(dir + "/summary.txt", summary.str());
    files.push_back("summary.txt");
    fctl::write_manifest(dir, files);
    if (!quiet)
        std::cout << "grad-check: " << (report.pass ? "pass" : "FAIL") << " (sensitivity rel err "
                  << report.sensitivity_rel_err << ", best FD rel err " << report.best_rel_err
                  << ")\n";
    return 0;
}

template <class B>
int run_evaluate(const fctl::ControlProblem<B>& pb, fctl::Experiment& ex,
                 const CliOptions& opt, const std::string& dir, bool quiet) {
    if (opt.params_stem.empty())
        throw fctl::ConfigError("evaluate requires --params <stem> (saved parameters)");
    std::vector<std::string> files;
    write_common_artifacts(dir, ex.resolved, files);
    fctl::FeedbackParams fp = load_saved_feedback(opt.params_stem, pb);
    int eval_batch = ex.train.eval_batch > 0 ? ex.train.eval_batch : ex.train.batch;
    fctl::CostEstimate cost =
        fctl::mc_cost(pb, fp, eval_batch, ex.train.seed, 0, fctl::kStreamEval, ex.train.jobs);
    std::ostringstream summary;
    summary << "cost = " << fctl::csv_double(cost.mean) << '\n';
    summary << "cost_std_error = " << fctl::csv_double(cost.std_error) << '\n';
    summary << "samples = " << cost.samples << '\n';
    summary << "failures = " << cost.failures << '\n';
    fctl::write_text_file(dir + "/summary.txt", summary.str());
    files.push_back("summary.txt");
    fctl::write_manifest(dir, files);
    if (!quiet)
        std::cout << "evaluate: cost " << cost.mean << " +- " << cost.std_error << " over "
                  << cost.samples << " paths\n";
    return 0;
}

int dispatch(const std::string& sub, const CliOptions& opt) {
    fctl::ExperimentConfig cfg = load_config(opt);
    fctl::Experiment ex = fctl::build_experiment(cfg);
    std::string dir = resolve_out_dir(opt, ex.resolved, sub);
    fctl::ensure_dir(dir);
    return std::visit(
        [&](auto& pb) {
            if (sub == "train") return run_train(pb, ex, dir, opt.quiet);
            if (sub == "simulate") return run_simulate(pb, ex, opt, dir, opt.quiet);
            if (sub == "riccati") return run_riccati(pb, ex, dir, opt.quiet);
            if (sub == "grad-check") return run_grad_check(pb, ex, opt, dir, opt.quiet);
            if (sub == "evaluate") return run_evaluate(pb, ex, opt, dir, opt.quiet);
            throw fctl::ConfigError("unknown subcommand: " + sub);
        },
        ex.problem);
}

std::string config_help_text() {
    std::ostringstream out;
    out << "Config file keys (flat `key = value` lines, '#' comments):\n";
    for (const auto& d : fctl::config_key_docs()) out << "  " << d.key << ": " << d.doc << "\n";
    return out.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Approximate optimal feedback controls for stochastic reaction-diffusion "
                 "equations: adjoint-based SGD over feedback ansatz spaces with a "
                 "linear-quadratic Riccati benchmark."};
    app.require_subcommand(1);
    app.footer(config_help_text());

    CliOptions opt;
    std::string chosen;
    for (const char* name : {"train", "simulate", "riccati", "grad-check", "evaluate"}) {
        CLI::App* sub = app.add_subcommand(name, "");
        sub->add_option("--config", opt.config_path, "experiment config file")->required();
        sub->add_option("--set", opt.overrides, "override a config key (key=value, repeatable)");
        sub->add_option("--seed", opt.seed, "override the master seed");
        sub->add_option("--out", opt.out_dir, "artifact directory (default $FCTL_OUT)");
        sub->add_option("--jobs", opt.jobs, "worker threads for Monte Carlo batches");
        sub->add_flag("--quiet", opt.quiet, "suppress progress output");
        if (std::string(name) != "train" && std::string(name) != "riccati")
            sub->add_option("--params", opt.params_stem,
                            "stem of saved parameter files (<stem>.bin / <stem>.meta)");
        sub->callback([&chosen, name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        return dispatch(chosen, opt);
    } catch (const fctl::ConfigError& e) {
        std::cerr << "fctl: config error: " << e.what() << "\n";
        return 2;
    } catch (const fctl::DivergedError& e) {
        std::cerr << "fctl: " << e.what() << "\n";
        return 3;
    } catch (const fctl::IoError& e) {
        std::cerr << "fctl: i/o error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "fctl: config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "fctl: " << e.what() << "\n";
        return 1;
    }
}
