#pragma once

// Shared problem builders for the test suites. These mirror the registered
// experiments at reduced resolution so individual modules can be exercised
// without going through config files.

#include <memory>
#include <vector>

#include "fctl/fem.hpp"
#include "fctl/forward.hpp"
#include "fctl/problem.hpp"
#include "fctl/spectral.hpp"

namespace testsupport {

/// Controlled heat equation with quadratic running and terminal cost on a
/// cosine basis; initial bump 1_[L/3, 2L/3].
inline fctl::ControlProblem<fctl::SpectralBasis> heat_spectral(int n, double L, double T, double dt,
                                                              double sigma, double nu = 1.0) {
    fctl::SpectralBasis basis(L, n);
    fctl::ControlProblem<fctl::SpectralBasis> pb{basis};
    pb.T = T;
    pb.dt = dt;
    pb.sigma = sigma;
    pb.nu = nu;
    pb.reaction = fctl::zero_reaction();
    pb.running = fctl::quadratic_running_cost();
    pb.terminal = fctl::quadratic_terminal_cost();
    pb.u0 = fctl::project_indicator_spectral(L / 3.0, 2.0 * L / 3.0, pb.basis);
    return pb;
}

/// Stochastic Nagumo equation with tracking costs against the deterministic
/// uncontrolled bump; initial bump 1_[L/4, 3L/4] on a hat basis.
inline fctl::ControlProblem<fctl::FemBasis> nagumo_fem(int n, double L, double T, double dt,
                                                       double sigma) {
    fctl::FemBasis basis(L, n);
    fctl::ControlProblem<fctl::FemBasis> pb{basis};
    pb.T = T;
    pb.dt = dt;
    pb.sigma = sigma;
    pb.nu = 1.0;
    pb.reaction = fctl::nagumo_reaction_op();
    pb.running = fctl::zero_running_cost();
    pb.terminal = fctl::zero_terminal_cost();
    pb.u0 = fctl::l2_project_fem_indicator(L / 4.0, 3.0 * L / 4.0, pb.basis);

    auto reference = std::make_shared<fctl::Trajectory>(fctl::reference_profile(pb));
    auto values = std::make_shared<std::vector<std::vector<double>>>(reference->states);
    auto terminal_values = std::make_shared<std::vector<double>>(reference->states.back());
    pb.running = fctl::tracking_running_cost(values, dt);
    pb.terminal = fctl::tracking_terminal_cost(terminal_values);
    pb.reference = reference;
    return pb;
}

}  // namespace testsupport
