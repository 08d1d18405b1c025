#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace fctl {

/// Gaussian increments driving one path: `steps` time slices of `dim`
/// coefficients, each slice distributed as sqrt(dt) * (basis correlation
/// applied to iid standard normals). Spectral slices are iid N(0, dt) per
/// mode; FEM slices are N(0, dt M).
struct NoisePath {
    std::uint64_t seed = 0;
    int steps = 0;
    int dim = 0;
    std::vector<double> increments;  // steps x dim, row-major

    std::span<const double> slice(int j) const {
        return std::span<const double>(increments).subspan(static_cast<std::size_t>(j) * dim, dim);
    }
};

/// One realized state path on the uniform time grid t_j = j dt, with the
/// feedback values applied at each step cached for cost and adjoint reuse.
struct Trajectory {
    double dt = 0.0;
    std::vector<double> times;                   // N+1
    std::vector<std::vector<double>> states;     // N+1 coefficient vectors
    std::vector<std::vector<double>> controls;   // N feedback values, coefficient space
    std::shared_ptr<const NoisePath> noise;

    int steps() const { return static_cast<int>(states.empty() ? 0 : states.size() - 1); }
};

/// Costates of the discrete adjoint sweep, one per time node. costates[j] is
/// the L2 gradient of the pathwise cost-to-go with respect to the state at
/// t_j; costates[N] equals the terminal cost gradient.
struct AdjointTrajectory {
    double dt = 0.0;
    std::vector<std::vector<double>> costates;  // N+1 coefficient vectors
};

}  // namespace fctl
