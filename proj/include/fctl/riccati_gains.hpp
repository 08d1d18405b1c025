#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace fctl {

/// Per-mode Riccati gains tabulated on the solver time grid: p[k][j] is the
/// mode-k gain at t_j = j dt. The induced feedback is g_k(t) = p[k][j] u_k.
struct RiccatiGainTable {
    double L = 0.0;
    double T = 0.0;
    double dt = 0.0;
    std::vector<std::vector<double>> p;  // (n+1) x (N+1)

    int modes() const { return static_cast<int>(p.size()) - 1; }
    int steps() const { return p.empty() ? 0 : static_cast<int>(p.front().size()) - 1; }
};

/// Grid index of time t; rejects off-grid times so gain lookup never
/// interpolates.
inline int riccati_time_index(const RiccatiGainTable& table, double t) {
    if (table.dt <= 0.0) throw std::invalid_argument("riccati gains: empty table");
    auto j = static_cast<int>(std::llround(t / table.dt));
    if (j < 0 || j > table.steps() || std::abs(t - j * table.dt) > 1e-9 * std::max(1.0, table.T))
        throw std::invalid_argument("riccati gains: time not on the table grid");
    return j;
}

}  // namespace fctl
