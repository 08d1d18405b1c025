#pragma once

#include <cstddef>
#include <vector>

namespace fctl {

enum class BasisKind { Spectral, FemNodal };

/// Coefficient vector tagged with the basis family it lives in. Spectral
/// coefficients are cosine-mode amplitudes; FEM coefficients are nodal values.
struct Field {
    std::vector<double> c;
    BasisKind kind = BasisKind::Spectral;

    std::size_t size() const { return c.size(); }
    double& operator[](std::size_t i) { return c[i]; }
    double operator[](std::size_t i) const { return c[i]; }
};

}  // namespace fctl
