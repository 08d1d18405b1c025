#pragma once

#include <cmath>
#include <cstdint>

#include "fctl/common.hpp"

namespace fctl {

/// Deterministic Gaussian stream: SplitMix64 uniforms fed through Box-Muller.
/// Both pieces are spelled out (no std::normal_distribution) so that sampled
/// paths are bit-identical across platforms and standard library versions.
class GaussianStream {
  public:
    explicit GaussianStream(std::uint64_t seed) : state_(seed) {}

    /// Uniform on (0, 1): 53-bit mantissa, zero mapped to the smallest value.
    double uniform() {
        double u = static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace fctl
