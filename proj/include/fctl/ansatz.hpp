#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fctl/common.hpp"
#include "fctl/field.hpp"
#include "fctl/riccati_gains.hpp"
#include "fctl/rng.hpp"

namespace fctl {

enum class FeedbackFamily { Zero, LinearDiagonal, OneLayerNet, TwoLayerReluNet, RbfNemytskii, Riccati };
enum class Activation { Tanh, Relu };

inline std::string family_name(FeedbackFamily f) {
    switch (f) {
        case FeedbackFamily::Zero: return "zero";
        case FeedbackFamily::LinearDiagonal: return "linear-diagonal";
        case FeedbackFamily::OneLayerNet: return "one-layer-net";
        case FeedbackFamily::TwoLayerReluNet: return "two-layer-relu-net";
        case FeedbackFamily::RbfNemytskii: return "rbf-nemytskii";
        case FeedbackFamily::Riccati: return "riccati";
    }
    return "?";
}

/// Ball projection: x for |x| <= l, else l x / |x|.
inline void cutoff_inplace(std::span<double> x, double l) {
    double r = norm2(x);
    if (r <= l) return;
    double s = l / r;
    for (double& v : x) v *= s;
}

inline std::vector<double> cutoff(std::span<const double> x, double l) {
    if (!(l > 0.0)) throw std::invalid_argument("cutoff: radius must be positive");
    std::vector<double> out(x.begin(), x.end());
    cutoff_inplace(out, l);
    return out;
}

/// Static description of a feedback family instance. `dim` is the coefficient
/// count of the basis the feedback acts on; networks take the normalized time
/// t/T plus all dim coefficients as input and emit dim output coefficients.
struct FeedbackShape {
    FeedbackFamily family = FeedbackFamily::Zero;
    BasisKind basis = BasisKind::Spectral;
    int dim = 0;
    double T = 0.0;
    Activation activation = Activation::Tanh;
    int hidden1 = 0;
    int hidden2 = 0;
    int rbf_neurons = 0;    // m
    int rbf_partition = 0;  // r time cells
    double rbf_kappa = 6.0;
    bool rbf_fixed_centers = false;
    double cutoff_radius = 0.0;  // 0 disables the input cutoff
};

inline std::size_t param_count(const FeedbackShape& s) {
    std::size_t d = static_cast<std::size_t>(s.dim);
    switch (s.family) {
        case FeedbackFamily::Zero:
        case FeedbackFamily::Riccati: return 0;
        case FeedbackFamily::LinearDiagonal: return d;
        case FeedbackFamily::OneLayerNet: {
            std::size_t k = s.hidden1;
            return k * (d + 1) + k + d * k;
        }
        case FeedbackFamily::TwoLayerReluNet: {
            std::size_t k1 = s.hidden1, k2 = s.hidden2;
            return k1 * (d + 1) + k1 + k2 * k1 + k2 + d * k2;
        }
        case FeedbackFamily::RbfNemytskii:
            return d * static_cast<std::size_t>(s.rbf_neurons) * s.rbf_partition + s.rbf_neurons;
    }
    return 0;
}

/// Flat parameter vector plus shape. Layouts:
///   one-layer: A (h1 x dim+1) row-major, a (h1), B (dim x h1) row-major
///   two-layer: A, a as above, then B (h2 x h1), b (h2), C (dim x h2)
///   rbf: weights alpha[(i*m + j)*r + cell] for node i, neuron j, time cell;
///        then the m centers
struct FeedbackParams {
    FeedbackShape shape;
    std::vector<double> alpha;
    std::shared_ptr<const RiccatiGainTable> gains;  // Riccati family only
};

namespace detail {

inline double activate(Activation a, double x) {
    return a == Activation::Tanh ? std::tanh(x) : (x > 0.0 ? x : 0.0);
}

// ReLU subgradient at 0 is 0 by convention.
inline double activate_deriv(Activation a, double x) {
    if (a == Activation::Tanh) {
        double t = std::tanh(x);
        return 1.0 - t * t;
    }
    return x > 0.0 ? 1.0 : 0.0;
}

/// Multiplies by the cutoff Jacobian at x (symmetric, so it serves both the
/// JVP and the VJP): identity inside the ball, (l/|x|)(I - xx^T/|x|^2) outside.
inline void cutoff_jacobian_apply(std::span<const double> x, double l, std::span<double> v) {
    double r = norm2(x);
    if (r <= l) return;
    double proj = dot(x, v) / (r * r);
    double s = l / r;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = s * (v[i] - proj * x[i]);
}

struct NetTape {
    std::vector<double> input;  // (t/T, state after cutoff)
    std::vector<double> pre1, h1;
    std::vector<double> pre2, h2;
};

inline void one_layer_forward(const FeedbackParams& fp, double t, std::span<const double> u,
                              NetTape& tape, std::span<double> out) {
    const FeedbackShape& s = fp.shape;
    std::size_t d = s.dim, k = s.hidden1, in = d + 1;
    tape.input.resize(in);
    tape.input[0] = t / s.T;
    for (std::size_t i = 0; i < d; ++i) tape.input[1 + i] = u[i];
    if (s.cutoff_radius > 0.0)
        cutoff_inplace(std::span<double>(tape.input).subspan(1), s.cutoff_radius);
    const double* A = fp.alpha.data();
    const double* a = A + k * in;
    const double* B = a + k;
    tape.pre1.resize(k);
    tape.h1.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        double acc = a[c];
        const double* row = A + c * in;
        for (std::size_t j = 0; j < in; ++j) acc += row[j] * tape.input[j];
        tape.pre1[c] = acc;
        tape.h1[c] = activate(s.activation, acc);
    }
    for (std::size_t i = 0; i < d; ++i) {
        const double* row = B + i * k;
        double acc = 0.0;
        for (std::size_t c = 0; c < k; ++c) acc += row[c] * tape.h1[c];
        out[i] = acc;
    }
}

inline void two_layer_forward(const FeedbackParams& fp, double t, std::span<const double> u,
                              NetTape& tape, std::span<double> out) {
    const FeedbackShape& s = fp.shape;
    std::size_t d = s.dim, k1 = s.hidden1, k2 = s.hidden2, in = d + 1;
    tape.input.resize(in);
    tape.input[0] = t / s.T;
    for (std::size_t i = 0; i < d; ++i) tape.input[1 + i] = u[i];
    if (s.cutoff_radius > 0.0)
        cutoff_inplace(std::span<double>(tape.input).subspan(1), s.cutoff_radius);
    const double* A = fp.alpha.data();
    const double* a = A + k1 * in;
    const double* B = a + k1;
    const double* b = B + k2 * k1;
    const double* C = b + k2;
    tape.pre1.resize(k1);
    tape.h1.resize(k1);
    for (std::size_t c = 0; c < k1; ++c) {
        double acc = a[c];
        const double* row = A + c * in;
        for (std::size_t j = 0; j < in; ++j) acc += row[j] * tape.input[j];
        tape.pre1[c] = acc;
        tape.h1[c] = activate(s.activation, acc);
    }
    tape.pre2.resize(k2);
    tape.h2.resize(k2);
    for (std::size_t c = 0; c < k2; ++c) {
        double acc = b[c];
        const double* row = B + c * k1;
        for (std::size_t j = 0; j < k1; ++j) acc += row[j] * tape.h1[j];
        tape.pre2[c] = acc;
        tape.h2[c] = activate(s.activation, acc);
    }
    for (std::size_t i = 0; i < d; ++i) {
        const double* row = C + i * k2;
        double acc = 0.0;
        for (std::size_t c = 0; c < k2; ++c) acc += row[c] * tape.h2[c];
        out[i] = acc;
    }
}

inline int rbf_time_cell(const FeedbackShape& s, double t) {
    int cell = static_cast<int>(std::floor(t / s.T * s.rbf_partition));
    if (cell < 0) cell = 0;
    if (cell >= s.rbf_partition) cell = s.rbf_partition - 1;
    return cell;
}

/// Gaussian activations G_ij = exp(-kappa (s_i - c_j)^2) for the current
/// state values; shared by eval and both VJPs.
struct RbfTape {
    std::vector<double> state;  // after cutoff
    std::vector<double> g;      // dim x m
    int cell = 0;
};

inline void rbf_forward(const FeedbackParams& fp, double t, std::span<const double> u,
                        RbfTape& tape, std::span<double> out) {
    const FeedbackShape& s = fp.shape;
    std::size_t d = s.dim, m = s.rbf_neurons, r = s.rbf_partition;
    tape.state.assign(u.begin(), u.end());
    if (s.cutoff_radius > 0.0) cutoff_inplace(tape.state, s.cutoff_radius);
    tape.cell = rbf_time_cell(s, t);
    const double* weights = fp.alpha.data();
    const double* centers = weights + d * m * r;
    tape.g.resize(d * m);
    for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            double dz = tape.state[i] - centers[j];
            double gij = std::exp(-s.rbf_kappa * dz * dz);
            tape.g[i * m + j] = gij;
            acc += weights[(i * m + j) * r + tape.cell] * gij;
        }
        out[i] = acc;
    }
}

inline void check_eval_args(const FeedbackParams& fp, double t, std::size_t u_size) {
    const FeedbackShape& s = fp.shape;
    if (u_size != static_cast<std::size_t>(s.dim))
        throw std::invalid_argument("feedback: state size does not match shape");
    if (fp.alpha.size() != param_count(s))
        throw std::invalid_argument("feedback: parameter vector has wrong length");
    if (s.family != FeedbackFamily::Zero && s.family != FeedbackFamily::LinearDiagonal) {
        if (!(s.T > 0.0)) throw std::invalid_argument("feedback: shape horizon not set");
        if (t < -1e-9 * std::max(1.0, s.T) || t > s.T * (1.0 + 1e-9))
            throw std::invalid_argument("feedback: time outside [0, T]");
    }
    if (s.family == FeedbackFamily::Riccati && !fp.gains)
        throw std::invalid_argument("feedback: riccati family needs a gain table");
}

/// Control coefficients, Euclidean convention (no mass weighting).
inline void eval_core(const FeedbackParams& fp, double t, std::span<const double> u,
                      std::span<double> out) {
    const FeedbackShape& s = fp.shape;
    switch (s.family) {
        case FeedbackFamily::Zero:
            for (double& v : out) v = 0.0;
            return;
        case FeedbackFamily::LinearDiagonal: {
            std::vector<double> state(u.begin(), u.end());
            if (s.cutoff_radius > 0.0) cutoff_inplace(state, s.cutoff_radius);
            for (std::size_t i = 0; i < state.size(); ++i) out[i] = fp.alpha[i] * state[i];
            return;
        }
        case FeedbackFamily::OneLayerNet: {
            NetTape tape;
            one_layer_forward(fp, t, u, tape, out);
            return;
        }
        case FeedbackFamily::TwoLayerReluNet: {
            NetTape tape;
            two_layer_forward(fp, t, u, tape, out);
            return;
        }
        case FeedbackFamily::RbfNemytskii: {
            RbfTape tape;
            rbf_forward(fp, t, u, tape, out);
            return;
        }
        case FeedbackFamily::Riccati: {
            int j = riccati_time_index(*fp.gains, t);
            for (std::size_t k = 0; k < u.size(); ++k) out[k] = fp.gains->p[k][j] * u[k];
            return;
        }
    }
}

/// w^T (d Phi / d u), Euclidean convention on both sides.
inline void vjp_state_core(const FeedbackParams& fp, double t, std::span<const double> u,
                           std::span<const double> w, std::span<double> out) {
    const FeedbackShape& s = fp.shape;
    std::size_t d = s.dim;
    switch (s.family) {
        case FeedbackFamily::Zero:
            for (double& v : out) v = 0.0;
            return;
        case FeedbackFamily::LinearDiagonal: {
            for (std::size_t i = 0; i < d; ++i) out[i] = fp.alpha[i] * w[i];
            if (s.cutoff_radius > 0.0) cutoff_jacobian_apply(u, s.cutoff_radius, out);
            return;
        }
        case FeedbackFamily::OneLayerNet: {
            NetTape tape;
            std::vector<double> scratch(d);
            one_layer_forward(fp, t, u, tape, scratch);
            std::size_t k = s.hidden1, in = d + 1;
            const double* A = fp.alpha.data();
            const double* B = fp.alpha.data() + k * in + k;
            for (std::size_t i = 0; i < d; ++i) out[i] = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                double bw = 0.0;
                for (std::size_t i = 0; i < d; ++i) bw += B[i * k + c] * w[i];
                double dcb = activate_deriv(s.activation, tape.pre1[c]) * bw;
                const double* row = A + c * in;
                for (std::size_t i = 0; i < d; ++i) out[i] += row[1 + i] * dcb;
            }
            if (s.cutoff_radius > 0.0) cutoff_jacobian_apply(u, s.cutoff_radius, out);
            return;
        }
        case FeedbackFamily::TwoLayerReluNet: {
            NetTape tape;
            std::vector<double> scratch(d);
            two_layer_forward(fp, t, u, tape, scratch);
            std::size_t k1 = s.hidden1, k2 = s.hidden2, in = d + 1;
            const double* A = fp.alpha.data();
            const double* B = A + k1 * in + k1;
            const double* C = B + k2 * k1 + k2;
            std::vector<double> d2(k2), d1(k1, 0.0);
            for (std::size_t c = 0; c < k2; ++c) {
                double cw = 0.0;
                for (std::size_t i = 0; i < d; ++i) cw += C[i * k2 + c] * w[i];
                d2[c] = activate_deriv(s.activation, tape.pre2[c]) * cw;
            }
            for (std::size_t c = 0; c < k2; ++c) {
                const double* row = B + c * k1;
                for (std::size_t j = 0; j < k1; ++j) d1[j] += row[j] * d2[c];
            }
            for (std::size_t j = 0; j < k1; ++j)
                d1[j] *= activate_deriv(s.activation, tape.pre1[j]);
            for (std::size_t i = 0; i < d; ++i) out[i] = 0.0;
            for (std::size_t c = 0; c < k1; ++c) {
                const double* row = A + c * in;
                for (std::size_t i = 0; i < d; ++i) out[i] += row[1 + i] * d1[c];
            }
            if (s.cutoff_radius > 0.0) cutoff_jacobian_apply(u, s.cutoff_radius, out);
            return;
        }
        case FeedbackFamily::RbfNemytskii: {
            RbfTape tape;
            std::vector<double> scratch(d);
            rbf_forward(fp, t, u, tape, scratch);
            std::size_t m = s.rbf_neurons, r = s.rbf_partition;
            const double* weights = fp.alpha.data();
            const double* centers = weights + d * m * r;
            // Nodal map is diagonal in the state: d out_i / d s_i.
            for (std::size_t i = 0; i < d; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < m; ++j) {
                    double dz = tape.state[i] - centers[j];
                    acc += weights[(i * m + j) * r + tape.cell] * tape.g[i * m + j] *
                           (-2.0 * s.rbf_kappa * dz);
                }
                out[i] = acc * w[i];
            }
            if (s.cutoff_radius > 0.0) cutoff_jacobian_apply(u, s.cutoff_radius, out);
            return;
        }
        case FeedbackFamily::Riccati: {
            int j = riccati_time_index(*fp.gains, t);
            for (std::size_t k = 0; k < d; ++k) out[k] = fp.gains->p[k][j] * w[k];
            return;
        }
    }
}

/// w^T (d Phi / d alpha), Euclidean convention in w.
inline void vjp_params_core(const FeedbackParams& fp, double t, std::span<const double> u,
                            std::span<const double> w, std::span<double> grad) {
    const FeedbackShape& s = fp.shape;
    std::size_t d = s.dim;
    for (double& v : grad) v = 0.0;
    switch (s.family) {
        case FeedbackFamily::Zero:
        case FeedbackFamily::Riccati: return;
        case FeedbackFamily::LinearDiagonal: {
            std::vector<double> state(u.begin(), u.end());
            if (s.cutoff_radius > 0.0) cutoff_inplace(state, s.cutoff_radius);
            for (std::size_t i = 0; i < d; ++i) grad[i] = state[i] * w[i];
            return;
        }
        case FeedbackFamily::OneLayerNet: {
            NetTape tape;
            std::vector<double> scratch(d);
            one_layer_forward(fp, t, u, tape, scratch);
            std::size_t k = s.hidden1, in = d + 1;
            const double* B = fp.alpha.data() + k * in + k;
            double* gA = grad.data();
            double* ga = gA + k * in;
            double* gB = ga + k;
            for (std::size_t c = 0; c < k; ++c) {
                double bw = 0.0;
                for (std::size_t i = 0; i < d; ++i) bw += B[i * k + c] * w[i];
                double dcb = activate_deriv(s.activation, tape.pre1[c]) * bw;
                double* row = gA + c * in;
                for (std::size_t j = 0; j < in; ++j) row[j] = dcb * tape.input[j];
                ga[c] = dcb;
            }
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t c = 0; c < k; ++c) gB[i * k + c] = w[i] * tape.h1[c];
            return;
        }
        case FeedbackFamily::TwoLayerReluNet: {
            NetTape tape;
            std::vector<double> scratch(d);
            two_layer_forward(fp, t, u, tape, scratch);
            std::size_t k1 = s.hidden1, k2 = s.hidden2, in = d + 1;
            const double* B = fp.alpha.data() + k1 * in + k1;
            const double* C = B + k2 * k1 + k2;
            double* gA = grad.data();
            double* ga = gA + k1 * in;
            double* gB = ga + k1;
            double* gb = gB + k2 * k1;
            double* gC = gb + k2;
            std::vector<double> d2(k2), d1(k1, 0.0);
            for (std::size_t c = 0; c < k2; ++c) {
                double cw = 0.0;
                for (std::size_t i = 0; i < d; ++i) cw += C[i * k2 + c] * w[i];
                d2[c] = activate_deriv(s.activation, tape.pre2[c]) * cw;
            }
            for (std::size_t c = 0; c < k2; ++c) {
                const double* row = B + c * k1;
                for (std::size_t j = 0; j < k1; ++j) d1[j] += row[j] * d2[c];
            }
            for (std::size_t j = 0; j < k1; ++j)
                d1[j] *= activate_deriv(s.activation, tape.pre1[j]);
            for (std::size_t c = 0; c < k1; ++c) {
                double* row = gA + c * in;
                for (std::size_t j = 0; j < in; ++j) row[j] = d1[c] * tape.input[j];
                ga[c] = d1[c];
            }
            for (std::size_t c = 0; c < k2; ++c) {
                double* row = gB + c * k1;
                for (std::size_t j = 0; j < k1; ++j) row[j] = d2[c] * tape.h1[j];
                gb[c] = d2[c];
            }
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t c = 0; c < k2; ++c) gC[i * k2 + c] = w[i] * tape.h2[c];
            return;
        }
        case FeedbackFamily::RbfNemytskii: {
            RbfTape tape;
            std::vector<double> scratch(d);
            rbf_forward(fp, t, u, tape, scratch);
            std::size_t m = s.rbf_neurons, r = s.rbf_partition;
            const double* weights = fp.alpha.data();
            const double* centers = weights + d * m * r;
            double* gw = grad.data();
            double* gc = gw + d * m * r;
            for (std::size_t i = 0; i < d; ++i) {
                for (std::size_t j = 0; j < m; ++j) {
                    double gij = tape.g[i * m + j];
                    gw[(i * m + j) * r + tape.cell] = gij * w[i];
                    if (!s.rbf_fixed_centers) {
                        double dz = tape.state[i] - centers[j];
                        gc[j] += weights[(i * m + j) * r + tape.cell] * gij *
                                 (2.0 * s.rbf_kappa * dz) * w[i];
                    }
                }
            }
            return;
        }
    }
}

/// (d Phi / d u) y, Euclidean convention; drives the sensitivity equation.
inline void jvp_state_core(const FeedbackParams& fp, double t, std::span<const double> u,
                           std::span<const double> y, std::span<double> out) {
    const FeedbackShape& s = fp.shape;
    std::size_t d = s.dim;
    std::vector<double> ydot(y.begin(), y.end());
    if (s.cutoff_radius > 0.0 && s.family != FeedbackFamily::Zero &&
        s.family != FeedbackFamily::Riccati)
        cutoff_jacobian_apply(u, s.cutoff_radius, ydot);
    switch (s.family) {
        case FeedbackFamily::Zero:
            for (double& v : out) v = 0.0;
            return;
        case FeedbackFamily::LinearDiagonal:
            for (std::size_t i = 0; i < d; ++i) out[i] = fp.alpha[i] * ydot[i];
            return;
        case FeedbackFamily::OneLayerNet: {
            NetTape tape;
            std::vector<double> scratch(d);
            one_layer_forward(fp, t, u, tape, scratch);
            std::size_t k = s.hidden1, in = d + 1;
            const double* A = fp.alpha.data();
            const double* B = A + k * in + k;
            std::vector<double> hdot(k);
            for (std::size_t c = 0; c < k; ++c) {
                const double* row = A + c * in;
                double acc = 0.0;
                for (std::size_t i = 0; i < d; ++i) acc += row[1 + i] * ydot[i];
                hdot[c] = activate_deriv(s.activation, tape.pre1[c]) * acc;
            }
            for (std::size_t i = 0; i < d; ++i) {
                const double* row = B + i * k;
                double acc = 0.0;
                for (std::size_t c = 0; c < k; ++c) acc += row[c] * hdot[c];
                out[i] = acc;
            }
            return;
        }
        case FeedbackFamily::TwoLayerReluNet: {
            NetTape tape;
            std::vector<double> scratch(d);
            two_layer_forward(fp, t, u, tape, scratch);
            std::size_t k1 = s.hidden1, k2 = s.hidden2, in = d + 1;
            const double* A = fp.alpha.data();
            const double* B = A + k1 * in + k1;
            const double* C = B + k2 * k1 + k2;
            std::vector<double> h1dot(k1), h2dot(k2);
            for (std::size_t c = 0; c < k1; ++c) {
                const double* row = A + c * in;
                double acc = 0.0;
                for (std::size_t i = 0; i < d; ++i) acc += row[1 + i] * ydot[i];
                h1dot[c] = activate_deriv(s.activation, tape.pre1[c]) * acc;
            }
            for (std::size_t c = 0; c < k2; ++c) {
                const double* row = B + c * k1;
                double acc = 0.0;
                for (std::size_t j = 0; j < k1; ++j) acc += row[j] * h1dot[j];
                h2dot[c] = activate_deriv(s.activation, tape.pre2[c]) * acc;
            }
            for (std::size_t i = 0; i < d; ++i) {
                const double* row = C + i * k2;
                double acc = 0.0;
                for (std::size_t c = 0; c < k2; ++c) acc += row[c] * h2dot[c];
                out[i] = acc;
            }
            return;
        }
        case FeedbackFamily::RbfNemytskii: {
            RbfTape tape;
            std::vector<double> scratch(d);
            rbf_forward(fp, t, u, tape, scratch);
            std::size_t m = s.rbf_neurons, r = s.rbf_partition;
            const double* weights = fp.alpha.data();
            const double* centers = weights + d * m * r;
            for (std::size_t i = 0; i < d; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < m; ++j) {
                    double dz = tape.state[i] - centers[j];
                    acc += weights[(i * m + j) * r + tape.cell] * tape.g[i * m + j] *
                           (-2.0 * s.rbf_kappa * dz);
                }
                out[i] = acc * ydot[i];
            }
            return;
        }
        case FeedbackFamily::Riccati: {
            int j = riccati_time_index(*fp.gains, t);
            for (std::size_t k = 0; k < d; ++k) out[k] = fp.gains->p[k][j] * ydot[k];
            return;
        }
    }
}

/// (d Phi / d alpha) beta, Euclidean convention.
inline void jvp_params_core(const FeedbackParams& fp, double t, std::span<const double> u,
                            std::span<const double> beta, std::span<double> out) {
    const FeedbackShape& s = fp.shape;
    std::size_t d = s.dim;
    switch (s.family) {
        case FeedbackFamily::Zero:
        case FeedbackFamily::Riccati:
            for (double& v : out) v = 0.0;
            return;
        case FeedbackFamily::LinearDiagonal: {
            std::vector<double> state(u.begin(), u.end());
            if (s.cutoff_radius > 0.0) cutoff_inplace(state, s.cutoff_radius);
            for (std::size_t i = 0; i < d; ++i) out[i] = beta[i] * state[i];
            return;
        }
        case FeedbackFamily::OneLayerNet: {
            NetTape tape;
            std::vector<double> scratch(d);
            one_layer_forward(fp, t, u, tape, scratch);
            std::size_t k = s.hidden1, in = d + 1;
            const double* B = fp.alpha.data() + k * in + k;
            const double* bA = beta.data();
            const double* ba = bA + k * in;
            const double* bB = ba + k;
            std::vector<double> hdot(k);
            for (std::size_t c = 0; c < k; ++c) {
                const double* row = bA + c * in;
                double acc = ba[c];
                for (std::size_t j = 0; j < in; ++j) acc += row[j] * tape.input[j];
                hdot[c] = activate_deriv(s.activation, tape.pre1[c]) * acc;
            }
            for (std::size_t i = 0; i < d; ++i) {
                double acc = 0.0;
                for (std::size_t c = 0; c < k; ++c)
                    acc += B[i * k + c] * hdot[c] + bB[i * k + c] * tape.h1[c];
                out[i] = acc;
            }
            return;
        }
        case FeedbackFamily::TwoLayerReluNet: {
            NetTape tape;
            std::vector<double> scratch(d);
            two_layer_forward(fp, t, u, tape, scratch);
            std::size_t k1 = s.hidden1, k2 = s.hidden2, in = d + 1;
            const double* B = fp.alpha.data() + k1 * in + k1;
            const double* C = B + k2 * k1 + k2;
            const double* bA = beta.data();
            const double* ba = bA + k1 * in;
            const double* bB = ba + k1;
            const double* bb = bB + k2 * k1;
            const double* bC = bb + k2;
            std::vector<double> h1dot(k1), h2dot(k2);
            for (std::size_t c = 0; c < k1; ++c) {
                const double* row = bA + c * in;
                double acc = ba[c];
                for (std::size_t j = 0; j < in; ++j) acc += row[j] * tape.input[j];
                h1dot[c] = activate_deriv(s.activation, tape.pre1[c]) * acc;
            }
            for (std::size_t c = 0; c < k2; ++c) {
                double acc = bb[c];
                const double* browB = B + c * k1;
                const double* browbB = bB + c * k1;
                for (std::size_t j = 0; j < k1; ++j)
                    acc += browB[j] * h1dot[j] + browbB[j] * tape.h1[j];
                h2dot[c] = activate_deriv(s.activation, tape.pre2[c]) * acc;
            }
            for (std::size_t i = 0; i < d; ++i) {
                double acc = 0.0;
                for (std::size_t c = 0; c < k2; ++c)
                    acc += C[i * k2 + c] * h2dot[c] + bC[i * k2 + c] * tape.h2[c];
                out[i] = acc;
            }
            return;
        }
        case FeedbackFamily::RbfNemytskii: {
            RbfTape tape;
            std::vector<double> scratch(d);
            rbf_forward(fp, t, u, tape, scratch);
            std::size_t m = s.rbf_neurons, r = s.rbf_partition;
            const double* weights = fp.alpha.data();
            const double* centers = weights + d * m * r;
            const double* bw = beta.data();
            const double* bc = bw + d * m * r;
            for (std::size_t i = 0; i < d; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < m; ++j) {
                    double gij = tape.g[i * m + j];
                    acc += bw[(i * m + j) * r + tape.cell] * gij;
                    if (!s.rbf_fixed_centers) {
                        double dz = tape.state[i] - centers[j];
                        acc += weights[(i * m + j) * r + tape.cell] * gij *
                               (2.0 * s.rbf_kappa * dz) * bc[j];
                    }
                }
                out[i] = acc;
            }
            return;
        }
    }
}

}  // namespace detail

/// Control Field Phi(t, u, alpha) in the same basis as u.
template <class B>
Field feedback_eval(const FeedbackParams& fp, double t, const Field& u, const B& basis) {
    if (u.kind != B::kind || fp.shape.basis != B::kind || u.size() != basis.dim())
        throw std::invalid_argument("feedback_eval: basis mismatch");
    detail::check_eval_args(fp, t, u.size());
    Field g;
    g.kind = B::kind;
    g.c.resize(u.size());
    detail::eval_core(fp, t, u.c, g.c);
    return g;
}

/// L2 adjoint of the state Jacobian applied to w:
/// <w, Phi_u v>_{L2} = <vjp_state(w), v>_{L2} for all v.
template <class B>
Field feedback_vjp_state(const FeedbackParams& fp, double t, const Field& u, const Field& w,
                         const B& basis) {
    if (u.kind != B::kind || w.kind != B::kind || fp.shape.basis != B::kind ||
        u.size() != basis.dim() || w.size() != basis.dim())
        throw std::invalid_argument("feedback_vjp_state: basis mismatch");
    detail::check_eval_args(fp, t, u.size());
    Field out;
    out.kind = B::kind;
    out.c.resize(u.size());
    if constexpr (B::kind == BasisKind::Spectral) {
        detail::vjp_state_core(fp, t, u.c, w.c, out.c);
    } else {
        std::vector<double> mw(w.size());
        basis.gram_mult(w.c, mw);
        detail::vjp_state_core(fp, t, u.c, mw, out.c);
        basis.gram_solve(out.c);
    }
    return out;
}

/// Parameter gradient pairing: <w, Phi_alpha beta>_{L2} = vjp_params(w) . beta.
template <class B>
std::vector<double> feedback_vjp_params(const FeedbackParams& fp, double t, const Field& u,
                                        const Field& w, const B& basis) {
    if (u.kind != B::kind || w.kind != B::kind || fp.shape.basis != B::kind ||
        u.size() != basis.dim() || w.size() != basis.dim())
        throw std::invalid_argument("feedback_vjp_params: basis mismatch");
    detail::check_eval_args(fp, t, u.size());
    std::vector<double> grad(fp.alpha.size());
    if constexpr (B::kind == BasisKind::Spectral) {
        detail::vjp_params_core(fp, t, u.c, w.c, grad);
    } else {
        std::vector<double> mw(w.size());
        basis.gram_mult(w.c, mw);
        detail::vjp_params_core(fp, t, u.c, mw, grad);
    }
    return grad;
}

inline FeedbackParams make_zero_feedback(int dim, BasisKind kind) {
    FeedbackParams fp;
    fp.shape.family = FeedbackFamily::Zero;
    fp.shape.basis = kind;
    fp.shape.dim = dim;
    return fp;
}

inline FeedbackParams make_linear_diagonal_feedback(int dim, BasisKind kind) {
    FeedbackParams fp;
    fp.shape.family = FeedbackFamily::LinearDiagonal;
    fp.shape.basis = kind;
    fp.shape.dim = dim;
    fp.alpha.assign(dim, 0.0);
    return fp;
}

namespace detail {

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) block fill.
inline void init_uniform(GaussianStream& rng, std::span<double> block, std::size_t fan_in) {
    double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : block) v = scale * (2.0 * rng.uniform() - 1.0);
}

}  // namespace detail

/// One-layer network feedback. The output layer starts at zero (training
/// starts from the uncontrolled loop) unless random_output is set.
inline FeedbackParams make_one_layer_feedback(int dim, BasisKind kind, int hidden, Activation act,
                                              double T, std::uint64_t seed,
                                              double cutoff_radius = 0.0,
                                              bool random_output = false) {
    if (dim < 1 || hidden < 1) throw std::invalid_argument("one-layer feedback: bad shape");
    FeedbackParams fp;
    fp.shape.family = FeedbackFamily::OneLayerNet;
    fp.shape.basis = kind;
    fp.shape.dim = dim;
    fp.shape.T = T;
    fp.shape.activation = act;
    fp.shape.hidden1 = hidden;
    fp.shape.cutoff_radius = cutoff_radius;
    fp.alpha.assign(param_count(fp.shape), 0.0);
    GaussianStream rng(seed);
    std::size_t in = static_cast<std::size_t>(dim) + 1, k = hidden;
    std::span<double> alpha(fp.alpha);
    detail::init_uniform(rng, alpha.subspan(0, k * in + k), in);
    if (random_output) detail::init_uniform(rng, alpha.subspan(k * in + k), k);
    return fp;
}

inline FeedbackParams make_two_layer_feedback(int dim, BasisKind kind, int hidden1, int hidden2,
                                              Activation act, double T, std::uint64_t seed,
                                              double cutoff_radius = 0.0,
                                              bool random_output = false) {
    if (dim < 1 || hidden1 < 1 || hidden2 < 1)
        throw std::invalid_argument("two-layer feedback: bad shape");
    FeedbackParams fp;
    fp.shape.family = FeedbackFamily::TwoLayerReluNet;
    fp.shape.basis = kind;
    fp.shape.dim = dim;
    fp.shape.T = T;
    fp.shape.activation = act;
    fp.shape.hidden1 = hidden1;
    fp.shape.hidden2 = hidden2;
    fp.shape.cutoff_radius = cutoff_radius;
    fp.alpha.assign(param_count(fp.shape), 0.0);
    GaussianStream rng(seed);
    std::size_t in = static_cast<std::size_t>(dim) + 1, k1 = hidden1, k2 = hidden2;
    std::span<double> alpha(fp.alpha);
    detail::init_uniform(rng, alpha.subspan(0, k1 * in + k1), in);
    detail::init_uniform(rng, alpha.subspan(k1 * in + k1, k2 * k1 + k2), k1);
    if (random_output) detail::init_uniform(rng, alpha.subspan(k1 * in + k1 + k2 * k1 + k2), k2);
    return fp;
}

/// RBF Nemytskii feedback (nodal bases only): weights start at zero, centers
/// evenly spaced over [-0.25, 1.25], the expected state range of the bistable
/// problems.
inline FeedbackParams make_rbf_feedback(int dim, int neurons, int partition, double kappa, double T,
                                        bool fixed_centers = false, double cutoff_radius = 0.0) {
    if (dim < 1 || neurons < 1 || partition < 1 || !(kappa > 0.0))
        throw std::invalid_argument("rbf feedback: bad shape");
    FeedbackParams fp;
    fp.shape.family = FeedbackFamily::RbfNemytskii;
    fp.shape.basis = BasisKind::FemNodal;
    fp.shape.dim = dim;
    fp.shape.T = T;
    fp.shape.rbf_neurons = neurons;
    fp.shape.rbf_partition = partition;
    fp.shape.rbf_kappa = kappa;
    fp.shape.rbf_fixed_centers = fixed_centers;
    fp.shape.cutoff_radius = cutoff_radius;
    fp.alpha.assign(param_count(fp.shape), 0.0);
    double* centers = fp.alpha.data() + fp.alpha.size() - neurons;
    for (int j = 0; j < neurons; ++j)
        centers[j] = -0.25 + 1.5 * (j + 0.5) / static_cast<double>(neurons);
    return fp;
}

inline FeedbackParams make_riccati_feedback(std::shared_ptr<const RiccatiGainTable> gains) {
    if (!gains || gains->p.empty()) throw std::invalid_argument("riccati feedback: empty gains");
    FeedbackParams fp;
    fp.shape.family = FeedbackFamily::Riccati;
    fp.shape.basis = BasisKind::Spectral;
    fp.shape.dim = gains->modes() + 1;
    fp.shape.T = gains->T;
    fp.gains = std::move(gains);
    return fp;
}

}  // namespace fctl
