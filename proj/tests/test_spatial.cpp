#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "fctl/fem.hpp"
#include "fctl/spectral.hpp"

using namespace fctl;

namespace {

// Fine trapezoid rule on [0, L] with `points` nodes, independent of any basis
// quadrature. Used as the reference integrator throughout this file.
double fine_integral(double L, int points, const std::function<double(double)>& f) {
    double h = L / (points - 1);
    double s = 0.0;
    for (int i = 0; i < points; ++i) {
        double w = (i == 0 || i == points - 1) ? 0.5 * h : h;
        s += w * f(h * i);
    }
    return s;
}

std::vector<double> sample_on_grid(const SpectralBasis& basis,
                                   const std::function<double(double)>& u) {
    std::vector<double> out(basis.collocation().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = u(basis.collocation()[i]);
    return out;
}

}  // namespace

TEST_CASE("spectral eigenvalues match the Neumann Laplacian", "[spatial]") {
    SpectralBasis unit(1.0, 4);
    CHECK(unit.eigenvalues()[0] == 0.0);
    CHECK(std::abs(unit.eigenvalues()[1] - 9.869604401089358) < 1e-12);

    SpectralBasis wide(20.0, 8);
    CHECK(std::abs(wide.eigenvalues()[3] - 0.22206609902451057) < 1e-14);
    for (std::size_t k = 1; k < wide.dim(); ++k)
        CHECK(wide.eigenvalues()[k] > wide.eigenvalues()[k - 1]);

    // Collocation resolution for cubic nonlinearities: at least 2(n+1) nodes.
    CHECK(wide.collocation().size() >= 2 * wide.dim());
    CHECK(wide.collocation().size() == wide.quad_weights().size());

    CHECK_THROWS_AS(SpectralBasis(0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(SpectralBasis(-1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(SpectralBasis(1.0, 0), std::invalid_argument);
}

TEST_CASE("spectral projection reproduces constants and basis modes", "[spatial]") {
    SpectralBasis basis(20.0, 8);
    const double c = 0.7;
    Field constant = project_spectral(sample_on_grid(basis, [&](double) { return c; }), basis);
    CHECK(std::abs(constant.c[0] - c * std::sqrt(20.0)) < 1e-12);
    for (std::size_t k = 1; k < basis.dim(); ++k) CHECK(std::abs(constant.c[k]) < 1e-12);

    std::vector<double> e2(basis.dim(), 0.0);
    e2[2] = 1.0;
    std::vector<double> values(basis.collocation().size());
    basis.synth(e2, values);
    Field back = project_spectral(values, basis);
    for (std::size_t k = 0; k < basis.dim(); ++k)
        CHECK(std::abs(back.c[k] - e2[k]) < 1e-12);

    std::vector<double> wrong(basis.collocation().size() + 1, 0.0);
    CHECK_THROWS_AS(project_spectral(wrong, basis), std::invalid_argument);
}

TEST_CASE("linear profile coefficient matches the frozen integral", "[spatial]") {
    // sqrt(2) * integral_0^1 x cos(pi x) dx = -2 sqrt(2) / pi^2, evaluated to
    // high precision with an independent integrator.
    const double frozen = -0.28657958412537813;
    SpectralBasis basis(1.0, 256);
    Field f = project_spectral(sample_on_grid(basis, [](double x) { return x; }), basis);
    CHECK(std::abs(f.c[1] - frozen) < 2e-6);

    // Quadrature refinement shrinks the remaining gap.
    SpectralBasis coarse(1.0, 64);
    Field g = project_spectral(sample_on_grid(coarse, [](double x) { return x; }), coarse);
    CHECK(std::abs(f.c[1] - frozen) < std::abs(g.c[1] - frozen));
}

TEST_CASE("spectral evaluation and projection round trip", "[spatial]") {
    SpectralBasis basis(2.0, 6);
    Field constant;
    constant.kind = BasisKind::Spectral;
    constant.c.assign(basis.dim(), 0.0);
    constant.c[0] = 3.0 * std::sqrt(2.0);  // the constant 3 on (0, 2)
    std::vector<double> pts = {0.0, 0.31, 1.5, 2.0};
    for (double v : evaluate_field(constant, pts, basis)) CHECK(std::abs(v - 3.0) < 1e-12);

    Field e1;
    e1.kind = BasisKind::Spectral;
    e1.c.assign(basis.dim(), 0.0);
    e1.c[1] = 1.0;
    CHECK(std::abs(basis.eval_at(e1.c, 0.0) - std::sqrt(2.0 / 2.0)) < 1e-12);

    Field mixed;
    mixed.kind = BasisKind::Spectral;
    mixed.c = {0.4, -1.2, 0.0, 0.7, 0.05, -0.3, 1.0};
    std::vector<double> values(basis.collocation().size());
    basis.synth(mixed.c, values);
    Field again = project_spectral(values, basis);
    for (std::size_t k = 0; k < basis.dim(); ++k)
        CHECK(std::abs(again.c[k] - mixed.c[k]) < 1e-12);

    std::vector<double> outside = {2.5};
    CHECK_THROWS_AS(evaluate_field(mixed, outside, basis), std::invalid_argument);
}

TEST_CASE("indicator projection matches frozen quadrature values", "[spatial]") {
    // <1_[20/3, 40/3], e_k> on (0, 20), frozen from a high-precision
    // integrator; odd modes vanish by symmetry about x = 10.
    SpectralBasis basis(20.0, 4);
    Field f = project_indicator_spectral(20.0 / 3.0, 40.0 / 3.0, basis);
    CHECK(std::abs(f.c[0] - 1.4907119849998598) < 1e-13);
    CHECK(std::abs(f.c[1]) < 1e-13);
    CHECK(std::abs(f.c[2] - (-1.7434550493976417)) < 1e-13);
    CHECK(std::abs(f.c[3]) < 1e-13);
    CHECK(std::abs(f.c[4] - 0.8717275246988208) < 1e-13);

    CHECK_THROWS_AS(project_indicator_spectral(-1.0, 2.0, basis), std::invalid_argument);
    CHECK_THROWS_AS(project_indicator_spectral(3.0, 2.0, basis), std::invalid_argument);
    CHECK_THROWS_AS(project_indicator_spectral(1.0, 25.0, basis), std::invalid_argument);
}

TEST_CASE("fem mass and stiffness assembly", "[spatial]") {
    FemBasis coarse(1.0, 2);
    REQUIRE(coarse.dim() == 3);
    CHECK(std::abs(coarse.mass().diag[1] - 1.0 / 3.0) < 1e-15);  // interior entry 2h/3
    CHECK(std::abs(coarse.mass().diag[0] - 1.0 / 6.0) < 1e-15);  // half hat h/3
    CHECK(std::abs(coarse.mass().off[0] - 1.0 / 12.0) < 1e-15);  // h/6

    FemBasis basis(3.0, 7);
    std::vector<double> ones(basis.dim(), 1.0), out(basis.dim());
    basis.stiffness().matvec(ones, out);
    for (double v : out) CHECK(std::abs(v) < 1e-13);

    // Mass is positive definite: quadratic form positive on a few vectors.
    std::vector<double> v(basis.dim());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(1.0 + 2.0 * i);
    CHECK(basis.mass().quad_form(v) > 0.0);
    CHECK(basis.stiffness().quad_form(v) >= 0.0);

    CHECK_THROWS_AS(FemBasis(1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(FemBasis(0.0, 4), std::invalid_argument);
}

TEST_CASE("fem smallest nonzero eigenvalue approaches pi^2", "[spatial]") {
    // Inverse iteration on (K + M)^{-1} M with the constant mode deflated:
    // converges to the smallest nonzero generalized eigenvalue of (K, M).
    FemBasis basis(1.0, 200);
    std::size_t d = basis.dim();
    TridiagCholesky shifted = basis.implicit_factor(1.0);  // factors M + K

    std::vector<double> ones(d, 1.0);
    double ones_m = basis.mass().quad_form(ones);
    std::vector<double> v(d), mv(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = std::cos(0.1 + 3.0 * i);
    for (int it = 0; it < 80; ++it) {
        double proj = basis.mass().bilinear(v, ones) / ones_m;
        for (std::size_t i = 0; i < d; ++i) v[i] -= proj;
        basis.mass().matvec(v, mv);
        shifted.solve(mv);
        double nrm = std::sqrt(basis.mass().quad_form(mv));
        for (std::size_t i = 0; i < d; ++i) v[i] = mv[i] / nrm;
    }
    double rayleigh = basis.stiffness().quad_form(v) / basis.mass().quad_form(v);
    CHECK(std::abs(rayleigh - 9.869604401089358) / 9.869604401089358 < 1e-3);
}

TEST_CASE("fem nodal projection is exact on the subspace", "[spatial]") {
    FemBasis basis(1.0, 10);
    std::vector<double> ones(basis.dim(), 1.0);
    Field constant = l2_project_fem(ones, basis);
    for (double c : constant.c) CHECK(std::abs(c - 1.0) < 1e-13);

    std::vector<double> hat(basis.dim(), 0.0);
    hat[3] = 1.0;
    Field back = l2_project_fem(hat, basis);
    for (std::size_t i = 0; i < basis.dim(); ++i)
        CHECK(std::abs(back.c[i] - hat[i]) < 1e-13);

    std::vector<double> wrong(basis.dim() + 2, 0.0);
    CHECK_THROWS_AS(l2_project_fem(wrong, basis), std::invalid_argument);
}

TEST_CASE("fem projection of x^2 has small residual", "[spatial]") {
    FemBasis basis(1.0, 100);
    auto u = [](double x) { return x * x; };
    Field f = l2_project_fem_function(u, basis);
    double err_sq = fine_integral(1.0, 20001, [&](double x) {
        double d = basis.eval_at(f.c, x) - u(x);
        return d * d;
    });
    CHECK(std::sqrt(err_sq) < 1e-3);
}

TEST_CASE("fem indicator projection preserves mean and domain checks", "[spatial]") {
    FemBasis basis(20.0, 40);
    Field f = l2_project_fem_indicator(5.0, 15.0, basis);
    // Mean is preserved: <P1_[a,b], 1> = <1_[a,b], 1> = b - a since constants
    // lie in the subspace.
    std::vector<double> vals(basis.dim());
    basis.synth(f.c, vals);
    CHECK(std::abs(basis.integrate(vals) - 10.0) < 1e-11);
    CHECK_THROWS_AS(l2_project_fem_indicator(15.0, 5.0, basis), std::invalid_argument);
    CHECK_THROWS_AS(l2_project_fem_indicator(-1.0, 5.0, basis), std::invalid_argument);

    Field again = l2_project_fem(f.c, basis);
    for (std::size_t i = 0; i < basis.dim(); ++i)
        CHECK(std::abs(again.c[i] - f.c[i]) < 1e-12);
}

TEST_CASE("fem point evaluation interpolates between nodes", "[spatial]") {
    FemBasis basis(2.0, 4);
    Field f;
    f.kind = BasisKind::FemNodal;
    f.c = {0.0, 1.0, 0.5, -1.0, 2.0};
    CHECK(std::abs(basis.eval_at(f.c, 0.25) - 0.5) < 1e-14);
    CHECK(std::abs(basis.eval_at(f.c, 0.75) - 0.75) < 1e-14);
    CHECK(std::abs(basis.eval_at(f.c, 2.0) - 2.0) < 1e-14);
    CHECK_THROWS_AS(basis.eval_at(f.c, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(basis.eval_at(f.c, 2.1), std::invalid_argument);
}

TEST_CASE("truncated fem variant omits the x=0 node", "[spatial]") {
    FemBasis truncated(1.0, 10, FemVariant::Truncated);
    FemBasis corrected(1.0, 10, FemVariant::Corrected);
    double h = 0.1;
    REQUIRE(truncated.dim() == 10);
    REQUIRE(corrected.dim() == 11);
    CHECK(std::abs(truncated.nodes()[0] - h) < 1e-15);

    // First basis function of the truncated variant is a full hat (mass 2h/3),
    // the corrected variant starts with a half hat (mass h/3).
    CHECK(std::abs(truncated.mass().diag[0] - 2.0 * h / 3.0) < 1e-15);
    CHECK(std::abs(corrected.mass().diag[0] - h / 3.0) < 1e-15);

    // Interpolants vanish at x = 0, so the first stiffness row sum is not 0.
    std::vector<double> anything(truncated.dim(), 1.0), out(truncated.dim());
    CHECK(std::abs(truncated.eval_at(anything, 0.0)) < 1e-15);
    truncated.stiffness().matvec(anything, out);
    CHECK(std::abs(out[0] - 1.0 / h) < 1e-12);

    // Constants are outside the truncated subspace: projecting u = 1 bends the
    // profile near the missing node.
    Field p = l2_project_fem_function([](double) { return 1.0; }, truncated);
    CHECK(std::abs(p.c[0] - 1.0) > 0.02);
    CHECK(std::abs(p.c[5] - 1.0) < 1e-2);
}

TEST_CASE("projection error bound on an H1 test set", "[spatial]") {
    struct Case {
        std::function<double(double)> u;
        std::function<double(double)> du;
    };
    std::vector<Case> cases = {
        {[](double x) { return x; }, [](double) { return 1.0; }},
        {[](double x) { return x * (1.0 - x); }, [](double x) { return 1.0 - 2.0 * x; }},
        {[](double x) { return std::sqrt((x - 0.5) * (x - 0.5) + 0.01); },
         [](double x) { return (x - 0.5) / std::sqrt((x - 0.5) * (x - 0.5) + 0.01); }},
    };
    for (const Case& c : cases) {
        double h1_sq = fine_integral(1.0, 20001, [&](double x) {
            return c.u(x) * c.u(x) + c.du(x) * c.du(x);
        });
        double h1 = std::sqrt(h1_sq);
        for (int n = 4; n <= 256; n *= 2) {
            SpectralBasis basis(1.0, n);
            std::vector<double> samples = sample_on_grid(basis, c.u);
            Field f = project_spectral(samples, basis);
            double err_sq = fine_integral(1.0, 4001, [&](double x) {
                double d = basis.eval_at(f.c, x) - c.u(x);
                return d * d;
            });
            CHECK(std::sqrt(err_sq) <= h1 / (kPi * n));

            // Quadrature contraction: projecting never grows the discrete norm.
            double sample_norm_sq = 0.0;
            for (std::size_t i = 0; i < samples.size(); ++i)
                sample_norm_sq += basis.quad_weights()[i] * samples[i] * samples[i];
            CHECK(norm2_sq(f.c) <= sample_norm_sq + 1e-12);
        }
    }
}
