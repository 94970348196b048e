#include <algorithm>
#include <cmath>

#include "ddc/grid.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ddc;
using ddctest::random_field;

TEST_CASE("make_grid computes spacings and rejects bad input") {
    const Grid g1 = make_grid(1, 64, 1, 1.0, 1.0);
    CHECK(g1.hx == doctest::Approx(1.0 / 64).epsilon(1e-15));
    CHECK(g1.cells() == 64);

    const Grid g2 = make_grid(2, 32, 32, 2.0, 1.0);
    CHECK(g2.hx == doctest::Approx(1.0 / 16).epsilon(1e-15));
    CHECK(g2.hy == doctest::Approx(1.0 / 32).epsilon(1e-15));

    CHECK_THROWS(make_grid(3, 10, 10, 1.0, 1.0));
    CHECK_THROWS(make_grid(1, 0, 1, 1.0, 1.0));
    CHECK_THROWS(make_grid(2, 16, 16, -1.0, 1.0));
    CHECK_THROWS(make_grid(1, 3, 1, 1.0, 1.0));
}

TEST_CASE("face_gradient: constants, linears, independent recomputation") {
    const Grid g = make_grid(1, 32, 1, 1.0, 1.0);

    Field c(g, 3.5);
    const FaceFluxes gc = face_gradient(c);
    for (double v : gc.fx) CHECK(v == 0.0);

    Field lin(g);
    for (int i = 0; i < g.nx; ++i) lin[i] = g.center_x(i);
    const FaceFluxes gl = face_gradient(lin);
    for (double v : gl.fx) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));

    const Grid g2 = make_grid(2, 12, 9, 1.0, 2.0);
    const Field r = random_field(g2, 7, -1.0, 1.0);
    const FaceFluxes gr = face_gradient(r);
    for (int j = 0; j < g2.ny; ++j)
        for (int i = 0; i + 1 < g2.nx; ++i)
            CHECK(gr.fx[gr.xidx(i, j)] == (r.at(i + 1, j) - r.at(i, j)) / g2.hx);
    for (int j = 0; j + 1 < g2.ny; ++j)
        for (int i = 0; i < g2.nx; ++i)
            CHECK(gr.fy[gr.yidx(i, j)] == (r.at(i, j + 1) - r.at(i, j)) / g2.hy);
}

TEST_CASE("divergence telescopes to zero and matches the Neumann Laplacian stencil") {
    const Grid g = make_grid(2, 16, 16, 1.0, 1.0);

    FaceFluxes zero(g);
    const Field dz = divergence(zero);
    for (double v : dz.data) CHECK(v == 0.0);

    // arbitrary interior fluxes integrate to zero
    FaceFluxes f(g);
    ddctest::Rng rng(11);
    for (double& v : f.fx) v = rng.uniform(-2.0, 2.0);
    for (double& v : f.fy) v = rng.uniform(-2.0, 2.0);
    CHECK(std::abs(integrate(divergence(f))) < 1e-12 * 4.0 * g.cells());

    // divergence(face_gradient(f)) against a separately coded 5-point stencil
    const Field u = random_field(g, 23, 0.5, 2.0);
    const Field lap = divergence(face_gradient(u));
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double uc = u.at(i, j);
            const double uw = i > 0 ? u.at(i - 1, j) : uc;
            const double ue = i + 1 < g.nx ? u.at(i + 1, j) : uc;
            const double us = j > 0 ? u.at(i, j - 1) : uc;
            const double un = j + 1 < g.ny ? u.at(i, j + 1) : uc;
            const double expect = (uw - 2.0 * uc + ue) / (g.hx * g.hx) + (us - 2.0 * uc + un) / (g.hy * g.hy);
            CHECK(lap.at(i, j) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("integrate: constants and a mean-zero cosine") {
    const Grid g = make_grid(1, 64, 1, 1.0, 1.0);
    CHECK(integrate(Field(g, 2.25)) == doctest::Approx(2.25).epsilon(1e-14));
    CHECK(integrate(Field(g, 0.0)) == 0.0);

    const Grid g256 = make_grid(1, 256, 1, 1.0, 1.0);
    Field f(g256);
    for (int i = 0; i < g256.nx; ++i) f[i] = std::cos(M_PI * g256.center_x(i));
    CHECK(std::abs(integrate(f)) <= 1e-3);
}

TEST_CASE("summation by parts: integrate(g div grad f) == -sum_faces grad f . grad g dV") {
    for (int dim : {1, 2}) {
        const Grid g = dim == 1 ? make_grid(1, 48, 1, 1.0, 1.0) : make_grid(2, 16, 12, 1.5, 1.0);
        const Field f = random_field(g, 101, -1.0, 1.0);
        const Field w = random_field(g, 102, -1.0, 1.0);
        const FaceFluxes gf = face_gradient(f);
        const FaceFluxes gw = face_gradient(w);
        const Field dgf = divergence(gf);

        double lhs = 0.0;
        for (int k = 0; k < g.cells(); ++k) lhs += w[k] * dgf[k];
        lhs *= g.cell_area();

        double rhs = 0.0;
        for (size_t k = 0; k < gf.fx.size(); ++k) rhs += gf.fx[k] * gw.fx[k];
        for (size_t k = 0; k < gf.fy.size(); ++k) rhs += gf.fy[k] * gw.fy[k];
        rhs *= g.cell_area();

        CHECK(lhs == doctest::Approx(-rhs).epsilon(1e-12));
    }
}

TEST_CASE("hessian_log: constants, manufactured 1D profile, independent Frobenius recomputation") {
    const Grid g = make_grid(1, 64, 1, 1.0, 1.0);

    const HessianField hc = hessian_log(Field(g, 4.0));
    for (double v : hc.xx.data) CHECK(v == 0.0);

    // v = exp(x^2/2): (ln v)_xx = 1
    Field v(g);
    for (int i = 0; i < g.nx; ++i) v[i] = std::exp(0.5 * g.center_x(i) * g.center_x(i));
    const HessianField h = hessian_log(v);
    for (int i = 1; i + 1 < g.nx; ++i) CHECK(h.xx[i] == doctest::Approx(1.0).epsilon(1e-3));

    CHECK_THROWS(hessian_log(Field(g, -1.0)));
    CHECK_THROWS(hessian_log(Field(g, 0.0)));

    const Grid g2 = make_grid(2, 10, 14, 1.0, 1.0);
    const Field r = random_field(g2, 55, 0.5, 3.0);
    const Field frob = frobenius_sq(hessian_log(r));
    // recompute from the log values with separately written differences
    Field w(g2);
    for (int k = 0; k < g2.cells(); ++k) w[k] = std::log(r[k]);
    auto wat = [&](int i, int j) {
        i = std::clamp(i, 0, g2.nx - 1);
        j = std::clamp(j, 0, g2.ny - 1);
        return w.at(i, j);
    };
    for (int j = 0; j < g2.ny; ++j) {
        for (int i = 0; i < g2.nx; ++i) {
            const double wxx = (wat(i - 1, j) - 2.0 * wat(i, j) + wat(i + 1, j)) / (g2.hx * g2.hx);
            const double wyy = (wat(i, j - 1) - 2.0 * wat(i, j) + wat(i, j + 1)) / (g2.hy * g2.hy);
            const double wxy = (wat(i + 1, j + 1) - wat(i + 1, j - 1) - wat(i - 1, j + 1) + wat(i - 1, j - 1)) /
                               (4.0 * g2.hx * g2.hy);
            CHECK(frob.at(i, j) == doctest::Approx(wxx * wxx + wyy * wyy + 2.0 * wxy * wxy).epsilon(1e-12));
        }
    }
}

TEST_CASE("cell_gradient_sq: constants, linear profile, brute-force recomputation") {
    const Grid g = make_grid(1, 32, 1, 2.0, 1.0);
    const Field cg = cell_gradient_sq(Field(g, 1.7));
    for (double v : cg.data) CHECK(v == 0.0);

    const double s = 0.75;
    Field lin(g);
    for (int i = 0; i < g.nx; ++i) lin[i] = s * g.center_x(i);
    const Field gl = cell_gradient_sq(lin);
    for (int i = 1; i + 1 < g.nx; ++i) CHECK(gl[i] == doctest::Approx(s * s).epsilon(1e-12));
    CHECK(gl[0] == doctest::Approx(0.5 * s * s).epsilon(1e-12));
    CHECK(gl[g.nx - 1] == doctest::Approx(0.5 * s * s).epsilon(1e-12));

    const Grid g2 = make_grid(2, 9, 7, 1.0, 1.0);
    const Field r = random_field(g2, 77, -2.0, 2.0);
    const Field got = cell_gradient_sq(r);
    for (int j = 0; j < g2.ny; ++j) {
        for (int i = 0; i < g2.nx; ++i) {
            auto fg = [&](int a, int b, int c, int d, double h) {
                return (r.at(c, d) - r.at(a, b)) / h;
            };
            const double gw = i > 0 ? fg(i - 1, j, i, j, g2.hx) : 0.0;
            const double ge = i + 1 < g2.nx ? fg(i, j, i + 1, j, g2.hx) : 0.0;
            const double gs = j > 0 ? fg(i, j - 1, i, j, g2.hy) : 0.0;
            const double gn = j + 1 < g2.ny ? fg(i, j, i, j + 1, g2.hy) : 0.0;
            const double expect = 0.5 * (gw * gw + ge * ge) + 0.5 * (gs * gs + gn * gn);
            CHECK(got.at(i, j) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("operators are mirror-symmetric") {
    const Grid g = make_grid(2, 12, 8, 1.0, 1.0);
    const Field f = random_field(g, 5, 0.5, 2.0);
    const Field fm = ddctest::mirror_x(f);

    CHECK(ddctest::max_abs_diff(ddctest::mirror_x(divergence(face_gradient(f))),
                                divergence(face_gradient(fm))) == 0.0);
    CHECK(ddctest::max_abs_diff(ddctest::mirror_x(cell_gradient_sq(f)), cell_gradient_sq(fm)) == 0.0);
    CHECK(ddctest::max_abs_diff(ddctest::mirror_x(frobenius_sq(hessian_log(f))),
                                frobenius_sq(hessian_log(fm))) == 0.0);
    // summation order differs between the two, so only up to roundoff
    CHECK(integrate(f) == doctest::Approx(integrate(fm)).epsilon(1e-14));
}

TEST_CASE("operators are translation-equivariant on interior-supported fields") {
    const Grid g = make_grid(2, 20, 16, 1.0, 1.0);
    Field f(g);
    ddctest::Rng rng(99);
    // zero margin of 3 cells so shifted stencils never touch the boundary
    for (int j = 3; j < g.ny - 4; ++j)
        for (int i = 3; i < g.nx - 4; ++i) f.at(i, j) = rng.uniform(0.5, 2.0);
    Field shifted(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) shifted.at(i, j) = f.at(i - 1, j);

    const Field lap = divergence(face_gradient(f));
    const Field lap_s = divergence(face_gradient(shifted));
    const Field gsq = cell_gradient_sq(f);
    const Field gsq_s = cell_gradient_sq(shifted);
    const HessianField h = hessian(f);
    const HessianField h_s = hessian(shifted);
    for (int j = 1; j + 1 < g.ny; ++j) {
        for (int i = 2; i + 1 < g.nx; ++i) {
            CHECK(lap_s.at(i, j) == lap.at(i - 1, j));
            CHECK(gsq_s.at(i, j) == gsq.at(i - 1, j));
            CHECK(h_s.xx.at(i, j) == h.xx.at(i - 1, j));
            CHECK(h_s.xy.at(i, j) == h.xy.at(i - 1, j));
        }
    }
}

TEST_CASE("hessian_log and cell_gradient_sq converge at order >= 1.9 on smooth fields") {
    auto run_level = [](int n, double* err_hess, double* err_grad) {
        const Grid g = make_grid(2, n, n, 1.0, 1.0);
        const double a = 0.8;
        Field v(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                v.at(i, j) = std::exp(a * std::cos(M_PI * g.center_x(i)) * std::cos(M_PI * g.center_y(j)));
        const HessianField h = hessian_log(v);
        const Field gsq = cell_gradient_sq(v);
        double eh = 0.0, eg = 0.0;
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.center_x(i), y = g.center_y(j);
                const double wxx = -a * M_PI * M_PI * std::cos(M_PI * x) * std::cos(M_PI * y);
                const double wxy = a * M_PI * M_PI * std::sin(M_PI * x) * std::sin(M_PI * y);
                eh = std::max(eh, std::abs(h.xx.at(i, j) - wxx));
                eh = std::max(eh, std::abs(h.xy.at(i, j) - wxy));
                // |grad v|^2 analytic
                const double vv = v.at(i, j);
                const double vx = -a * M_PI * std::sin(M_PI * x) * std::cos(M_PI * y) * vv;
                const double vy = -a * M_PI * std::cos(M_PI * x) * std::sin(M_PI * y) * vv;
                eg = std::max(eg, std::abs(gsq.at(i, j) - (vx * vx + vy * vy)));
            }
        }
        *err_hess = eh;
        *err_grad = eg;
    };

    double eh[3], eg[3];
    const int ns[3] = {32, 64, 128};
    for (int l = 0; l < 3; ++l) run_level(ns[l], &eh[l], &eg[l]);
    const double oh1 = std::log2(eh[0] / eh[1]);
    const double oh2 = std::log2(eh[1] / eh[2]);
    const double og1 = std::log2(eg[0] / eg[1]);
    const double og2 = std::log2(eg[1] / eg[2]);
    CHECK(oh1 >= 1.9);
    CHECK(oh2 >= 1.9);
    CHECK(og1 >= 1.9);
    CHECK(og2 >= 1.9);
}
