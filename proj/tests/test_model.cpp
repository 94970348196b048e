#include <cmath>

#include "ddc/model.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ddc;
using ddctest::random_field;

TEST_CASE("sensitivity: closed forms and edge values") {
    SensitivitySpec f2{SensitivityForm::F2, 1.0, 2.0};
    CHECK(sensitivity(0.0, f2) == 0.0);
    CHECK(sensitivity(1.0, f2) == doctest::Approx(1.0));

    SensitivitySpec f1{SensitivityForm::F1, 2.0, 1.5};
    CHECK(sensitivity(0.0, f1) == 0.0);
    CHECK(sensitivity(3.0, f1) == doctest::Approx(12.0));   // 2 * 3 * 4^0.5

    SensitivitySpec a0{SensitivityForm::F2, 1.0, 0.0};
    CHECK(sensitivity(0.0, a0) == 0.0);

    CHECK_THROWS(sensitivity(-0.1, f2));
}

TEST_CASE("sensitivity is nonnegative and nondecreasing for alpha >= 1") {
    for (SensitivityForm form : {SensitivityForm::F1, SensitivityForm::F2}) {
        for (double alpha : {1.0, 1.3, 2.0, 2.5}) {
            SensitivitySpec s{form, 0.7, alpha};
            double prev = 0.0;
            for (int i = 0; i <= 100; ++i) {
                const double u = 0.05 * i;
                const double f = sensitivity(u, s);
                CHECK(f >= 0.0);
                CHECK(f >= prev - 1e-14);
                prev = f;
            }
        }
    }
}

TEST_CASE("F1 dominates F2 for alpha >= 1 at equal parameters") {
    for (double alpha : {1.0, 1.5, 2.0}) {
        SensitivitySpec s1{SensitivityForm::F1, 1.0, alpha};
        SensitivitySpec s2{SensitivityForm::F2, 1.0, alpha};
        for (int i = 1; i <= 50; ++i) {
            const double u = 0.1 * i;
            const double factor = std::pow((u + 1.0) / u, alpha - 1.0);
            CHECK(factor >= 1.0);
            CHECK(sensitivity(u, s1) >= sensitivity(u, s2) - 1e-12);
        }
    }
}

TEST_CASE("validate_params: admissibility case split") {
    auto mk = [](int dim, double m, SensitivityForm form, double alpha) {
        ModelParams p;
        p.dimension = dim;
        p.m = m;
        p.sensitivity_form = form;
        p.alpha = alpha;
        p.epsilon = m < 3.0 ? 0.1 : 0.0;
        return p;
    };

    CHECK(validate_params(mk(2, 2.0, SensitivityForm::F2, 1.8)).regime == Regime::WEAK_2D);
    CHECK(validate_params(mk(1, 2.0, SensitivityForm::F2, 2.0)).regime == Regime::WEAK_1D);
    CHECK(validate_params(mk(2, 2.0, SensitivityForm::F2, 2.0)).regime == Regime::OUT_OF_THEORY);

    // closed vs open lower endpoint
    CHECK(validate_params(mk(1, 1.5, SensitivityForm::F1, 0.5)).regime == Regime::WEAK_1D);
    CHECK(validate_params(mk(2, 1.5, SensitivityForm::F1, 0.5)).regime == Regime::OUT_OF_THEORY);

    // classical range carries the positivity requirement
    const auto cls = validate_params(mk(1, 3.5, SensitivityForm::F2, 2.6));
    CHECK(cls.regime == Regime::CLASSICAL_1D);
    CHECK(cls.requires_positive_u0);
    CHECK(validate_params(mk(2, 3.5, SensitivityForm::F2, 2.6)).regime == Regime::CLASSICAL_2D);

    // wrong form for the case
    CHECK(validate_params(mk(1, 1.5, SensitivityForm::F2, 1.0)).regime == Regime::OUT_OF_THEORY);
    CHECK(validate_params(mk(1, 2.5, SensitivityForm::F1, 1.8)).regime == Regime::OUT_OF_THEORY);

    // the 1D acceptance region contains the 2D one
    ddctest::Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const double m = rng.uniform(1.0, 3.999);
        const double a = rng.uniform(0.0, 4.0);
        for (SensitivityForm form : {SensitivityForm::F1, SensitivityForm::F2}) {
            const bool in2d = validate_params(mk(2, m, form, a)).in_theory();
            const bool in1d = validate_params(mk(1, m, form, a)).in_theory();
            if (in2d) CHECK(in1d);
        }
    }
}

TEST_CASE("regularize_initial follows the m-dependent rule") {
    const Grid g = make_grid(1, 16, 1, 1.0, 1.0);
    ModelParams p;
    p.dimension = 1;

    p.m = 2.0;
    p.epsilon = 0.1;
    const Field u1 = regularize_initial(Field(g, 1.0), p);
    for (double v : u1.data) CHECK(v == doctest::Approx(1.1).epsilon(1e-15));

    p.m = 3.5;
    p.epsilon = 0.0;
    p.alpha = 2.6;   // classical range
    const Field u2 = regularize_initial(Field(g, 1.0), p);
    for (double v : u2.data) CHECK(v == 1.0);

    Field with_zero(g, 1.0);
    with_zero[3] = 0.0;
    CHECK_THROWS(regularize_initial(with_zero, p));

    // out-of-theory m >= 3 run stays runnable
    p.alpha = 0.1;
    CHECK_NOTHROW(regularize_initial(with_zero, p));
}

TEST_CASE("model scope validation") {
    ModelParams p;
    p.m = 4.0;
    CHECK_THROWS(validate_model_scope(p));
    p.m = 2.0;
    p.epsilon = 0.0;
    CHECK_THROWS(validate_model_scope(p));   // epsilon 0 needs m >= 3
    p.epsilon = 1.0;
    CHECK_THROWS(validate_model_scope(p));
    p.epsilon = 0.2;
    CHECK_NOTHROW(validate_model_scope(p));
}

TEST_CASE("u_fluxes: constants, pure-diffusion hand check, conservation") {
    const Grid g = make_grid(1, 16, 1, 1.0, 1.0);
    ModelParams p;
    p.dimension = 1;
    p.m = 2.0;
    p.alpha = 1.5;
    p.c_f = 1.0;
    p.epsilon = 0.1;

    const FaceFluxes f0 = u_fluxes(Field(g, 2.0), Field(g, 3.0), p);
    for (double v : f0.fx) CHECK(v == 0.0);

    // C_f = 0 and constant v: a step in u gives mean-mobility times jump/h
    ModelParams pd = p;
    pd.c_f = 0.0;
    Field ustep(g, 1.0);
    for (int i = g.nx / 2; i < g.nx; ++i) ustep[i] = 2.0;
    const Field vconst(g, 0.5);
    const FaceFluxes fd = u_fluxes(ustep, vconst, pd);
    const int face = g.nx / 2 - 1;   // between 1.0 and 2.0
    const double mean_mobility = 0.5 * (1.0 * 0.5 + 2.0 * 0.5);
    const double expect = mean_mobility * (2.0 - 1.0) / g.hx;
    CHECK(fd.fx[face] == doctest::Approx(expect).epsilon(1e-12));

    // conservation of the flux part for arbitrary states
    const Grid g2 = make_grid(2, 12, 12, 1.0, 1.0);
    const Field u = random_field(g2, 31, 0.0, 2.0);
    const Field v = random_field(g2, 32, 0.5, 1.5);
    ModelParams p2 = p;
    p2.dimension = 2;
    CHECK(std::abs(integrate(divergence(u_fluxes(u, v, p2)))) < 1e-11);

    CHECK_THROWS(u_fluxes(u, Field(g2, 0.0), p2));
}

TEST_CASE("u_rhs and v_consumption: homogeneous reductions") {
    const Grid g = make_grid(1, 16, 1, 1.0, 1.0);
    ModelParams p;
    p.dimension = 1;
    p.m = 2.0;
    p.alpha = 1.5;
    p.epsilon = 0.1;

    p.ell = 0.0;
    const Field r0 = u_rhs(Field(g, 2.0), Field(g, 3.0), p);
    for (double v : r0.data) CHECK(v == 0.0);

    p.ell = 1.0;
    const Field r1 = u_rhs(Field(g, 2.0), Field(g, 3.0), p);
    for (double v : r1.data) CHECK(v == doctest::Approx(6.0).epsilon(1e-15));

    const Field c = v_consumption(Field(g, 2.0), Field(g, 3.0));
    for (double v : c.data) CHECK(v == doctest::Approx(6.0).epsilon(1e-15));

    // ell = 0 implies exact mass neutrality of the rhs
    const Grid g2 = make_grid(2, 10, 10, 1.0, 1.0);
    ModelParams p2 = p;
    p2.dimension = 2;
    p2.ell = 0.0;
    const Field u = random_field(g2, 41, 0.0, 1.5);
    const Field v = random_field(g2, 42, 0.5, 2.0);
    CHECK(std::abs(integrate(u_rhs(u, v, p2))) < 1e-11);
}

TEST_CASE("initial data records K and validates positivity") {
    const Grid g = make_grid(1, 32, 1, 1.0, 1.0);
    Field u0(g, 0.0);
    u0[5] = 2.0;
    const Field v0(g, 1.5);
    const InitialData init(u0, v0);
    CHECK(init.K == doctest::Approx(2.0 + 1.5 + 0.0).epsilon(1e-14));

    CHECK_THROWS(InitialData(Field(g, 0.0), v0));        // u0 identically zero
    CHECK_THROWS(InitialData(u0, Field(g, 0.0)));        // v0 not positive
    Field uneg(g, 1.0);
    uneg[0] = -0.5;
    CHECK_THROWS(InitialData(uneg, v0));
}
