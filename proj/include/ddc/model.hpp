#pragma once

// Model definition: parameters, sensitivity function, admissibility
// classification against the proven (m, alpha) ranges, initial-data handling
// and spatial right-hand-side assembly.
//
// The system is
//   u_t = div(u^{m-1} v grad u) - div(f(u) v grad v) + ell u v
//   v_t = lap v - u v
// with no-flux boundaries; f is one of two canonical sensitivity forms.

#include <string>

#include "ddc/grid.hpp"

namespace ddc {

enum class SensitivityForm { F1, F2 };   // F1: c_f u (u+1)^(a-1), F2: c_f u^a

struct SensitivitySpec {
    SensitivityForm form = SensitivityForm::F2;
    double c_f = 1.0;     // > 0
    double alpha = 1.0;   // >= 0
};

struct ModelParams {
    double m = 2.0;         // diffusion exponent, 1 <= m < 4
    double alpha = 1.0;     // sensitivity exponent, >= 0
    double ell = 0.0;       // growth coefficient, >= 0
    double c_f = 1.0;       // sensitivity coefficient, > 0
    SensitivityForm sensitivity_form = SensitivityForm::F2;
    double epsilon = 0.1;   // initial-data regularization, in [0,1); 0 only for m >= 3
    int dimension = 1;

    SensitivitySpec sensitivity() const { return SensitivitySpec{sensitivity_form, c_f, alpha}; }
};

// Rejects parameters outside the representable scope (m, epsilon, signs).
// Admissibility beyond that is classification, not rejection.
void validate_model_scope(const ModelParams& p);

enum class Regime { WEAK_1D, WEAK_2D, CLASSICAL_1D, CLASSICAL_2D, OUT_OF_THEORY };

std::string to_string(Regime r);

struct AdmissibilityVerdict {
    Regime regime = Regime::OUT_OF_THEORY;
    bool requires_positive_u0 = false;
    std::string notes;

    bool in_theory() const { return regime != Regime::OUT_OF_THEORY; }
};

// f(u) for one of the two canonical forms; f(0) = 0 always. Rejects negative u.
double sensitivity(double u_value, const SensitivitySpec& spec);

// Case split of the proven global-existence ranges:
//   (i)   1 <= m < 2, form F1, m-1 .. m
//   (ii)  2 <= m < 3, form F2, m-1 .. m/2+1
//   (iii) 3 <= m < 4, form F2, m-1 .. m/2+1, classical, needs u0 > 0
// The alpha range is closed in 1D and open in 2D. Everything else is
// OUT_OF_THEORY (still runnable, flagged in reports).
AdmissibilityVerdict validate_params(const ModelParams& p);

struct InitialData {
    Field u0;      // nonnegative, not identically zero
    Field v0;      // strictly positive
    double K;      // sup u0 + sup v0 + sup |grad ln v0|, discrete

    InitialData(Field u0_in, Field v0_in);   // validates and computes K
};

// u0 + epsilon for 1 <= m < 3; unchanged for 3 <= m < 4. A classical-regime
// run with min(u0) == 0 is rejected.
Field regularize_initial(const Field& u0, const ModelParams& p);

// Total face flux of the u equation: arithmetic-mean mobility u^{m-1} v times
// the face gradient of u, minus the chemotactic part with f(u) v upwinded by
// the sign of the face gradient of v. Boundary faces zero.
FaceFluxes u_fluxes(const Field& u, const Field& v, const ModelParams& p);

// divergence(u_fluxes) + ell u v per cell.
Field u_rhs(const Field& u, const Field& v, const ModelParams& p);

// u v per cell, the sink consumed by the implicit v step.
Field v_consumption(const Field& u, const Field& v);

// Helper shared by flux assembly and step control: u^{m-1} v per cell.
Field mobility_field(const Field& u, const Field& v, double m);

// f(u) v per cell.
Field chemo_coefficient_field(const Field& u, const Field& v, const SensitivitySpec& spec);

} // namespace ddc
