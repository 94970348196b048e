#include "ddc/model.hpp"

#include <cmath>
#include <stdexcept>

namespace ddc {

void validate_model_scope(const ModelParams& p) {
    if (!(p.m >= 1.0 && p.m < 4.0))
        throw std::invalid_argument("model: m must satisfy 1 <= m < 4");
    if (!(p.alpha >= 0.0))
        throw std::invalid_argument("model: alpha must be >= 0");
    if (!(p.ell >= 0.0))
        throw std::invalid_argument("model: ell must be >= 0");
    if (!(p.c_f > 0.0))
        throw std::invalid_argument("model: c_f must be > 0");
    if (!(p.epsilon >= 0.0 && p.epsilon < 1.0))
        throw std::invalid_argument("model: epsilon must be in [0,1)");
    if (p.epsilon == 0.0 && p.m < 3.0)
        throw std::invalid_argument("model: epsilon = 0 is only allowed for m >= 3");
    if (p.dimension != 1 && p.dimension != 2)
        throw std::invalid_argument("model: dimension must be 1 or 2");
}

double sensitivity(double u_value, const SensitivitySpec& spec) {
    if (u_value < 0.0)
        throw std::invalid_argument("sensitivity: u must be nonnegative");
    if (u_value == 0.0) return 0.0;
    if (spec.form == SensitivityForm::F1)
        return spec.c_f * u_value * std::pow(u_value + 1.0, spec.alpha - 1.0);
    return spec.c_f * std::pow(u_value, spec.alpha);
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::WEAK_1D: return "WEAK_1D";
        case Regime::WEAK_2D: return "WEAK_2D";
        case Regime::CLASSICAL_1D: return "CLASSICAL_1D";
        case Regime::CLASSICAL_2D: return "CLASSICAL_2D";
        case Regime::OUT_OF_THEORY: return "OUT_OF_THEORY";
    }
    return "OUT_OF_THEORY";
}

AdmissibilityVerdict validate_params(const ModelParams& p) {
    AdmissibilityVerdict v;
    const double m = p.m;
    const double a = p.alpha;
    const bool one_d = (p.dimension == 1);

    const double lo = m - 1.0;
    double hi = 0.0;
    bool form_ok = false;
    bool classical = false;
    if (m >= 1.0 && m < 2.0) {
        hi = m;
        form_ok = (p.sensitivity_form == SensitivityForm::F1);
    } else if (m >= 2.0 && m < 3.0) {
        hi = 0.5 * m + 1.0;
        form_ok = (p.sensitivity_form == SensitivityForm::F2);
    } else if (m >= 3.0 && m < 4.0) {
        hi = 0.5 * m + 1.0;
        form_ok = (p.sensitivity_form == SensitivityForm::F2);
        classical = true;
    } else {
        v.notes = "m outside [1,4)";
        return v;
    }

    const bool alpha_ok = one_d ? (a >= lo && a <= hi) : (a > lo && a < hi);
    if (!form_ok) {
        v.notes = "sensitivity form outside the proven case for this m";
        return v;
    }
    if (!alpha_ok) {
        v.notes = one_d ? "alpha outside [m-1, min(m, m/2+1)]"
                        : "alpha outside (m-1, min(m, m/2+1))";
        return v;
    }

    if (classical) {
        v.regime = one_d ? Regime::CLASSICAL_1D : Regime::CLASSICAL_2D;
        v.requires_positive_u0 = true;
        v.notes = "classical range, requires u0 > 0";
    } else {
        v.regime = one_d ? Regime::WEAK_1D : Regime::WEAK_2D;
        v.notes = "weak-solution range";
    }
    return v;
}

InitialData::InitialData(Field u0_in, Field v0_in) : u0(std::move(u0_in)), v0(std::move(v0_in)), K(0.0) {
    if (u0.grid != v0.grid)
        throw std::invalid_argument("initial data: u0 and v0 must share a grid");
    if (field_min(u0) < 0.0)
        throw std::invalid_argument("initial data: u0 must be nonnegative");
    if (!(field_max(u0) > 0.0))
        throw std::invalid_argument("initial data: u0 must not be identically zero");
    if (!(field_min(v0) > 0.0))
        throw std::invalid_argument("initial data: v0 must be strictly positive");
    K = field_max(u0) + field_max(v0) + sup_face_gradient(map_log(v0));
}

Field regularize_initial(const Field& u0, const ModelParams& p) {
    validate_model_scope(p);
    if (field_min(u0) < 0.0)
        throw std::invalid_argument("regularize_initial: u0 must be nonnegative");
    if (p.m < 3.0) {
        Field out = u0;
        for (double& x : out.data) x += p.epsilon;
        return out;
    }
    const AdmissibilityVerdict v = validate_params(p);
    if (v.requires_positive_u0 && !(field_min(u0) > 0.0))
        throw std::invalid_argument("regularize_initial: classical range 3 <= m < 4 requires u0 > 0 everywhere");
    return u0;
}

Field mobility_field(const Field& u, const Field& v, double m) {
    Field out(u.grid);
    if (m == 1.0) {
        for (int k = 0; k < out.size(); ++k) out[k] = v[k];
    } else if (m == 2.0) {
        for (int k = 0; k < out.size(); ++k) out[k] = u[k] * v[k];
    } else {
        for (int k = 0; k < out.size(); ++k) out[k] = std::pow(u[k], m - 1.0) * v[k];
    }
    return out;
}

Field chemo_coefficient_field(const Field& u, const Field& v, const SensitivitySpec& spec) {
    Field out(u.grid);
    for (int k = 0; k < out.size(); ++k) out[k] = sensitivity(u[k], spec) * v[k];
    return out;
}

namespace {

void check_state_fields(const Field& u, const Field& v) {
    if (u.grid != v.grid)
        throw std::invalid_argument("u and v must share a grid");
    if (field_min(u) < 0.0)
        throw std::invalid_argument("u must be nonnegative");
    if (!(field_min(v) > 0.0))
        throw std::invalid_argument("v must be strictly positive");
}

} // namespace

FaceFluxes u_fluxes(const Field& u, const Field& v, const ModelParams& p) {
    check_state_fields(u, v);
    const Grid& g = u.grid;
    const Field mob = mobility_field(u, v, p.m);
    const Field chemo = chemo_coefficient_field(u, v, p.sensitivity());
    FaceFluxes out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            const int l = g.idx(i, j), r = g.idx(i + 1, j);
            const double gu = (u[r] - u[l]) / g.hx;
            const double gv = (v[r] - v[l]) / g.hx;
            const double a = 0.5 * (mob[l] + mob[r]);
            const double w = gv > 0.0 ? chemo[l] : chemo[r];   // donor cell
            out.fx[static_cast<size_t>(out.xidx(i, j))] = a * gu - w * gv;
        }
    }
    if (g.dimension == 2) {
        for (int j = 0; j + 1 < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const int l = g.idx(i, j), r = g.idx(i, j + 1);
                const double gu = (u[r] - u[l]) / g.hy;
                const double gv = (v[r] - v[l]) / g.hy;
                const double a = 0.5 * (mob[l] + mob[r]);
                const double w = gv > 0.0 ? chemo[l] : chemo[r];
                out.fy[static_cast<size_t>(out.yidx(i, j))] = a * gu - w * gv;
            }
        }
    }
    return out;
}

Field u_rhs(const Field& u, const Field& v, const ModelParams& p) {
    Field out = divergence(u_fluxes(u, v, p));
    if (p.ell != 0.0) {
        for (int k = 0; k < out.size(); ++k) out[k] += p.ell * u[k] * v[k];
    }
    return out;
}

Field v_consumption(const Field& u, const Field& v) {
    check_state_fields(u, v);
    Field out(u.grid);
    for (int k = 0; k < out.size(); ++k) out[k] = u[k] * v[k];
    return out;
}

} // namespace ddc
