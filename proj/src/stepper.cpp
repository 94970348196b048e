#include "ddc/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ddc {

void StepControl::validate() const {
    if (!(dt_min > 0.0) || !(dt_init > 0.0) || !(dt_max > 0.0))
        throw std::invalid_argument("step control: dt bounds must be positive");
    if (!(dt_min <= dt_init && dt_init <= dt_max))
        throw std::invalid_argument("step control: need dt_min <= dt_init <= dt_max");
    if (!(safety > 0.0 && safety <= 1.0))
        throw std::invalid_argument("step control: safety must be in (0,1]");
    if (!(t_end > 0.0))
        throw std::invalid_argument("step control: t_end must be positive");
    if (!(linear_solve_rtol > 0.0))
        throw std::invalid_argument("step control: linear_solve_rtol must be positive");
    if (max_halvings_per_step < 0 || cg_max_iters < 1)
        throw std::invalid_argument("step control: iteration caps must be positive");
}

std::string to_string(StopCause c) {
    switch (c) {
        case StopCause::REACHED_T_END: return "REACHED_T_END";
        case StopCause::BLOWUP_SUSPECT_SUP_U: return "BLOWUP_SUSPECT_SUP_U";
        case StopCause::DT_UNDERFLOW: return "DT_UNDERFLOW";
        case StopCause::LINEAR_SOLVE_FAILURE: return "LINEAR_SOLVE_FAILURE";
    }
    return "REACHED_T_END";
}

namespace {
constexpr double kTiny = 1e-300;
}

double stable_dt(const Field& u, const Field& v, const ModelParams& p, const StepControl& ctrl, double t) {
    const Grid& g = u.grid;
    const Field mob = mobility_field(u, v, p.m);
    const Field chemo = chemo_coefficient_field(u, v, p.sensitivity());
    const double dim = static_cast<double>(g.dimension);

    double face_min = std::numeric_limits<double>::infinity();
    auto face_bound = [&](int l, int r, double h) {
        const double gv = (v[r] - v[l]) / h;
        const double mobility = 0.5 * (mob[l] + mob[r]);
        const double speed = (chemo[l] + chemo[r]) * std::abs(gv) / (u[l] + u[r] + 1e-14);
        const double denom = 2.0 * dim * (mobility + speed * h + kTiny);
        if (denom > 0.0) face_min = std::min(face_min, h * h / denom);
    };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) face_bound(g.idx(i, j), g.idx(i + 1, j), g.hx);
    if (g.dimension == 2)
        for (int j = 0; j + 1 < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) face_bound(g.idx(i, j), g.idx(i, j + 1), g.hy);

    double dt = ctrl.safety * face_min;
    dt = std::min(dt, ctrl.dt_max);
    dt = std::max(dt, ctrl.dt_min);
    if (t + dt > ctrl.t_end) dt = ctrl.t_end - t;
    return dt;
}

namespace {

// out = x - dt div(grad x) + dt u x, gather form per cell
void apply_helmholtz(const Field& x, const Field& u, double dt, FaceFluxes& grad_scratch, Field& out) {
    const Grid& g = x.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i)
            grad_scratch.fx[static_cast<size_t>(grad_scratch.xidx(i, j))] = (x.at(i + 1, j) - x.at(i, j)) / g.hx;
    if (g.dimension == 2)
        for (int j = 0; j + 1 < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                grad_scratch.fy[static_cast<size_t>(grad_scratch.yidx(i, j))] = (x.at(i, j + 1) - x.at(i, j)) / g.hy;

    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double fe = (i + 1 < g.nx) ? grad_scratch.fx[static_cast<size_t>(grad_scratch.xidx(i, j))] : 0.0;
            const double fw = (i > 0) ? grad_scratch.fx[static_cast<size_t>(grad_scratch.xidx(i - 1, j))] : 0.0;
            double lap = (fe - fw) / g.hx;
            if (g.dimension == 2) {
                const double fn = (j + 1 < g.ny) ? grad_scratch.fy[static_cast<size_t>(grad_scratch.yidx(i, j))] : 0.0;
                const double fs = (j > 0) ? grad_scratch.fy[static_cast<size_t>(grad_scratch.yidx(i, j - 1))] : 0.0;
                lap += (fn - fs) / g.hy;
            }
            const int k = g.idx(i, j);
            out[k] = x[k] - dt * lap + dt * u[k] * x[k];
        }
    }
}

double dot(const Field& a, const Field& b) {
    double s = 0.0;
    for (int k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

} // namespace

VStepResult step_v_implicit(const Field& v, const Field& u, double dt, const StepControl& ctrl) {
    if (!(field_min(v) > 0.0))
        throw std::invalid_argument("step_v_implicit: v must be strictly positive");
    if (field_min(u) < 0.0)
        throw std::invalid_argument("step_v_implicit: u must be nonnegative");
    if (!(dt > 0.0))
        throw std::invalid_argument("step_v_implicit: dt must be positive");

    const Grid& g = v.grid;
    VStepResult res;
    res.v_new = v;   // initial guess
    Field r(g), pdir(g), ap(g);
    FaceFluxes grad_scratch(g);

    apply_helmholtz(res.v_new, u, dt, grad_scratch, ap);
    for (int k = 0; k < r.size(); ++k) r[k] = v[k] - ap[k];
    const double bnorm = std::sqrt(dot(v, v));
    double rr = dot(r, r);
    const double target = ctrl.linear_solve_rtol * bnorm;

    pdir = r;
    int it = 0;
    while (std::sqrt(rr) > target && it < ctrl.cg_max_iters) {
        apply_helmholtz(pdir, u, dt, grad_scratch, ap);
        const double pap = dot(pdir, ap);
        if (!(pap > 0.0)) break;   // matrix is SPD, loss of positivity means breakdown
        const double alpha = rr / pap;
        for (int k = 0; k < r.size(); ++k) {
            res.v_new[k] += alpha * pdir[k];
            r[k] -= alpha * ap[k];
        }
        const double rr_new = dot(r, r);
        const double beta = rr_new / rr;
        for (int k = 0; k < r.size(); ++k) pdir[k] = r[k] + beta * pdir[k];
        rr = rr_new;
        ++it;
    }
    res.iterations = it;
    res.residual = bnorm > 0.0 ? std::sqrt(rr) / bnorm : 0.0;
    res.converged = std::sqrt(rr) <= target;
    if (!res.converged) return res;

    // project onto the box provably containing the exact solution
    const double vmax = field_max(v);
    const double floor = field_min(v) / (1.0 + dt * field_max(u));
    for (double& x : res.v_new.data) {
        if (x > vmax) x = vmax;
        if (x < floor) x = floor;
    }
    return res;
}

UStepResult step_u_explicit(const Field& u, const Field& v_new, double dt, const ModelParams& p) {
    UStepResult res;
    const Field rhs = u_rhs(u, v_new, p);
    res.u_new = u;
    for (int k = 0; k < res.u_new.size(); ++k) res.u_new[k] += dt * rhs[k];
    res.nonnegative = field_min(res.u_new) >= 0.0;
    return res;
}

std::optional<StopCause> advance(State& state, const ModelParams& p, const StepControl& ctrl,
                                 StepLedger& ledger, const DiagnosticsHook& hook) {
    const double t_slack = 1e-12 * std::max(1.0, ctrl.t_end);
    if (state.t >= ctrl.t_end - t_slack) return StopCause::REACHED_T_END;
    double dt = stable_dt(state.u, state.v, p, ctrl, state.t);

    for (int halving = 0; halving <= ctrl.max_halvings_per_step; ++halving) {
        VStepResult vres = step_v_implicit(state.v, state.u, dt, ctrl);
        if (!vres.converged) return StopCause::LINEAR_SOLVE_FAILURE;

        UStepResult ures = step_u_explicit(state.u, vres.v_new, dt, p);
        if (!ures.nonnegative) {
            dt *= 0.5;
            ++ledger.halvings_total;
            if (dt < ctrl.dt_min) return StopCause::DT_UNDERFLOW;
            continue;
        }

        const double mass_old = integrate(state.u);
        const double consumed = integrate(v_consumption(state.u, vres.v_new));
        state.v = std::move(vres.v_new);
        state.u = std::move(ures.u_new);
        state.t += dt;
        state.dt_last = dt;
        ++state.step_index;

        ledger.consumption += dt * consumed;
        ledger.last_solve_residual = vres.residual;
        const double mass_new = integrate(state.u);
        ledger.mass_residual_worst =
            std::max(ledger.mass_residual_worst, std::abs(mass_new - mass_old - p.ell * dt * consumed));

        if (hook) hook(state);

        const double threshold =
            ctrl.u_blowup_threshold > 0.0 ? ctrl.u_blowup_threshold : 1e6;
        if (field_max(state.u) > threshold) return StopCause::BLOWUP_SUSPECT_SUP_U;
        if (state.t >= ctrl.t_end - t_slack) return StopCause::REACHED_T_END;
        return std::nullopt;
    }
    return StopCause::DT_UNDERFLOW;
}

} // namespace ddc
