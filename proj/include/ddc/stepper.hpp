#pragma once

// Time integration: Lie splitting with an implicit, positivity- and
// maximum-principle-preserving v step followed by an explicit conservative
// u step with halving retries on negativity.

#include <functional>
#include <optional>
#include <string>

#include "ddc/model.hpp"

namespace ddc {

struct StepControl {
    double dt_init = 1e-4;
    double dt_min = 1e-12;
    double dt_max = 1e-3;
    double safety = 0.9;                 // in (0,1]
    double t_end = 1.0;
    double u_blowup_threshold = 0.0;     // 0 means: derive as 1e6 * (1 + sup u0)
    double linear_solve_rtol = 1e-10;
    int max_halvings_per_step = 40;
    int cg_max_iters = 2000;

    void validate() const;
};

enum class StopCause { REACHED_T_END, BLOWUP_SUSPECT_SUP_U, DT_UNDERFLOW, LINEAR_SOLVE_FAILURE };

std::string to_string(StopCause c);

struct State {
    double t = 0.0;
    Field u;
    Field v;
    long long step_index = 0;
    double dt_last = 0.0;
};

// Accounting carried across accepted steps; consumption uses the quantity the
// implicit v step conserves, dt * integral(u_old * v_new), so the cumulative
// sum telescopes against integral(v).
struct StepLedger {
    double consumption = 0.0;            // sum dt * int(u_old v_new)
    double mass_residual_worst = 0.0;    // worst |d int(u) - ell dt int(u_old v_new)|
    double last_solve_residual = 0.0;
    long long halvings_total = 0;
};

// CFL-style bound: safety * min over faces of
//   h^2 / (2 dim (mobility + chemo_speed h + tiny))
// with mobility the face mean of u^{m-1} v and chemo_speed a bound for the
// f(u) v grad v transport speed, (f(u_l)v_l + f(u_r)v_r)|grad v| / (u_l+u_r+tiny).
// Clamped to [dt_min, dt_max] and to not overshoot t_end.
double stable_dt(const Field& u, const Field& v, const ModelParams& p, const StepControl& ctrl, double t);

struct VStepResult {
    Field v_new;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;   // final relative residual
};

// Solves (I - dt L + dt diag(u)) v_new = v by conjugate gradients, L the
// Neumann Laplacian. The system matrix is an SPD M-matrix, so the exact
// solution lies in [min(v)/(1 + dt max u), max(v)]; the iterate is projected
// onto that box, which preserves positivity and the discrete maximum
// principle exactly and can only reduce the error.
VStepResult step_v_implicit(const Field& v, const Field& u, double dt, const StepControl& ctrl);

struct UStepResult {
    Field u_new;
    bool nonnegative = false;
};

// u + dt * u_rhs(u, v_new); reports negativity instead of clipping.
UStepResult step_u_explicit(const Field& u, const Field& v_new, double dt, const ModelParams& p);

using DiagnosticsHook = std::function<void(const State&)>;

// One accepted step (v implicit then u explicit, with halving retries), or a
// stop cause. Invariants on acceptance: min u >= 0, min v > 0, sup v
// non-increasing, and the mass ledger identity
//   int(u_new) - int(u_old) = ell dt int(u_old v_new)
// up to roundoff.
std::optional<StopCause> advance(State& state, const ModelParams& p, const StepControl& ctrl,
                                 StepLedger& ledger, const DiagnosticsHook& hook = {});

} // namespace ddc
