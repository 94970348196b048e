#pragma once

// Evaluation of every monitored functional (norms, gradient functionals and
// their dissipation partners, the m-dependent energy pair F/G, cross terms)
// plus the violation ledger and the residual monitors for the a priori
// differential inequalities.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ddc/model.hpp"

namespace ddc {

struct DiagnosticsConfig {
    std::vector<double> p_list{2.0, 3.0, 4.0};   // Lp norms of u, p > 1
    std::vector<double> q_list{2.0, 4.0};        // gradient functionals, q >= 2
    double g_upart_c = 1.0;                      // constant multiplying the u part of G

    void validate() const;
    int q_index(double q) const;                 // -1 if absent
};

// Running time integrals, accumulated per accepted step. Consumption uses
// dt * int(u_old v_new); the other integrals are left-endpoint sums. The
// residual monitors difference these between records, which resolves fast
// transients at step resolution instead of record cadence.
struct CumulativeBudgets {
    double consumption = 0.0;        // sum dt int(u v)
    double vgradv = 0.0;             // sum dt int(v |grad v|^2)
    double u_vx2_over_v = 0.0;       // sum dt int(u |grad v|^2 / v)
    double v_ux2 = 0.0;              // sum dt int(v |grad u|^2)
    double u_gradv4_over_v3 = 0.0;   // sum dt int(u |grad v|^4 / v^3)
    // m-dependent majorant integrals of the G inequality
    double rhs_u_2a2m_v_gradv = 0.0;
    double rhs_u_42m_v_gradv = 0.0;
    double rhs_u_3m_v = 0.0;
    double rhs_u2_v = 0.0;
    // per q in q_list
    std::vector<double> dissipation_q;
    std::vector<double> u_weighted_grad_v_q;   // sum dt int(u |grad v|^q / v^{q-1})
    std::vector<double> u_source_q;            // sum dt int(u^{(q+2)/2} v)
};

// floor-guarded power used by every functional: negative powers of
// nonnegative fields are evaluated at max(x, 1e-30)
inline double safe_pow(double x, double e) {
    if (e == 0.0) return 1.0;
    if (e == 1.0) return x;
    if (e == 2.0) return x * x;
    if (e == 3.0) return x * x * x;
    if (e == -1.0) return 1.0 / (x > 1e-30 ? x : 1e-30);
    if (e < 0.0 || x <= 0.0) return std::pow(x > 1e-30 ? x : 1e-30, e);
    return std::pow(x, e);
}

struct DiagnosticsRecord {
    double t = 0.0;
    double mass_u = 0.0;
    double sup_u = 0.0;
    double sup_v = 0.0;
    std::vector<double> lp_norms_u;          // aligned with p_list
    std::vector<double> grad_v_functional;   // int |grad v|^q / v^{q-1}
    std::vector<double> dissipation;         // int (|grad v|^{q-2}/v^{q-3}) |D2 ln v|^2
    std::vector<double> u_weighted_grad_v;   // int u |grad v|^q / v^{q-1}
    std::vector<double> u_source;            // int u^{(q+2)/2} v
    double F_energy = 0.0;
    double G_energy = 0.0;
    double cross_uv = 0.0;                   // int u v
    double cross_v_gradu_sq = 0.0;           // int v |grad u|^2
    double cross_u_gradv2_over_v = 0.0;      // int u |grad v|^2 / v
    double cross_u_gradv4_over_v3 = 0.0;     // int u |grad v|^4 / v^3
    double cross_v_gradv_sq = 0.0;           // int v |grad v|^2
    double w1inf_v = 0.0;                    // sup v + sup |grad v|
    // m-dependent majorant integrals consumed by the G audit
    double rhs_u_2a2m_v_gradv = 0.0;         // int u^{2-2m+2a} v |grad v|^2
    double rhs_u_42m_v_gradv = 0.0;          // int u^{4-2m} v |grad v|^2
    double rhs_u_3m_v = 0.0;                 // int u^{3-m} v
    double rhs_u2_v = 0.0;                   // int u^2 v
    CumulativeBudgets budgets;               // snapshot at record time
};

// u part of the energy pair, selected by exact comparison on the configured m:
//   m in [1,2) or (3,4): int u^{3-m};  m == 2: int u ln u (0 ln 0 = 0);
//   m == 3: -int ln u;  m in (2,3): -int u^{3-m}.
double energy_u_part(const Field& u, double m);

double grad_q_functional(const Field& v, double q);
double dissipation_functional(const Field& v, double q);

DiagnosticsRecord compute_record(const Field& u, const Field& v, double t, const ModelParams& p,
                                 const DiagnosticsConfig& cfg);

struct Violation {
    double t = 0.0;
    std::string check;
    double lhs = 0.0;
    double rhs = 0.0;
    double tolerance = 0.0;
    std::string severity;   // "error" or "info"
};

struct ViolationLedger {
    std::vector<Violation> entries;
    void add(double t, std::string check, double lhs, double rhs, double tol, std::string severity = "error");
    int error_count() const;
};

struct InitialSummary {
    double mass_u0eps = 0.0;   // int of the regularized u0
    double int_v0 = 0.0;
    double sup_v0 = 0.0;
    double ell = 0.0;
    double K = 0.0;
};

// Appends entries for the pointwise a priori bounds: sup v monotonicity
// ("vin"), the mass corridor ("u1"), and the consumption budget ("uv1").
void check_pointwise_bounds(const DiagnosticsRecord& rec, const std::vector<DiagnosticsRecord>& history,
                            const InitialSummary& init, const CumulativeBudgets& budgets,
                            ViolationLedger& ledger);

struct EnergyCoefficients {
    double f_dissip_u = 0.5;       // coefficient on int(u |grad v|^2 / v)
    double f_dissip_gradu = 0.25;  // coefficient on int(v |grad u|^2)
};

// Worst (most positive) residual over consecutive record pairs of the 1D
// energy inequality
//   d/dt (int v_x^2/v + F) + c2 int(v u_x^2) + 1/2 int(u v_x^2/v)
//     <= C (int v v_x^2 + int u v)
// with backward difference quotients and left-endpoint instantaneous terms.
// Requires a 1D run and q = 2 in the q_list.
double energy_residual_F(std::span<const DiagnosticsRecord> segment, const ModelParams& p,
                         const DiagnosticsConfig& cfg, const EnergyCoefficients& coeffs, double C);

// Smallest C making every segment residual nonpositive (padded by one ulp).
double calibrate_energy_F(std::span<const DiagnosticsRecord> segment, const ModelParams& p,
                          const DiagnosticsConfig& cfg, const EnergyCoefficients& coeffs);

// Constant pair of the 2D quasi-energy monitor. The u part of G enters with
// the weight upart_c; the weight has to dominate the int(v |grad u|^2)
// coupling constant nav4_c1 of
//   d/dt int|grad v|^4/v^3 + dissipation_4 + int(u|grad v|^4/v^3)
//     <= nav4_c1 int(v |grad u|^2),
// so calibration first estimates nav4_c1 and then sets
//   upart_c = mult(m) (nav4_c1 + 1),
// with mult = 2 for m in {2,3} and 2/|(2-m)(3-m)| otherwise, before fitting
// the majorant constant.
struct GConstants {
    double nav4_c1 = 0.0;
    double upart_c = 1.0;
    double majorant = 0.0;
};

// Worst residual of G' + dissipation_4 + int(u|grad v|^4/v^3) + int(v|grad u|^2)
// <= majorant * (m-case right-hand side), with G rebuilt from the records as
// upart_c * (u part) + int|grad v|^4/v^3. Requires a 2D run and q = 4 in the
// q_list.
double energy_residual_G(std::span<const DiagnosticsRecord> segment, const ModelParams& p,
                         const DiagnosticsConfig& cfg, const GConstants& constants);

GConstants calibrate_energy_G(std::span<const DiagnosticsRecord> segment, const ModelParams& p,
                              const DiagnosticsConfig& cfg);

// Residual of d/dt int|grad v|^q/v^{q-1} + (q/2) dissipation
// + (q-1)^2 int u |grad v|^q/v^{q-1} - C1 int u^{(q+2)/2} v.
double dissipation_residual_navq(std::span<const DiagnosticsRecord> segment, double q,
                                 const DiagnosticsConfig& cfg, double C1);

double calibrate_navq(std::span<const DiagnosticsRecord> segment, double q, const DiagnosticsConfig& cfg);

// CSV with the fixed column contract: t, mass_u, sup_u, sup_v, p norms,
// q functionals and dissipations, F, G, budgets, then the remaining cross
// terms; full-precision scientific floats.
std::string diagnostics_csv(const std::vector<DiagnosticsRecord>& records, const DiagnosticsConfig& cfg);

} // namespace ddc
