#include "ddc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace ddc {

void DiagnosticsConfig::validate() const {
    for (double p : p_list)
        if (!(p > 1.0)) throw std::invalid_argument("diagnostics: p_list entries must be > 1");
    for (double q : q_list)
        if (!(q >= 2.0)) throw std::invalid_argument("diagnostics: q_list entries must be >= 2");
    if (!(g_upart_c > 0.0)) throw std::invalid_argument("diagnostics: g_upart_c must be > 0");
}

int DiagnosticsConfig::q_index(double q) const {
    for (size_t i = 0; i < q_list.size(); ++i)
        if (q_list[i] == q) return static_cast<int>(i);
    return -1;
}

namespace {
// floor used inside logarithms
constexpr double kPosFloor = 1e-30;
} // namespace

double energy_u_part(const Field& u, double m) {
    const double area = u.grid.cell_area();
    double s = 0.0;
    if (m == 2.0) {
        for (double x : u.data) s += (x > 0.0) ? x * std::log(x) : 0.0;
    } else if (m == 3.0) {
        for (double x : u.data) s -= std::log(std::max(x, kPosFloor));
    } else if (m > 2.0 && m < 3.0) {
        for (double x : u.data) s -= safe_pow(x, 3.0 - m);
    } else {
        for (double x : u.data) s += safe_pow(x, 3.0 - m);
    }
    return s * area;
}

double grad_q_functional(const Field& v, double q) {
    const Field gsq = cell_gradient_sq(v);
    const double area = v.grid.cell_area();
    double s = 0.0;
    for (int k = 0; k < v.size(); ++k)
        s += safe_pow(gsq[k], 0.5 * q) / safe_pow(v[k], q - 1.0);
    return s * area;
}

double dissipation_functional(const Field& v, double q) {
    const Field gsq = cell_gradient_sq(v);
    const Field hfrob = frobenius_sq(hessian_log(v));
    const double area = v.grid.cell_area();
    double s = 0.0;
    for (int k = 0; k < v.size(); ++k)
        s += safe_pow(gsq[k], 0.5 * (q - 2.0)) / safe_pow(v[k], q - 3.0) * hfrob[k];
    return s * area;
}

DiagnosticsRecord compute_record(const Field& u, const Field& v, double t, const ModelParams& p,
                                 const DiagnosticsConfig& cfg) {
    if (field_min(u) < 0.0) throw std::invalid_argument("compute_record: u must be nonnegative");
    if (!(field_min(v) > 0.0)) throw std::invalid_argument("compute_record: v must be strictly positive");

    const Grid& g = u.grid;
    const double area = g.cell_area();
    DiagnosticsRecord rec;
    rec.t = t;
    rec.mass_u = integrate(u);
    rec.sup_u = field_max(u);
    rec.sup_v = field_max(v);

    rec.lp_norms_u.reserve(cfg.p_list.size());
    for (double pw : cfg.p_list) rec.lp_norms_u.push_back(lp_norm(u, pw));

    const Field gsq_v = cell_gradient_sq(v);
    const Field gsq_u = cell_gradient_sq(u);
    const Field hfrob = frobenius_sq(hessian_log(v));

    for (double q : cfg.q_list) {
        double fun = 0.0, dis = 0.0, ufun = 0.0, usrc = 0.0;
        for (int k = 0; k < g.cells(); ++k) {
            const double gq = safe_pow(gsq_v[k], 0.5 * q) / safe_pow(v[k], q - 1.0);
            fun += gq;
            dis += safe_pow(gsq_v[k], 0.5 * (q - 2.0)) / safe_pow(v[k], q - 3.0) * hfrob[k];
            ufun += u[k] * gq;
            usrc += safe_pow(u[k], 0.5 * (q + 2.0)) * v[k];
        }
        rec.grad_v_functional.push_back(fun * area);
        rec.dissipation.push_back(dis * area);
        rec.u_weighted_grad_v.push_back(ufun * area);
        rec.u_source.push_back(usrc * area);
    }

    rec.F_energy = energy_u_part(u, p.m);
    rec.G_energy = cfg.g_upart_c * rec.F_energy + grad_q_functional(v, 4.0);

    double uv = 0.0, vgu = 0.0, ug2v = 0.0, ug4v3 = 0.0, vgv = 0.0;
    double r2a = 0.0, r42 = 0.0, r3m = 0.0, ru2 = 0.0;
    const double e2a = 2.0 - 2.0 * p.m + 2.0 * p.alpha;
    const double e42 = 4.0 - 2.0 * p.m;
    const double e3m = 3.0 - p.m;
    for (int k = 0; k < g.cells(); ++k) {
        const double uvk = u[k] * v[k];
        uv += uvk;
        vgu += v[k] * gsq_u[k];
        ug2v += u[k] * gsq_v[k] / v[k];
        ug4v3 += u[k] * gsq_v[k] * gsq_v[k] / (v[k] * v[k] * v[k]);
        vgv += v[k] * gsq_v[k];
        r2a += safe_pow(u[k], e2a) * v[k] * gsq_v[k];
        r42 += safe_pow(u[k], e42) * v[k] * gsq_v[k];
        r3m += safe_pow(u[k], e3m) * v[k];
        ru2 += u[k] * u[k] * v[k];
    }
    rec.cross_uv = uv * area;
    rec.cross_v_gradu_sq = vgu * area;
    rec.cross_u_gradv2_over_v = ug2v * area;
    rec.cross_u_gradv4_over_v3 = ug4v3 * area;
    rec.cross_v_gradv_sq = vgv * area;
    rec.rhs_u_2a2m_v_gradv = r2a * area;
    rec.rhs_u_42m_v_gradv = r42 * area;
    rec.rhs_u_3m_v = r3m * area;
    rec.rhs_u2_v = ru2 * area;
    rec.w1inf_v = rec.sup_v + sup_face_gradient(v);
    rec.budgets.dissipation_q.assign(cfg.q_list.size(), 0.0);
    rec.budgets.u_weighted_grad_v_q.assign(cfg.q_list.size(), 0.0);
    rec.budgets.u_source_q.assign(cfg.q_list.size(), 0.0);
    return rec;
}

void ViolationLedger::add(double t, std::string check, double lhs, double rhs, double tol, std::string severity) {
    entries.push_back(Violation{t, std::move(check), lhs, rhs, tol, std::move(severity)});
}

int ViolationLedger::error_count() const {
    int n = 0;
    for (const auto& e : entries)
        if (e.severity == "error") ++n;
    return n;
}

void check_pointwise_bounds(const DiagnosticsRecord& rec, const std::vector<DiagnosticsRecord>& history,
                            const InitialSummary& init, const CumulativeBudgets& budgets,
                            ViolationLedger& ledger) {
    if (!history.empty()) {
        const DiagnosticsRecord& prev = history.back();
        const double tol_v = 1e-12 * init.sup_v0;
        if (rec.sup_v > prev.sup_v + tol_v)
            ledger.add(rec.t, "vin", rec.sup_v, prev.sup_v, tol_v);
    }
    const double tol_m = 1e-10 * (1.0 + init.mass_u0eps);
    const double lower = init.mass_u0eps - tol_m;
    const double upper = init.mass_u0eps + init.ell * init.int_v0 + tol_m;
    if (rec.mass_u < lower || rec.mass_u > upper)
        ledger.add(rec.t, "u1", rec.mass_u, rec.mass_u < lower ? lower : upper, tol_m);
    const double tol_c = 1e-10 * (1.0 + init.int_v0);
    if (budgets.consumption > init.int_v0 + tol_c)
        ledger.add(rec.t, "uv1", budgets.consumption, init.int_v0, tol_c);
}

namespace {

constexpr double kDenFloor = 1e-14;

struct ResidualTerms {
    double num;   // difference quotient plus dissipated terms
    double den;   // majorant without its constant
};

template <class TermFn>
double worst_residual(std::span<const DiagnosticsRecord> seg, double C, TermFn terms) {
    if (seg.size() < 2) throw std::invalid_argument("residual monitor: need at least two records");
    double worst = -std::numeric_limits<double>::infinity();
    for (size_t k = 1; k < seg.size(); ++k) {
        const ResidualTerms rt = terms(seg[k - 1], seg[k]);
        worst = std::max(worst, rt.num - C * rt.den);
    }
    return worst;
}

template <class TermFn>
double calibrate_constant(std::span<const DiagnosticsRecord> seg, TermFn terms) {
    if (seg.size() < 2) throw std::invalid_argument("residual monitor: need at least two records");
    double c = 0.0;
    for (size_t k = 1; k < seg.size(); ++k) {
        const ResidualTerms rt = terms(seg[k - 1], seg[k]);
        if (rt.den > kDenFloor) c = std::max(c, rt.num / rt.den);
    }
    return c * (1.0 + 1e-12);
}

} // namespace

namespace {

// The instantaneous terms of each differential inequality are represented by
// their per-step time integrals (the record budgets) differenced across the
// segment and divided by its length, so the residual telescopes to the
// integrated inequality regardless of the record cadence. Histories without
// budget accumulation degrade to the bare difference-quotient check.

auto f_terms(const ModelParams& p, const DiagnosticsConfig& cfg, const EnergyCoefficients& coeffs) {
    if (p.dimension != 1)
        throw std::invalid_argument("energy_residual_F: defined for 1D runs only");
    const int q2 = cfg.q_index(2.0);
    if (q2 < 0) throw std::invalid_argument("energy_residual_F: q_list must contain q = 2");
    return [q2, coeffs](const DiagnosticsRecord& a, const DiagnosticsRecord& b) {
        const double dt = b.t - a.t;
        if (!(dt > 0.0)) throw std::invalid_argument("residual monitor: records must be increasing in t");
        const double ea = a.grad_v_functional[static_cast<size_t>(q2)] + a.F_energy;
        const double eb = b.grad_v_functional[static_cast<size_t>(q2)] + b.F_energy;
        ResidualTerms rt;
        rt.num = (eb - ea) / dt +
                 (coeffs.f_dissip_u * (b.budgets.u_vx2_over_v - a.budgets.u_vx2_over_v) +
                  coeffs.f_dissip_gradu * (b.budgets.v_ux2 - a.budgets.v_ux2)) / dt;
        rt.den = ((b.budgets.vgradv - a.budgets.vgradv) +
                  (b.budgets.consumption - a.budgets.consumption)) / dt;
        return rt;
    };
}

auto g_terms(const ModelParams& p, const DiagnosticsConfig& cfg, double upart_c) {
    if (p.dimension != 2)
        throw std::invalid_argument("energy_residual_G: defined for 2D runs only");
    const int q4 = cfg.q_index(4.0);
    if (q4 < 0) throw std::invalid_argument("energy_residual_G: q_list must contain q = 4");
    const double m = p.m;
    return [q4, m, upart_c](const DiagnosticsRecord& a, const DiagnosticsRecord& b) {
        const double dt = b.t - a.t;
        if (!(dt > 0.0)) throw std::invalid_argument("residual monitor: records must be increasing in t");
        const size_t qi = static_cast<size_t>(q4);
        const double ga = upart_c * a.F_energy + a.grad_v_functional[qi];
        const double gb = upart_c * b.F_energy + b.grad_v_functional[qi];
        ResidualTerms rt;
        rt.num = (gb - ga) / dt +
                 ((b.budgets.dissipation_q[qi] - a.budgets.dissipation_q[qi]) +
                  (b.budgets.u_gradv4_over_v3 - a.budgets.u_gradv4_over_v3) +
                  (b.budgets.v_ux2 - a.budgets.v_ux2)) / dt;
        if (m == 1.0 || m == 2.0)
            rt.den = ((b.budgets.rhs_u_2a2m_v_gradv - a.budgets.rhs_u_2a2m_v_gradv) +
                      (b.budgets.rhs_u2_v - a.budgets.rhs_u2_v) +
                      (b.budgets.consumption - a.budgets.consumption)) / dt;
        else if (m > 1.0 && m < 2.0)
            rt.den = ((b.budgets.rhs_u_2a2m_v_gradv - a.budgets.rhs_u_2a2m_v_gradv) +
                      (b.budgets.rhs_u_42m_v_gradv - a.budgets.rhs_u_42m_v_gradv) +
                      (b.budgets.rhs_u_3m_v - a.budgets.rhs_u_3m_v)) / dt;
        else
            rt.den = (b.budgets.rhs_u_2a2m_v_gradv - a.budgets.rhs_u_2a2m_v_gradv) / dt;
        return rt;
    };
}

// coupling inequality behind the q = 4 gradient functional: its left side
// against int(v |grad u|^2)
auto nav4_terms(const DiagnosticsConfig& cfg) {
    const int q4 = cfg.q_index(4.0);
    if (q4 < 0) throw std::invalid_argument("nav4 monitor: q_list must contain q = 4");
    return [q4](const DiagnosticsRecord& a, const DiagnosticsRecord& b) {
        const double dt = b.t - a.t;
        if (!(dt > 0.0)) throw std::invalid_argument("residual monitor: records must be increasing in t");
        const size_t qi = static_cast<size_t>(q4);
        ResidualTerms rt;
        rt.num = (b.grad_v_functional[qi] - a.grad_v_functional[qi]) / dt +
                 ((b.budgets.dissipation_q[qi] - a.budgets.dissipation_q[qi]) +
                  (b.budgets.u_gradv4_over_v3 - a.budgets.u_gradv4_over_v3)) / dt;
        rt.den = (b.budgets.v_ux2 - a.budgets.v_ux2) / dt;
        return rt;
    };
}

auto navq_terms(double q, const DiagnosticsConfig& cfg) {
    const int qi = cfg.q_index(q);
    if (qi < 0) throw std::invalid_argument("dissipation_residual_navq: q not in q_list");
    return [qi, q](const DiagnosticsRecord& a, const DiagnosticsRecord& b) {
        const double dt = b.t - a.t;
        if (!(dt > 0.0)) throw std::invalid_argument("residual monitor: records must be increasing in t");
        const size_t i = static_cast<size_t>(qi);
        ResidualTerms rt;
        rt.num = (b.grad_v_functional[i] - a.grad_v_functional[i]) / dt +
                 (0.5 * q * (b.budgets.dissipation_q[i] - a.budgets.dissipation_q[i]) +
                  (q - 1.0) * (q - 1.0) *
                      (b.budgets.u_weighted_grad_v_q[i] - a.budgets.u_weighted_grad_v_q[i])) / dt;
        rt.den = (b.budgets.u_source_q[i] - a.budgets.u_source_q[i]) / dt;
        return rt;
    };
}

} // namespace

double energy_residual_F(std::span<const DiagnosticsRecord> segment, const ModelParams& p,
                         const DiagnosticsConfig& cfg, const EnergyCoefficients& coeffs, double C) {
    return worst_residual(segment, C, f_terms(p, cfg, coeffs));
}

double calibrate_energy_F(std::span<const DiagnosticsRecord> segment, const ModelParams& p,
                          const DiagnosticsConfig& cfg, const EnergyCoefficients& coeffs) {
    return calibrate_constant(segment, f_terms(p, cfg, coeffs));
}

double energy_residual_G(std::span<const DiagnosticsRecord> segment, const ModelParams& p,
                         const DiagnosticsConfig& cfg, const GConstants& constants) {
    return worst_residual(segment, constants.majorant, g_terms(p, cfg, constants.upart_c));
}

GConstants calibrate_energy_G(std::span<const DiagnosticsRecord> segment, const ModelParams& p,
                              const DiagnosticsConfig& cfg) {
    GConstants out;
    out.nav4_c1 = calibrate_constant(segment, nav4_terms(cfg));
    const double m = p.m;
    const double mult = (m == 2.0 || m == 3.0) ? 2.0 : 2.0 / std::abs((2.0 - m) * (3.0 - m));
    out.upart_c = mult * (out.nav4_c1 + 1.0);
    out.majorant = calibrate_constant(segment, g_terms(p, cfg, out.upart_c));
    return out;
}

double dissipation_residual_navq(std::span<const DiagnosticsRecord> segment, double q,
                                 const DiagnosticsConfig& cfg, double C1) {
    return worst_residual(segment, C1, navq_terms(q, cfg));
}

double calibrate_navq(std::span<const DiagnosticsRecord> segment, double q, const DiagnosticsConfig& cfg) {
    return calibrate_constant(segment, navq_terms(q, cfg));
}

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", x);
    return buf;
}

std::string fmt_param(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

} // namespace

std::string diagnostics_csv(const std::vector<DiagnosticsRecord>& records, const DiagnosticsConfig& cfg) {
    std::string out = "t,mass_u,sup_u,sup_v";
    for (double p : cfg.p_list) out += ",lp_u_p" + fmt_param(p);
    for (double q : cfg.q_list) out += ",gradfun_q" + fmt_param(q);
    for (double q : cfg.q_list) out += ",dissip_q" + fmt_param(q);
    out += ",F_energy,G_energy";
    out += ",budget_consumption,budget_vgradv,budget_u_vx2_over_v,budget_v_ux2,budget_u_gradv4_over_v3";
    for (double q : cfg.q_list) out += ",budget_dissip_q" + fmt_param(q);
    for (double q : cfg.q_list) out += ",budget_ugradfun_q" + fmt_param(q);
    for (double q : cfg.q_list) out += ",budget_usrc_q" + fmt_param(q);
    out += ",budget_rhs_u_2a2m_v_gradv,budget_rhs_u_42m_v_gradv,budget_rhs_u_3m_v,budget_rhs_u2_v";
    out += ",cross_uv,cross_v_gradu_sq,cross_u_gradv2_over_v,cross_u_gradv4_over_v3,cross_v_gradv_sq,w1inf_v";
    for (double q : cfg.q_list) out += ",ugradfun_q" + fmt_param(q);
    for (double q : cfg.q_list) out += ",usrc_q" + fmt_param(q);
    out += ",rhs_u_2a2m_v_gradv,rhs_u_42m_v_gradv,rhs_u_3m_v,rhs_u2_v\n";

    for (const auto& r : records) {
        out += fmt(r.t) + "," + fmt(r.mass_u) + "," + fmt(r.sup_u) + "," + fmt(r.sup_v);
        for (double x : r.lp_norms_u) out += "," + fmt(x);
        for (double x : r.grad_v_functional) out += "," + fmt(x);
        for (double x : r.dissipation) out += "," + fmt(x);
        out += "," + fmt(r.F_energy) + "," + fmt(r.G_energy);
        out += "," + fmt(r.budgets.consumption) + "," + fmt(r.budgets.vgradv) + "," +
               fmt(r.budgets.u_vx2_over_v) + "," + fmt(r.budgets.v_ux2) + "," +
               fmt(r.budgets.u_gradv4_over_v3);
        for (double x : r.budgets.dissipation_q) out += "," + fmt(x);
        for (double x : r.budgets.u_weighted_grad_v_q) out += "," + fmt(x);
        for (double x : r.budgets.u_source_q) out += "," + fmt(x);
        out += "," + fmt(r.budgets.rhs_u_2a2m_v_gradv) + "," + fmt(r.budgets.rhs_u_42m_v_gradv) + "," +
               fmt(r.budgets.rhs_u_3m_v) + "," + fmt(r.budgets.rhs_u2_v);
        out += "," + fmt(r.cross_uv) + "," + fmt(r.cross_v_gradu_sq) + "," + fmt(r.cross_u_gradv2_over_v) +
               "," + fmt(r.cross_u_gradv4_over_v3) + "," + fmt(r.cross_v_gradv_sq) + "," + fmt(r.w1inf_v);
        for (double x : r.u_weighted_grad_v) out += "," + fmt(x);
        for (double x : r.u_source) out += "," + fmt(x);
        out += "," + fmt(r.rhs_u_2a2m_v_gradv) + "," + fmt(r.rhs_u_42m_v_gradv) + "," + fmt(r.rhs_u_3m_v) +
               "," + fmt(r.rhs_u2_v) + "\n";
    }
    return out;
}

} // namespace ddc
