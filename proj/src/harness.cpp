#include "ddc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ddc {

Field build_preset_field(const Grid& g, const PresetSpec& spec) {
    Field f(g);
    const double w = spec.width * g.lx;
    const double cx = spec.center_x * g.lx;
    const double cy = spec.center_y * g.ly;
    auto gaussian = [&](double x, double y, double bx, double by) {
        const double dx = x - bx;
        const double dy = g.dimension == 2 ? y - by : 0.0;
        return std::exp(-(dx * dx + dy * dy) / (2.0 * w * w));
    };
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double x = g.center_x(i);
            const double y = g.center_y(j);
            double val = 0.0;
            if (spec.preset == "constant") {
                val = spec.amplitude;
            } else if (spec.preset == "gaussian_bump") {
                val = spec.amplitude * gaussian(x, y, cx, cy);
            } else if (spec.preset == "two_bumps") {
                val = spec.amplitude *
                      (gaussian(x, y, 0.3 * g.lx, 0.5 * g.ly) + gaussian(x, y, 0.7 * g.lx, 0.5 * g.ly));
            } else if (spec.preset == "checker") {
                double c = std::cos(spec.modes * M_PI * x / g.lx);
                if (g.dimension == 2) c *= std::cos(spec.modes * M_PI * y / g.ly);
                val = 0.5 * spec.amplitude * (1.0 + c);
            } else {
                throw std::invalid_argument("unknown initial-condition preset: " + spec.preset);
            }
            f.at(i, j) = val + spec.offset;
        }
    }
    return f;
}

namespace {

PresetSpec preset_from_config(const Config& cfg, const std::string& prefix) {
    PresetSpec s;
    s.preset = cfg.get_string("initial", prefix + "_preset");
    s.amplitude = cfg.get_double("initial", prefix + "_amplitude");
    s.width = cfg.get_double("initial", prefix + "_width");
    s.center_x = cfg.get_double("initial", prefix + "_center_x");
    s.center_y = cfg.get_double("initial", prefix + "_center_y");
    s.offset = cfg.get_double("initial", prefix + "_offset");
    s.modes = static_cast<int>(cfg.get_int("initial", prefix + "_modes"));
    return s;
}

} // namespace

RunConfig RunConfig::from_config(const Config& cfg) {
    RunConfig rc;
    rc.grid = make_grid(static_cast<int>(cfg.get_int("grid", "dimension")),
                        static_cast<int>(cfg.get_int("grid", "cells_x")),
                        static_cast<int>(cfg.get_int("grid", "cells_y")), cfg.get_double("grid", "length_x"),
                        cfg.get_double("grid", "length_y"));

    rc.params.dimension = rc.grid.dimension;
    rc.params.m = cfg.get_double("model", "m");
    rc.params.alpha = cfg.get_double("model", "alpha");
    rc.params.ell = cfg.get_double("model", "ell");
    rc.params.c_f = cfg.get_double("model", "c_f");
    const std::string form = cfg.get_string("model", "sensitivity_form");
    if (form == "f1")
        rc.params.sensitivity_form = SensitivityForm::F1;
    else if (form == "f2")
        rc.params.sensitivity_form = SensitivityForm::F2;
    else
        throw std::invalid_argument("config [model] sensitivity_form must be f1 or f2");
    rc.params.epsilon = cfg.get_double("model", "epsilon");
    validate_model_scope(rc.params);

    rc.ctrl.dt_init = cfg.get_double("stepping", "dt_init");
    rc.ctrl.dt_min = cfg.get_double("stepping", "dt_min");
    rc.ctrl.dt_max = cfg.get_double("stepping", "dt_max");
    rc.ctrl.safety = cfg.get_double("stepping", "safety");
    rc.ctrl.t_end = cfg.get_double("stepping", "t_end");
    rc.ctrl.linear_solve_rtol = cfg.get_double("stepping", "linear_solve_rtol");
    rc.ctrl.max_halvings_per_step = static_cast<int>(cfg.get_int("stepping", "max_halvings"));
    rc.ctrl.cg_max_iters = static_cast<int>(cfg.get_int("stepping", "cg_max_iters"));
    rc.ctrl.u_blowup_threshold = 0.0;   // derived from the initial data at run time
    rc.ctrl.validate();
    rc.blowup_factor = cfg.get_double("stepping", "blowup_factor");

    rc.u0 = preset_from_config(cfg, "u0");
    rc.v0 = preset_from_config(cfg, "v0");

    rc.diag.p_list = cfg.get_double_list("diagnostics", "p_list");
    rc.diag.q_list = cfg.get_double_list("diagnostics", "q_list");
    rc.diag.g_upart_c = cfg.get_double("diagnostics", "energy_gc");
    rc.diag.validate();
    rc.cadence = static_cast<int>(cfg.get_int("diagnostics", "cadence"));
    if (rc.cadence < 1) throw std::invalid_argument("config [diagnostics] cadence must be >= 1");
    rc.growth_factor = cfg.get_double("diagnostics", "growth_factor");
    rc.baseline_fraction = cfg.get_double("diagnostics", "baseline_fraction");
    rc.energy.f_dissip_gradu = cfg.get_double("diagnostics", "energy_c2");
    rc.audit_headroom = cfg.get_double("diagnostics", "audit_headroom");
    rc.audit_c_f = cfg.has("diagnostics", "audit_c_f") ? cfg.get_double("diagnostics", "audit_c_f") : -1.0;
    rc.audit_c_g = cfg.has("diagnostics", "audit_c_g") ? cfg.get_double("diagnostics", "audit_c_g") : -1.0;
    rc.audit_g_upart =
        cfg.has("diagnostics", "audit_g_upart") ? cfg.get_double("diagnostics", "audit_g_upart") : -1.0;
    if (cfg.has("diagnostics", "audit_c1_list")) {
        rc.audit_c1 = cfg.get_double_list("diagnostics", "audit_c1_list");
        if (rc.audit_c1.size() != rc.diag.q_list.size())
            throw std::invalid_argument("config [diagnostics] audit_c1_list must match q_list length");
    }

    rc.out_dir = cfg.get_string("output", "out_dir");
    rc.seed = static_cast<uint64_t>(cfg.get_int("output", "seed"));
    rc.workers = static_cast<int>(cfg.get_int("output", "workers"));
    if (cfg.has("output", "snapshot_times")) rc.snapshot_times = cfg.get_double_list("output", "snapshot_times");
    return rc;
}

namespace {

std::string classify(StopCause stop, const std::vector<DiagnosticsRecord>& records, double growth_factor,
                     double baseline_fraction, double t_end) {
    if (stop == StopCause::DT_UNDERFLOW || stop == StopCause::LINEAR_SOLVE_FAILURE) return "ABORTED";
    if (stop == StopCause::BLOWUP_SUSPECT_SUP_U) return "GROWTH_SUSPECT";
    double baseline = records.front().sup_u;
    for (const auto& r : records)
        if (r.t <= baseline_fraction * t_end) baseline = std::max(baseline, r.sup_u);
    return records.back().sup_u <= growth_factor * baseline ? "BOUNDED" : "GROWTH_SUSPECT";
}

} // namespace

RunOutcome run_simulation(const RunConfig& rc) {
    validate_model_scope(rc.params);
    rc.diag.validate();
    rc.ctrl.validate();

    const Grid& g = rc.grid;
    const Field u0 = build_preset_field(g, rc.u0);
    const Field v0 = build_preset_field(g, rc.v0);
    const InitialData init(u0, v0);
    const Field u0eps = regularize_initial(u0, rc.params);

    RunOutcome out;
    out.verdict = validate_params(rc.params);
    out.K = init.K;
    out.mass_initial = integrate(u0eps);
    out.v0_integral = integrate(v0);

    InitialSummary summary;
    summary.mass_u0eps = out.mass_initial;
    summary.int_v0 = out.v0_integral;
    summary.sup_v0 = field_max(v0);
    summary.ell = rc.params.ell;
    summary.K = init.K;

    StepControl ctrl = rc.ctrl;
    ctrl.u_blowup_threshold = rc.blowup_factor * (1.0 + field_max(u0eps));

    State state{0.0, u0eps, v0, 0, 0.0};
    StepLedger step_ledger;
    out.budgets.dissipation_q.assign(rc.diag.q_list.size(), 0.0);
    out.budgets.u_weighted_grad_v_q.assign(rc.diag.q_list.size(), 0.0);
    out.budgets.u_source_q.assign(rc.diag.q_list.size(), 0.0);

    std::vector<double> pending_snapshots = rc.snapshot_times;
    if (pending_snapshots.empty()) pending_snapshots.push_back(rc.ctrl.t_end);
    std::sort(pending_snapshots.begin(), pending_snapshots.end());
    size_t next_snapshot = 0;
    auto take_snapshots = [&]() {
        while (next_snapshot < pending_snapshots.size() &&
               state.t >= pending_snapshots[next_snapshot] - 1e-12 * std::max(1.0, rc.ctrl.t_end)) {
            out.snapshots.push_back(RunOutcome::Snapshot{state.t, state.u, state.v});
            ++next_snapshot;
        }
    };

    // per-record monitor of the pointwise gradient inequality
    //   int |grad v|^{q+2}/v^{q+1} <= (q + sqrt n)^2 dissipation_q (1 + 10 h)
    const double root_n = std::sqrt(static_cast<double>(g.dimension));
    const double phi_tol = 10.0 * std::max(g.hx, g.dimension == 2 ? g.hy : 0.0);
    auto record_now = [&]() {
        DiagnosticsRecord rec = compute_record(state.u, state.v, state.t, rc.params, rc.diag);
        rec.budgets = out.budgets;
        check_pointwise_bounds(rec, out.records, summary, out.budgets, out.ledger);
        for (size_t qi = 0; qi < rc.diag.q_list.size(); ++qi) {
            const double q = rc.diag.q_list[qi];
            const double lhs = grad_q_functional(state.v, q + 2.0);
            const double factor = (q + root_n) * (q + root_n);
            const double rhs = factor * rec.dissipation[qi] * (1.0 + phi_tol);
            if (lhs > rhs + 1e-14 * (1.0 + rhs)) {
                char name[32];
                std::snprintf(name, sizeof name, "phi1_q%g", q);
                out.ledger.add(state.t, name, lhs, rhs, phi_tol);
            }
        }
        out.records.push_back(std::move(rec));
    };

    record_now();
    take_snapshots();
    out.peak_sup_u = out.records.front().sup_u;

    const double e2a = 2.0 - 2.0 * rc.params.m + 2.0 * rc.params.alpha;
    const double e42 = 4.0 - 2.0 * rc.params.m;
    const double e3m = 3.0 - rc.params.m;

    StopCause stop = StopCause::REACHED_T_END;
    while (true) {
        // left-endpoint integrands for the budget accumulators
        const Field gsq_v = cell_gradient_sq(state.v);
        const Field gsq_u = cell_gradient_sq(state.u);
        const Field hfrob = frobenius_sq(hessian_log(state.v));
        double vgv = 0.0, ug2v = 0.0, vgu = 0.0, ug4v3 = 0.0;
        double r2a = 0.0, r42 = 0.0, r3m = 0.0, ru2 = 0.0;
        for (int k = 0; k < g.cells(); ++k) {
            const double u = state.u[k], v = state.v[k];
            vgv += v * gsq_v[k];
            ug2v += u * gsq_v[k] / v;
            vgu += v * gsq_u[k];
            ug4v3 += u * gsq_v[k] * gsq_v[k] / (v * v * v);
            r2a += safe_pow(u, e2a) * v * gsq_v[k];
            r42 += safe_pow(u, e42) * v * gsq_v[k];
            r3m += safe_pow(u, e3m) * v;
            ru2 += u * u * v;
        }
        std::vector<double> dis(rc.diag.q_list.size(), 0.0);
        std::vector<double> ugrad(rc.diag.q_list.size(), 0.0);
        std::vector<double> usrc(rc.diag.q_list.size(), 0.0);
        for (size_t qi = 0; qi < rc.diag.q_list.size(); ++qi) {
            const double q = rc.diag.q_list[qi];
            const double e1 = 0.5 * (q - 2.0);
            const double e2 = q - 3.0;
            const double eu = 0.5 * (q + 2.0);
            double sd = 0.0, sg = 0.0, su = 0.0;
            for (int k = 0; k < g.cells(); ++k) {
                const double gq = safe_pow(gsq_v[k], 0.5 * q) / safe_pow(state.v[k], q - 1.0);
                sd += safe_pow(gsq_v[k], e1) / safe_pow(state.v[k], e2) * hfrob[k];
                sg += state.u[k] * gq;
                su += safe_pow(state.u[k], eu) * state.v[k];
            }
            dis[qi] = sd;
            ugrad[qi] = sg;
            usrc[qi] = su;
        }
        const double area = g.cell_area();
        const double sup_v_before = field_max(state.v);

        const auto cause = advance(state, rc.params, ctrl, step_ledger);
        if (cause == StopCause::DT_UNDERFLOW || cause == StopCause::LINEAR_SOLVE_FAILURE) {
            stop = *cause;
            break;
        }

        // accepted step: accumulate budgets and run the per-step monitors
        const double dt = state.dt_last;
        out.budgets.consumption = step_ledger.consumption;
        out.budgets.vgradv += dt * vgv * area;
        out.budgets.u_vx2_over_v += dt * ug2v * area;
        out.budgets.v_ux2 += dt * vgu * area;
        out.budgets.u_gradv4_over_v3 += dt * ug4v3 * area;
        out.budgets.rhs_u_2a2m_v_gradv += dt * r2a * area;
        out.budgets.rhs_u_42m_v_gradv += dt * r42 * area;
        out.budgets.rhs_u_3m_v += dt * r3m * area;
        out.budgets.rhs_u2_v += dt * ru2 * area;
        for (size_t qi = 0; qi < dis.size(); ++qi) {
            out.budgets.dissipation_q[qi] += dt * dis[qi] * area;
            out.budgets.u_weighted_grad_v_q[qi] += dt * ugrad[qi] * area;
            out.budgets.u_source_q[qi] += dt * usrc[qi] * area;
        }

        const double sup_v_after = field_max(state.v);
        if (sup_v_after > sup_v_before)
            out.ledger.add(state.t, "vin_step", sup_v_after, sup_v_before, 0.0);
        out.peak_sup_u = std::max(out.peak_sup_u, field_max(state.u));

        const bool final_step = cause.has_value();
        if (state.step_index % rc.cadence == 0 || final_step) record_now();
        take_snapshots();

        if (final_step) {
            stop = *cause;
            break;
        }
    }

    out.stop = stop;
    out.final_time = state.t;
    out.steps = state.step_index;
    out.halvings = step_ledger.halvings_total;
    out.u_final = state.u;
    out.v_final = state.v;

    const double mass_tol = 1e-12 * (1.0 + out.mass_initial);
    if (step_ledger.mass_residual_worst > mass_tol)
        out.ledger.add(out.final_time, "mass_step", step_ledger.mass_residual_worst, 0.0, mass_tol);

    // energy and dissipation monitors over the recorded history. The residual
    // tolerance is roundoff-scaled: difference quotients of functionals of
    // size S over record intervals carry errors of order 1e-12 S / dt.
    const std::string audit_severity = out.verdict.in_theory() ? "error" : "info";
    auto residual_tol = [&](double functional_scale) {
        double min_gap = rc.ctrl.t_end;
        for (size_t k = 1; k < out.records.size(); ++k)
            min_gap = std::min(min_gap, out.records[k].t - out.records[k - 1].t);
        return 1e-9 * (1.0 + functional_scale) / std::max(min_gap, 1e-12);
    };
    if (out.records.size() >= 2) {
        if (rc.params.dimension == 1 && rc.diag.q_index(2.0) >= 0) {
            out.energy_f.ran = true;
            if (rc.audit_c_f >= 0.0) {
                out.energy_f.audited = true;
                out.energy_f.constant_used = rc.audit_headroom * rc.audit_c_f;
            } else {
                out.energy_f.constant_used = calibrate_energy_F(out.records, rc.params, rc.diag, rc.energy);
            }
            out.energy_f.worst_residual =
                energy_residual_F(out.records, rc.params, rc.diag, rc.energy, out.energy_f.constant_used);
            double scale = 0.0;
            const size_t q2 = static_cast<size_t>(rc.diag.q_index(2.0));
            for (const auto& r : out.records)
                scale = std::max(scale, std::abs(r.F_energy) + r.grad_v_functional[q2]);
            out.energy_f.tolerance = residual_tol(scale);
            out.energy_f.violated = out.energy_f.worst_residual > out.energy_f.tolerance;
            if (out.energy_f.violated)
                out.ledger.add(out.final_time, "energy_F", out.energy_f.worst_residual, 0.0,
                               out.energy_f.tolerance, audit_severity);
        }
        if (rc.params.dimension == 2 && rc.diag.q_index(4.0) >= 0) {
            out.energy_g.ran = true;
            GConstants gc;
            if (rc.audit_c_g >= 0.0) {
                if (rc.audit_g_upart < 0.0)
                    throw std::invalid_argument("G audit needs both audit_c_g and audit_g_upart");
                out.energy_g.audited = true;
                gc.upart_c = rc.audit_g_upart;
                gc.majorant = rc.audit_headroom * rc.audit_c_g;
            } else {
                gc = calibrate_energy_G(out.records, rc.params, rc.diag);
            }
            out.energy_g.constant_used = gc.majorant;
            out.energy_g.upart_c = gc.upart_c;
            out.energy_g.worst_residual = energy_residual_G(out.records, rc.params, rc.diag, gc);
            double scale = 0.0;
            const size_t q4 = static_cast<size_t>(rc.diag.q_index(4.0));
            for (const auto& r : out.records)
                scale = std::max(scale, gc.upart_c * std::abs(r.F_energy) + r.grad_v_functional[q4]);
            out.energy_g.tolerance = residual_tol(scale);
            out.energy_g.violated = out.energy_g.worst_residual > out.energy_g.tolerance;
            if (out.energy_g.violated)
                out.ledger.add(out.final_time, "energy_G", out.energy_g.worst_residual, 0.0,
                               out.energy_g.tolerance, audit_severity);
        }
        out.navq.resize(rc.diag.q_list.size());
        for (size_t qi = 0; qi < rc.diag.q_list.size(); ++qi) {
            const double q = rc.diag.q_list[qi];
            EnergySummary& es = out.navq[qi];
            es.ran = true;
            if (!rc.audit_c1.empty()) {
                es.audited = true;
                es.constant_used = rc.audit_headroom * rc.audit_c1[qi];
            } else {
                es.constant_used = calibrate_navq(out.records, q, rc.diag);
            }
            es.worst_residual = dissipation_residual_navq(out.records, q, rc.diag, es.constant_used);
            double scale = 0.0;
            for (const auto& r : out.records) scale = std::max(scale, r.grad_v_functional[qi]);
            es.tolerance = residual_tol(scale);
            es.violated = es.worst_residual > es.tolerance;
            if (es.violated) {
                char name[32];
                std::snprintf(name, sizeof name, "navq_q%g", q);
                out.ledger.add(out.final_time, name, es.worst_residual, 0.0, es.tolerance, audit_severity);
            }
        }
    }

    out.classification =
        classify(stop, out.records, rc.growth_factor, rc.baseline_fraction, rc.ctrl.t_end);
    return out;
}

namespace {

json energy_json(const EnergySummary& e) {
    if (!e.ran) return nullptr;
    json j{{"mode", e.audited ? "audit" : "calibrate"},
           {"constant", e.constant_used},
           {"worst_residual", e.worst_residual},
           {"tolerance", e.tolerance},
           {"violated", e.violated}};
    if (e.upart_c > 0.0) j["upart_c"] = e.upart_c;
    return j;
}

} // namespace

std::string run_report_json(const RunOutcome& out, const RunConfig& rc) {
    json j;
    j["type"] = "run";
    j["stop_cause"] = to_string(out.stop);
    j["classification"] = out.classification;
    j["classification_rule"] = {{"growth_factor", rc.growth_factor},
                                {"baseline_fraction", rc.baseline_fraction}};
    j["final_time"] = out.final_time;
    j["steps"] = out.steps;
    j["halvings"] = out.halvings;
    j["peak_sup_u"] = out.peak_sup_u;
    j["K"] = out.K;
    j["seed"] = static_cast<int64_t>(rc.seed);
    j["verdict"] = {{"regime", to_string(out.verdict.regime)},
                    {"requires_positive_u0", out.verdict.requires_positive_u0},
                    {"notes", out.verdict.notes}};

    json by_check = json::object();
    for (const auto& e : out.ledger.entries) {
        const std::string key = e.check;
        by_check[key] = by_check.contains(key) ? by_check[key].get<int>() + 1 : 1;
    }
    json entries = json::array();
    for (const auto& e : out.ledger.entries)
        entries.push_back({{"t", e.t},
                           {"check", e.check},
                           {"lhs", e.lhs},
                           {"rhs", e.rhs},
                           {"tolerance", e.tolerance},
                           {"severity", e.severity}});
    j["ledger"] = {{"total", out.ledger.entries.size()},
                   {"error_count", out.ledger.error_count()},
                   {"by_check", by_check},
                   {"entries", entries}};

    j["budgets"] = {{"consumption", out.budgets.consumption},
                    {"vgradv", out.budgets.vgradv},
                    {"u_vx2_over_v", out.budgets.u_vx2_over_v},
                    {"v_ux2", out.budgets.v_ux2},
                    {"dissipation_q", out.budgets.dissipation_q}};
    j["mass"] = {{"initial", out.mass_initial},
                 {"final", out.records.back().mass_u},
                 {"v0_integral", out.v0_integral}};

    json navq = json::array();
    for (size_t qi = 0; qi < out.navq.size(); ++qi) {
        json e = energy_json(out.navq[qi]);
        if (!e.is_null()) e["q"] = rc.diag.q_list[qi];
        navq.push_back(e);
    }
    j["energy"] = {{"F", energy_json(out.energy_f)}, {"G", energy_json(out.energy_g)}, {"navq", navq}};
    return j.dump(2);
}

uint64_t fnv1a64(const std::string& bytes) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

OutputSink::OutputSink(std::string root_dir) : root_(std::move(root_dir)) {
    fs::create_directories(root_);
}

namespace {
std::mutex g_sink_mutex;
}

void OutputSink::write(const std::string& relpath, const std::string& bytes) {
    const fs::path full = fs::path(root_) / relpath;
    {
        std::lock_guard<std::mutex> lock(g_sink_mutex);
        fs::create_directories(full.parent_path());
    }
    std::ofstream out(full, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + full.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    std::lock_guard<std::mutex> lock(g_sink_mutex);
    entries_.emplace_back(relpath, std::to_string(bytes.size()) + " " + hash);
}

void OutputSink::write_manifest() {
    std::lock_guard<std::mutex> lock(g_sink_mutex);
    std::sort(entries_.begin(), entries_.end());
    std::string text;
    for (const auto& [path, meta] : entries_) text += path + " " + meta + "\n";
    const fs::path full = fs::path(root_) / "manifest.txt";
    std::ofstream out(full, std::ios::binary);
    out << text;
}

std::string pgm_encode(const Field& f, double* out_min, double* out_max) {
    const double lo = field_min(f);
    const double hi = field_max(f);
    if (out_min) *out_min = lo;
    if (out_max) *out_max = hi;
    std::string s = "P5\n" + std::to_string(f.grid.nx) + " " + std::to_string(f.grid.ny) + "\n255\n";
    const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i)
            s.push_back(static_cast<char>(
                static_cast<unsigned char>(std::lround((f.at(i, j) - lo) * scale))));
    return s;
}

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

void write_run_outputs(const RunOutcome& out, const RunConfig& rc, OutputSink& sink,
                       const std::string& prefix) {
    sink.write(prefix + "diagnostics.csv", diagnostics_csv(out.records, rc.diag));
    sink.write(prefix + "report.json", run_report_json(out, rc));
    for (size_t s = 0; s < out.snapshots.size(); ++s) {
        char base[32];
        std::snprintf(base, sizeof base, "snap_%03zu", s);
        for (const char* which : {"u", "v"}) {
            const Field& f = which[0] == 'u' ? out.snapshots[s].u : out.snapshots[s].v;
            double lo = 0.0, hi = 0.0;
            const std::string pgm = pgm_encode(f, &lo, &hi);
            sink.write(prefix + base + "_" + which + ".pgm", pgm);
            std::string side = "t = " + fmt17(out.snapshots[s].t) + "\nmin = " + fmt17(lo) +
                               "\nmax = " + fmt17(hi) + "\nrows = y index 0.." +
                               std::to_string(f.grid.ny - 1) + "\n";
            sink.write(prefix + base + "_" + which + ".txt", side);
        }
    }
}

namespace {

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    for (auto& t : pool) t.join();
}

uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (a * 1000003ULL + b + 1ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

int cmd_run(const Config& cfg) {
    const RunConfig rc = RunConfig::from_config(cfg);
    OutputSink sink(rc.out_dir);
    const RunOutcome out = run_simulation(rc);
    write_run_outputs(out, rc, sink);
    sink.write_manifest();
    if (out.stop != StopCause::REACHED_T_END) return 3;
    return out.ledger.error_count() > 0 ? 2 : 0;
}

int cmd_sweep(const Config& cfg) {
    const RunConfig base = RunConfig::from_config(cfg);
    const std::vector<double> ms = cfg.get_double_list("sweep", "m_values");
    const std::vector<double> alphas = cfg.get_double_list("sweep", "alpha_values");
    if (ms.empty() || alphas.empty()) throw std::invalid_argument("sweep axes must be nonempty");

    struct Cell {
        bool completed = false;
        std::string error;
        std::string classification;
        std::string regime;
        bool in_theory = false;
        double peak_sup_u = 0.0;
        double final_time = 0.0;
        int ledger_errors = 0;
        std::string stop;
    };
    const int n = static_cast<int>(ms.size() * alphas.size());
    std::vector<Cell> cells(static_cast<size_t>(n));
    OutputSink sink(base.out_dir);

    parallel_for(n, base.workers, [&](int idx) {
        const size_t i = static_cast<size_t>(idx) / alphas.size();
        const size_t j = static_cast<size_t>(idx) % alphas.size();
        Cell& cell = cells[static_cast<size_t>(idx)];
        try {
            RunConfig rc = base;
            rc.params.m = ms[i];
            rc.params.alpha = alphas[j];
            rc.seed = mix_seed(base.seed, i, j);
            char prefix[64];
            std::snprintf(prefix, sizeof prefix, "cell_m%zu_a%zu/", i, j);
            const RunOutcome out = run_simulation(rc);
            write_run_outputs(out, rc, sink, prefix);
            cell.completed = true;
            cell.classification = out.classification;
            cell.regime = to_string(out.verdict.regime);
            cell.in_theory = out.verdict.in_theory();
            cell.peak_sup_u = out.peak_sup_u;
            cell.final_time = out.final_time;
            cell.ledger_errors = out.ledger.error_count();
            cell.stop = to_string(out.stop);
        } catch (const std::exception& e) {
            cell.error = e.what();
            cell.classification = "ERROR";
            cell.regime = "ERROR";
        }
    });

    auto matrix_csv = [&](auto getter) {
        std::string s = "m\\alpha";
        for (double a : alphas) s += "," + fmt17(a);
        s += "\n";
        for (size_t i = 0; i < ms.size(); ++i) {
            s += fmt17(ms[i]);
            for (size_t j = 0; j < alphas.size(); ++j)
                s += "," + getter(cells[i * alphas.size() + j]);
            s += "\n";
        }
        return s;
    };
    sink.write("classification_matrix.csv", matrix_csv([](const Cell& c) { return c.classification; }));
    sink.write("verdict_overlay.csv", matrix_csv([](const Cell& c) {
                   return c.in_theory ? std::string("IN_THEORY:") + c.regime : c.regime;
               }));

    json j;
    j["type"] = "sweep";
    j["m_values"] = ms;
    j["alpha_values"] = alphas;
    json jcells = json::array();
    for (size_t i = 0; i < ms.size(); ++i)
        for (size_t j2 = 0; j2 < alphas.size(); ++j2) {
            const Cell& c = cells[i * alphas.size() + j2];
            jcells.push_back({{"m", ms[i]},
                              {"alpha", alphas[j2]},
                              {"completed", c.completed},
                              {"error", c.error},
                              {"classification", c.classification},
                              {"regime", c.regime},
                              {"stop", c.stop},
                              {"peak_sup_u", c.peak_sup_u},
                              {"ledger_errors", c.ledger_errors}});
        }
    j["cells"] = jcells;
    sink.write("sweep_report.json", j.dump(2));
    sink.write_manifest();

    for (const Cell& c : cells)
        if (!c.completed) return 2;
    return 0;
}

namespace {

Field restrict_to(const Field& fine, const Grid& coarse) {
    const Grid& gf = fine.grid;
    if (gf.nx % coarse.nx != 0 || gf.ny % coarse.ny != 0)
        throw std::invalid_argument("grid levels must nest for restriction");
    const int rx = gf.nx / coarse.nx;
    const int ry = gf.ny / coarse.ny;
    Field out(coarse);
    for (int j = 0; j < coarse.ny; ++j)
        for (int i = 0; i < coarse.nx; ++i) {
            double s = 0.0;
            for (int jj = 0; jj < ry; ++jj)
                for (int ii = 0; ii < rx; ++ii) s += fine.at(i * rx + ii, j * ry + jj);
            out.at(i, j) = s / (rx * ry);
        }
    return out;
}

double l1_diff(const Field& a, const Field& b) {
    double s = 0.0;
    for (int k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
    return s * a.grid.cell_area();
}

} // namespace

int cmd_converge(const Config& cfg) {
    const RunConfig base = RunConfig::from_config(cfg);
    const std::vector<double> ladder = cfg.get_double_list("converge", "epsilon_ladder");
    const std::vector<int> levels = cfg.get_int_list("converge", "grid_levels");
    if (ladder.size() < 3 || levels.size() < 3)
        throw std::invalid_argument("converge: need >= 3 epsilon values and >= 3 grid levels");
    for (size_t l = 0; l + 1 < levels.size(); ++l)
        if (levels[l + 1] % levels[l] != 0 || levels[l + 1] <= levels[l])
            throw std::invalid_argument("converge: grid levels must be increasing and nested");

    OutputSink sink(base.out_dir);

    // epsilon study on the base grid
    std::vector<Field> u_finals(ladder.size());
    std::vector<std::string> eps_errors(ladder.size());
    parallel_for(static_cast<int>(ladder.size()), base.workers, [&](int i) {
        try {
            RunConfig rc = base;
            rc.params.epsilon = ladder[static_cast<size_t>(i)];
            const RunOutcome out = run_simulation(rc);
            char prefix[32];
            std::snprintf(prefix, sizeof prefix, "eps_%d/", i);
            write_run_outputs(out, rc, sink, prefix);
            u_finals[static_cast<size_t>(i)] = out.u_final;
        } catch (const std::exception& e) {
            eps_errors[static_cast<size_t>(i)] = e.what();
        }
    });
    for (const auto& err : eps_errors)
        if (!err.empty()) throw std::runtime_error("epsilon study run failed: " + err);

    std::vector<double> diffs;
    for (size_t k = 0; k + 1 < ladder.size(); ++k) diffs.push_back(l1_diff(u_finals[k], u_finals[k + 1]));
    bool monotone = true;
    for (size_t k = 0; k + 1 < diffs.size(); ++k)
        if (diffs[k + 1] > diffs[k] + 1e-12 * (1.0 + diffs[k])) monotone = false;

    // h study against the finest level
    std::vector<Field> v_finals(levels.size());
    std::vector<std::string> h_errors(levels.size());
    parallel_for(static_cast<int>(levels.size()), base.workers, [&](int i) {
        try {
            RunConfig rc = base;
            const int cells = levels[static_cast<size_t>(i)];
            rc.grid = make_grid(base.grid.dimension, cells, base.grid.dimension == 2 ? cells : 1,
                                base.grid.lx, base.grid.ly);
            const RunOutcome out = run_simulation(rc);
            char prefix[32];
            std::snprintf(prefix, sizeof prefix, "h_%d/", i);
            write_run_outputs(out, rc, sink, prefix);
            v_finals[static_cast<size_t>(i)] = out.v_final;
        } catch (const std::exception& e) {
            h_errors[static_cast<size_t>(i)] = e.what();
        }
    });
    for (const auto& err : h_errors)
        if (!err.empty()) throw std::runtime_error("h study run failed: " + err);

    const Field& vfine = v_finals.back();
    std::vector<double> errs;
    for (size_t l = 0; l + 1 < levels.size(); ++l)
        errs.push_back(l1_diff(v_finals[l], restrict_to(vfine, v_finals[l].grid)));
    std::vector<double> orders;
    for (size_t l = 0; l + 1 < errs.size(); ++l) orders.push_back(std::log2(errs[l] / errs[l + 1]));
    double min_order = orders.empty() ? 0.0 : orders.front();
    for (double o : orders) min_order = std::min(min_order, o);
    const bool order_ok = min_order >= 1.0;

    json j;
    j["type"] = "converge";
    j["epsilon_study"] = {{"epsilons", ladder}, {"pairwise_l1", diffs}, {"monotone", monotone}};
    j["h_study"] = {{"levels", levels}, {"l1_errors_vs_finest", errs}, {"observed_orders", orders},
                    {"min_order", min_order}, {"order_ok", order_ok}};
    j["pass"] = monotone && order_ok;
    sink.write("convergence_report.json", j.dump(2));
    sink.write_manifest();
    return (monotone && order_ok) ? 0 : 2;
}

int cmd_ineq(const Config& cfg) {
    CorpusSpec corpus;
    corpus.seed = static_cast<uint64_t>(cfg.get_int("output", "seed"));
    corpus.count = static_cast<int>(cfg.get_int("ineq", "corpus_count"));
    corpus.mode_cap = static_cast<int>(cfg.get_int("ineq", "corpus_mode_cap"));
    corpus.amplitude = cfg.get_double("ineq", "corpus_amplitude");
    corpus.offset_max = cfg.get_double("ineq", "corpus_offset_max");
    corpus.psi_bound = cfg.get_double("ineq", "corpus_psi_bound");

    const double headroom = cfg.get_double("ineq", "holdout_headroom");
    const int cells = static_cast<int>(cfg.get_int("ineq", "cells"));
    const std::vector<int> phi_levels = cfg.get_int_list("ineq", "phi_grid_levels");
    const std::vector<int> phi_dims = cfg.get_int_list("ineq", "phi_dimensions");

    std::vector<std::string> checks;
    {
        std::istringstream ss(cfg.get_string("ineq", "checks"));
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) checks.push_back(item);
        }
    }

    std::vector<InequalityReport> reports;
    for (const std::string& check : checks) {
        if (check == "phi1") {
            for (int dim : phi_dims)
                for (double q : cfg.get_double_list("ineq", "phi_q_list"))
                    reports.push_back(check_phi(1, q, corpus, phi_levels, dim));
        } else if (check == "phi2") {
            for (int dim : phi_dims)
                for (double q : cfg.get_double_list("ineq", "phi2_q_list"))
                    reports.push_back(check_phi(2, q, corpus, phi_levels, dim));
        } else if (check == "fi1") {
            reports.push_back(check_fi1(cfg.get_double("ineq", "fi1_p"), cfg.get_double("ineq", "fi1_r"),
                                        cfg.get_double("ineq", "fi1_eta"), corpus,
                                        static_cast<int>(cfg.get_int("ineq", "fi1_cells")), headroom));
        } else if (check == "fi2") {
            for (double p : cfg.get_double_list("ineq", "fi2_p_list"))
                reports.push_back(check_fi2(p, cfg.get_double("ineq", "fi2_r"),
                                            cfg.get_double("ineq", "fi2_eta"), corpus, cells, headroom));
        } else if (check == "uv") {
            for (double beta : cfg.get_double_list("ineq", "uv_beta_list"))
                reports.push_back(check_interp_uv(cfg.get_double("ineq", "uv_kappa"), beta,
                                                  cfg.get_double("ineq", "uv_eta"), corpus, cells,
                                                  headroom));
        } else if (check == "uvnav") {
            for (double gamma : cfg.get_double_list("ineq", "uvnav_gamma_list"))
                reports.push_back(check_interp_uvnav(cfg.get_double("ineq", "uvnav_kappa"), gamma,
                                                     cfg.get_double("ineq", "uvnav_eta"), corpus, cells,
                                                     headroom));
        } else if (check == "high") {
            reports.push_back(check_interp_high(
                cfg.get_double("ineq", "high_p"), cfg.get_double("ineq", "high_m"),
                cfg.get_double("ineq", "high_p0"), cfg.get_double("ineq", "high_q"),
                cfg.get_double("ineq", "high_beta"), cfg.get_double("ineq", "high_eta"),
                cfg.get_double("ineq", "high_cap"), corpus, cells, headroom));
        } else {
            throw std::invalid_argument("unknown inequality check: " + check);
        }
    }

    OutputSink sink(cfg.get_string("output", "out_dir"));
    std::string all = "[\n";
    bool pass = true;
    for (size_t i = 0; i < reports.size(); ++i) {
        all += report_json(reports[i]);
        if (i + 1 < reports.size()) all += ",";
        all += "\n";
        pass = pass && reports[i].pass;
    }
    all += "]\n";
    sink.write("ineq_report.json", all);
    sink.write_manifest();
    return pass ? 0 : 2;
}

void apply_cli_overrides(Config& cfg, const std::string& out_dir, long long seed, int workers) {
    if (!out_dir.empty()) cfg.set("output", "out_dir", out_dir);
    if (seed >= 0) cfg.set("output", "seed", std::to_string(seed));
    if (workers > 0) cfg.set("output", "workers", std::to_string(workers));
}

} // namespace ddc
