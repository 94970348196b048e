// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.
//
// The criteria pin the structure-preservation guarantees at desk scale:
// the homogeneous oracle, the discrete maximum principle, the mass corridor,
// the consumption budget, the two energy-inequality audits, the inequality
// lab, sweep sanity, convergence behavior, and the structural identities of
// the discrete calculus.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ddc/harness.hpp"
#include "json.hpp"

using namespace ddc;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& what, bool pass, const std::string& detail = "") {
    std::printf("%s criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
                detail.empty() ? "" : " — ", detail.c_str());
    if (!pass) ++g_failures;
}

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

RunConfig base_1d_config() {
    RunConfig rc;
    rc.grid = make_grid(1, 64, 1, 1.0, 1.0);
    rc.params.dimension = 1;
    rc.params.m = 2.0;
    rc.params.alpha = 1.5;
    rc.params.ell = 0.0;
    rc.params.c_f = 1.0;
    rc.params.sensitivity_form = SensitivityForm::F2;
    rc.params.epsilon = 0.1;
    rc.ctrl.t_end = 1.0;
    rc.ctrl.dt_max = 1e-3;
    rc.u0 = PresetSpec{"constant", 1.0, 0.12, 0.5, 0.5, 0.0, 4};
    rc.v0 = PresetSpec{"constant", 1.0, 0.12, 0.5, 0.5, 0.0, 4};
    rc.cadence = 20;
    return rc;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- criterion 1: homogeneous oracle ------------------------------------

void criterion_1() {
    const auto t0 = clock_type::now();
    RunConfig rc = base_1d_config();
    rc.params.epsilon = 1e-8;
    const RunOutcome out = run_simulation(rc);
    const double elapsed = seconds_since(t0);

    const double target = std::exp(-1.0);
    const double sup_v = field_max(out.v_final);
    const double mean_v = integrate(out.v_final) / rc.grid.domain_area();
    double mass_drift = 0.0;
    for (const auto& r : out.records)
        mass_drift = std::max(mass_drift, std::abs(r.mass_u - out.mass_initial));

    char detail[256];
    std::snprintf(detail, sizeof detail,
                  "sup_v=%.6f mean_v=%.6f (target %.6f), mass drift %.2e, %.2f s", sup_v, mean_v,
                  target, mass_drift, elapsed);
    const bool pass = out.stop == StopCause::REACHED_T_END && std::abs(sup_v - target) < 2e-3 &&
                      std::abs(mean_v - target) < 2e-3 &&
                      mass_drift <= 1e-12 * out.mass_initial && elapsed < 1.0;
    report(1, "homogeneous oracle hits e^{-1}", pass, detail);
}

// ---- criterion 2: discrete maximum principle -----------------------------

RunOutcome run_2d_admissible(double t_end, int cells, PresetSpec u0, double alpha, double* elapsed) {
    RunConfig rc;
    rc.grid = make_grid(2, cells, cells, 1.0, 1.0);
    rc.params.dimension = 2;
    rc.params.m = 2.0;
    rc.params.alpha = alpha;
    rc.params.ell = 0.0;
    rc.params.epsilon = 0.1;
    rc.ctrl.t_end = t_end;
    rc.ctrl.dt_max = 1e-3;
    rc.u0 = u0;
    rc.v0 = PresetSpec{"constant", 1.0, 0.12, 0.5, 0.5, 0.0, 4};
    rc.cadence = 50;
    const auto t0 = clock_type::now();
    RunOutcome out = run_simulation(rc);
    if (elapsed) *elapsed = seconds_since(t0);
    return out;
}

void criterion_2() {
    double elapsed = 0.0;
    const RunOutcome out = run_2d_admissible(1.0, 64, PresetSpec{"gaussian_bump", 1.0, 0.12, 0.5, 0.5, 0.0, 4},
                                             1.3, &elapsed);
    bool sup_v_monotone = true;
    for (size_t k = 1; k < out.records.size(); ++k)
        if (out.records[k].sup_v > out.records[k - 1].sup_v) sup_v_monotone = false;
    int vin_steps = 0;
    for (const auto& e : out.ledger.entries)
        if (e.check == "vin_step" || e.check == "vin") ++vin_steps;

    char detail[256];
    std::snprintf(detail, sizeof detail, "steps=%lld, ledger entries=%zu, %.1f s",
                  static_cast<long long>(out.steps), out.ledger.entries.size(), elapsed);
    const bool pass = out.stop == StopCause::REACHED_T_END && sup_v_monotone && vin_steps == 0 &&
                      out.ledger.entries.empty() && elapsed < 120.0;
    report(2, "2D maximum principle holds at every accepted step", pass, detail);
}

// ---- criterion 3: mass corridor -------------------------------------------

void criterion_3(const RunOutcome** out_keep, RunOutcome* storage) {
    RunConfig rc = base_1d_config();
    rc.grid = make_grid(1, 256, 1, 1.0, 1.0);
    rc.params.ell = 0.5;
    rc.u0 = PresetSpec{"gaussian_bump", 1.0, 0.12, 0.5, 0.5, 0.0, 4};
    rc.v0 = PresetSpec{"gaussian_bump", 0.5, 0.15, 0.5, 0.5, 1.0, 4};
    const RunOutcome out = run_simulation(rc);

    const double lower = out.mass_initial;
    const double upper = out.mass_initial + rc.params.ell * out.v0_integral;
    bool inside = true;
    for (const auto& r : out.records)
        if (r.mass_u < lower - 1e-8 || r.mass_u > upper + 1e-8) inside = false;
    int u1 = 0;
    for (const auto& e : out.ledger.entries)
        if (e.check == "u1") ++u1;

    char detail[160];
    std::snprintf(detail, sizeof detail, "mass in [%.6f, %.6f], final %.6f", lower, upper,
                  out.records.back().mass_u);
    report(3, "mass trajectory stays inside the (u1) corridor", inside && u1 == 0 && out.stop == StopCause::REACHED_T_END,
           detail);
    *storage = out;
    *out_keep = storage;
}

// ---- criterion 5 helpers ---------------------------------------------------

struct AuditResult {
    std::string name;
    double residual;
    double K;
    bool consumption_ok;
};

} // namespace

int main() {
    fs::remove_all("acceptance_out");
    fs::create_directories("acceptance_out");

    criterion_1();
    criterion_2();

    const RunOutcome* mass_run = nullptr;
    RunOutcome mass_storage;
    criterion_3(&mass_run, &mass_storage);

    // criterion 4: consumption budget over the suite runs gathered below
    std::vector<std::pair<std::string, const RunOutcome*>> budget_runs;
    budget_runs.emplace_back("mass-run", mass_run);

    // ---- criterion 5: energy audits ---------------------------------------
    bool c5_pass = true;
    std::string c5_detail;
    std::vector<RunOutcome> keep;
    keep.reserve(16);
    {
        // 1D: calibrate on the gaussian preset, audit different presets with
        // (approximately) the same K = sup u0 + sup v0 + 0
        RunConfig cal = base_1d_config();
        cal.grid = make_grid(1, 256, 1, 1.0, 1.0);
        cal.u0 = PresetSpec{"gaussian_bump", 1.0, 0.12, 0.5, 0.5, 0.0, 4};
        keep.push_back(run_simulation(cal));
        const RunOutcome& cal_out = keep.back();
        c5_pass = c5_pass && cal_out.energy_f.ran && !cal_out.energy_f.violated;
        budget_runs.emplace_back("1d-calibration", &cal_out);

        const std::vector<PresetSpec> audits_1d = {
            PresetSpec{"two_bumps", 0.996, 0.12, 0.5, 0.5, 0.0, 4},
            PresetSpec{"checker", 1.0, 0.12, 0.5, 0.5, 0.0, 4},
            PresetSpec{"gaussian_bump", 1.0, 0.06, 0.5, 0.5, 0.0, 4},
        };
        for (size_t a = 0; a < audits_1d.size(); ++a) {
            RunConfig rc = cal;
            rc.u0 = audits_1d[a];
            rc.audit_c_f = cal_out.energy_f.constant_used;
            keep.push_back(run_simulation(rc));
            const RunOutcome& out = keep.back();
            budget_runs.emplace_back("1d-audit-" + std::to_string(a), &out);
            if (out.energy_f.violated) {
                c5_pass = false;
                c5_detail += " 1d-audit-" + std::to_string(a) + " residual " +
                             std::to_string(out.energy_f.worst_residual);
            }
            if (std::abs(out.K - cal_out.K) > 0.02 * cal_out.K) {
                c5_pass = false;
                c5_detail += " 1d-audit-" + std::to_string(a) + " K mismatch";
            }
        }

        // 2D: same protocol for the quasi-energy G
        double unused = 0.0;
        keep.push_back(run_2d_admissible(0.5, 48, PresetSpec{"gaussian_bump", 1.0, 0.12, 0.5, 0.5, 0.0, 4},
                                         1.3, &unused));
        const RunOutcome& cal2 = keep.back();
        c5_pass = c5_pass && cal2.energy_g.ran && !cal2.energy_g.violated;
        budget_runs.emplace_back("2d-calibration", &cal2);

        const std::vector<PresetSpec> audits_2d = {
            PresetSpec{"two_bumps", 0.996, 0.12, 0.5, 0.5, 0.0, 4},
            PresetSpec{"checker", 1.0, 0.12, 0.5, 0.5, 0.0, 4},
            PresetSpec{"gaussian_bump", 1.0, 0.08, 0.5, 0.5, 0.0, 4},
        };
        for (size_t a = 0; a < audits_2d.size(); ++a) {
            RunConfig rc;
            rc.grid = make_grid(2, 48, 48, 1.0, 1.0);
            rc.params.dimension = 2;
            rc.params.m = 2.0;
            rc.params.alpha = 1.3;
            rc.params.epsilon = 0.1;
            rc.ctrl.t_end = 0.5;
            rc.ctrl.dt_max = 1e-3;
            rc.u0 = audits_2d[a];
            rc.v0 = PresetSpec{"constant", 1.0, 0.12, 0.5, 0.5, 0.0, 4};
            rc.cadence = 50;
            rc.audit_c_g = cal2.energy_g.constant_used;
            rc.audit_g_upart = cal2.energy_g.upart_c;
            keep.push_back(run_simulation(rc));
            const RunOutcome& out = keep.back();
            budget_runs.emplace_back("2d-audit-" + std::to_string(a), &out);
            if (out.energy_g.violated) {
                c5_pass = false;
                c5_detail += " 2d-audit-" + std::to_string(a) + " residual " +
                             std::to_string(out.energy_g.worst_residual);
            }
            if (std::abs(out.K - cal2.K) > 0.02 * cal2.K) {
                c5_pass = false;
                c5_detail += " 2d-audit-" + std::to_string(a) + " K mismatch";
            }
        }
    }
    // ---- criterion 4: consumption budget over every suite run --------------
    {
        bool ok = true;
        std::string detail;
        for (const auto& [name, out] : budget_runs) {
            if (!(out->budgets.consumption <= out->v0_integral * (1.0 + 1e-8))) {
                ok = false;
                detail += " " + name;
            }
        }
        char buf[128];
        std::snprintf(buf, sizeof buf, "%zu runs checked", budget_runs.size());
        report(4, "consumption budget (uv1) within int(v0)", ok, ok ? buf : detail);
    }
    report(5, "energy inequality audits (F and G) hold with calibrated constants", c5_pass, c5_detail);

    // ---- criterion 6: inequality lab default suite -------------------------
    {
        const auto t0 = clock_type::now();
        Config cfg = Config::parse("[output]\nout_dir = acceptance_out/ineq\nseed = 1\n");
        const int code = cmd_ineq(cfg);
        const double elapsed = seconds_since(t0);

        bool parsed_ok = code == 0;
        bool holdouts_zero = true;
        bool phi_monotone = true;
        int n_reports = 0;
        try {
            const auto arr = nlohmann::json::parse(slurp("acceptance_out/ineq/ineq_report.json"));
            for (const auto& rep : arr) {
                ++n_reports;
                if (rep["holdout_violations"].get<int>() != 0) holdouts_zero = false;
                const std::string id = rep["inequality_id"].get<std::string>();
                if (id == "PHI1" || id == "PHI2") {
                    const auto& levels = rep["grid_levels"];
                    for (size_t l = 1; l < levels.size(); ++l) {
                        const double prev = levels[l - 1]["worst_ratio"].get<double>();
                        const double cur = levels[l]["worst_ratio"].get<double>();
                        if (cur > prev * 1.05) phi_monotone = false;
                    }
                }
            }
        } catch (const std::exception&) {
            parsed_ok = false;
        }
        char detail[160];
        std::snprintf(detail, sizeof detail, "exit=%d, %d reports, %.1f s", code, n_reports, elapsed);
        report(6, "inequality lab: zero holdout violations, PHI refinement consistent",
               parsed_ok && holdouts_zero && phi_monotone && elapsed < 300.0, detail);
    }

    // ---- criterion 7: sweep sanity -----------------------------------------
    {
        Config cfg = Config::parse("[grid]\n"
                                   "dimension = 2\n"
                                   "cells_x = 64\n"
                                   "cells_y = 64\n"
                                   "[model]\n"
                                   "m = 2.0\n"
                                   "epsilon = 0.1\n"
                                   "[initial]\n"
                                   "u0_preset = gaussian_bump\n"
                                   "v0_preset = constant\n"
                                   "[stepping]\n"
                                   "t_end = 1.0\n"
                                   "[diagnostics]\n"
                                   "cadence = 50\n"
                                   "[sweep]\n"
                                   "m_values = 2.0\n"
                                   "alpha_values = 1.25,1.45,1.8\n"
                                   "[output]\n"
                                   "out_dir = acceptance_out/sweep\n"
                                   "workers = 3\n");
        const int code = cmd_sweep(cfg);
        bool all_bounded = false, all_in_theory = false;
        try {
            const auto rep = nlohmann::json::parse(slurp("acceptance_out/sweep/sweep_report.json"));
            all_bounded = true;
            all_in_theory = true;
            for (const auto& cell : rep["cells"]) {
                if (cell["classification"].get<std::string>() != "BOUNDED") all_bounded = false;
                if (cell["regime"].get<std::string>() != "WEAK_2D") all_in_theory = false;
            }
        } catch (const std::exception&) {
        }
        char detail[128];
        std::snprintf(detail, sizeof detail, "exit=%d, all BOUNDED=%d, all in-theory=%d", code,
                      all_bounded, all_in_theory);
        report(7, "2D sweep over alpha in {1.25, 1.45, 1.8} is BOUNDED and in-theory",
               code == 0 && all_bounded && all_in_theory, detail);
    }

    // ---- criterion 8: convergence studies ----------------------------------
    {
        Config cfg = Config::parse("[grid]\n"
                                   "dimension = 1\n"
                                   "cells_x = 128\n"
                                   "[model]\n"
                                   "m = 2.0\n"
                                   "alpha = 1.5\n"
                                   "epsilon = 0.1\n"
                                   "[initial]\n"
                                   "u0_preset = gaussian_bump\n"
                                   "u0_width = 0.15\n"
                                   "v0_preset = constant\n"
                                   "[stepping]\n"
                                   "t_end = 0.25\n"
                                   "[diagnostics]\n"
                                   "cadence = 200\n"
                                   "[converge]\n"
                                   "epsilon_ladder = 0.1,0.05,0.025,0.0125\n"
                                   "grid_levels = 64,128,256\n"
                                   "[output]\n"
                                   "out_dir = acceptance_out/converge\n"
                                   "workers = 4\n");
        const int code = cmd_converge(cfg);
        bool strict = false;
        double min_order = 0.0;
        try {
            const auto rep = nlohmann::json::parse(slurp("acceptance_out/converge/convergence_report.json"));
            const auto diffs = rep["epsilon_study"]["pairwise_l1"].get<std::vector<double>>();
            strict = true;
            for (size_t k = 1; k < diffs.size(); ++k)
                if (!(diffs[k] < diffs[k - 1])) strict = false;
            min_order = rep["h_study"]["min_order"].get<double>();
        } catch (const std::exception&) {
        }
        char detail[128];
        std::snprintf(detail, sizeof detail, "exit=%d, strictly decreasing=%d, min order=%.2f", code,
                      strict, min_order);
        report(8, "epsilon family is Cauchy and v converges at order >= 1", code == 0 && strict && min_order >= 1.0,
               detail);
    }

    // ---- criterion 9: structural identities --------------------------------
    {
        bool ok = true;
        // summation by parts on random fields
        {
            const Grid g = make_grid(2, 24, 20, 1.3, 1.0);
            Field f(g), w(g);
            uint64_t s = 12345;
            auto rng = [&s]() {
                s += 0x9E3779B97F4A7C15ULL;
                uint64_t z = s;
                z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
                z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
                return static_cast<double>((z ^ (z >> 31)) >> 11) * 0x1.0p-53;
            };
            for (int k = 0; k < g.cells(); ++k) {
                f[k] = 2.0 * rng() - 1.0;
                w[k] = 2.0 * rng() - 1.0;
            }
            const FaceFluxes gf = face_gradient(f);
            const FaceFluxes gw = face_gradient(w);
            const Field div = divergence(gf);
            double lhs = 0.0;
            for (int k = 0; k < g.cells(); ++k) lhs += w[k] * div[k];
            lhs *= g.cell_area();
            double rhs = 0.0;
            for (size_t k = 0; k < gf.fx.size(); ++k) rhs += gf.fx[k] * gw.fx[k];
            for (size_t k = 0; k < gf.fy.size(); ++k) rhs += gf.fy[k] * gw.fy[k];
            rhs *= g.cell_area();
            if (std::abs(lhs + rhs) > 1e-12 * std::max(std::abs(lhs), std::abs(rhs))) ok = false;

            // divergence integral telescopes to zero
            FaceFluxes any(g);
            for (double& x : any.fx) x = 2.0 * rng() - 1.0;
            for (double& x : any.fy) x = 2.0 * rng() - 1.0;
            if (std::abs(integrate(divergence(any))) > 1e-12 * g.cells()) ok = false;
        }
        // mirror symmetry over 100 steps
        {
            const Grid g = make_grid(1, 64, 1, 1.0, 1.0);
            ModelParams p;
            p.dimension = 1;
            p.m = 2.0;
            p.alpha = 1.5;
            p.ell = 0.5;
            p.epsilon = 0.1;
            StepControl ctrl;
            ctrl.dt_max = 1e-3;
            ctrl.t_end = 10.0;
            Field u0(g), v0(g);
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.center_x(i);
                u0[i] = 0.1 + std::exp(-40.0 * (x - 0.5) * (x - 0.5));
                v0[i] = 1.0 + 0.3 * std::cos(2.0 * M_PI * x);
            }
            for (int i = 0; i < g.nx / 2; ++i) {
                u0[g.nx - 1 - i] = u0[i];
                v0[g.nx - 1 - i] = v0[i];
            }
            State st{0.0, u0, v0, 0, 0.0};
            StepLedger ledger;
            for (int n = 0; n < 100; ++n)
                if (advance(st, p, ctrl, ledger).has_value()) break;
            for (int i = 0; i < g.nx; ++i) {
                if (std::abs(st.u[i] - st.u[g.nx - 1 - i]) > 1e-12) ok = false;
                if (std::abs(st.v[i] - st.v[g.nx - 1 - i]) > 1e-12) ok = false;
            }
        }
        report(9, "summation by parts, flux conservation, 100-step mirror symmetry", ok);
    }

    std::printf("%s: %d criterion(s) failed\n", g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                g_failures);
    return g_failures == 0 ? 0 : 1;
}
