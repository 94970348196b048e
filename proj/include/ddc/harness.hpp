#pragma once

// Runnable surface: run configuration assembly, initial-condition presets,
// the run driver with its per-step monitors, parameter-plane sweeps,
// convergence studies, the inequality suite driver, and file outputs
// (diagnostics CSV, PGM snapshots, JSON reports, manifest).

#include <cstdint>
#include <string>
#include <vector>

#include "ddc/config.hpp"
#include "ddc/diagnostics.hpp"
#include "ddc/ineqlab.hpp"
#include "ddc/stepper.hpp"

namespace ddc {

struct PresetSpec {
    std::string preset = "constant";   // constant | gaussian_bump | two_bumps | checker
    double amplitude = 1.0;
    double width = 0.12;       // relative to length_x
    double center_x = 0.5;     // fraction of length_x
    double center_y = 0.5;     // fraction of length_y
    double offset = 0.0;
    int modes = 4;             // checker half-periods
};

Field build_preset_field(const Grid& g, const PresetSpec& spec);

struct RunConfig {
    Grid grid;
    ModelParams params;
    StepControl ctrl;
    PresetSpec u0;
    PresetSpec v0;
    DiagnosticsConfig diag;
    int cadence = 20;
    double growth_factor = 10.0;
    double baseline_fraction = 0.1;
    double blowup_factor = 1e6;   // threshold = factor * (1 + sup u0eps)
    EnergyCoefficients energy;
    double audit_headroom = 1.25;
    // audit-mode constants; negative means calibrate
    double audit_c_f = -1.0;
    double audit_c_g = -1.0;        // majorant constant of the G monitor
    double audit_g_upart = -1.0;    // u-part weight of the G monitor (paired with audit_c_g)
    std::vector<double> audit_c1;   // aligned with diag.q_list when nonempty
    std::string out_dir = "out";
    uint64_t seed = 1;
    int workers = 1;
    std::vector<double> snapshot_times;   // empty: t_end only

    static RunConfig from_config(const Config& cfg);
};

struct EnergySummary {
    bool ran = false;
    bool audited = false;
    double constant_used = 0.0;
    double upart_c = 0.0;         // G monitor only
    double worst_residual = 0.0;
    double tolerance = 0.0;       // roundoff allowance, 1e-9 * (1 + functional scale)
    bool violated = false;        // worst_residual > tolerance
};

struct RunOutcome {
    StopCause stop = StopCause::REACHED_T_END;
    std::string classification;   // BOUNDED | GROWTH_SUSPECT | ABORTED
    double final_time = 0.0;
    double peak_sup_u = 0.0;
    double K = 0.0;
    double mass_initial = 0.0;
    double v0_integral = 0.0;
    long long steps = 0;
    long long halvings = 0;
    AdmissibilityVerdict verdict;
    ViolationLedger ledger;
    CumulativeBudgets budgets;
    std::vector<DiagnosticsRecord> records;
    EnergySummary energy_f;
    EnergySummary energy_g;
    std::vector<EnergySummary> navq;   // aligned with diag.q_list
    Field u_final;
    Field v_final;
    struct Snapshot {
        double t;
        Field u;
        Field v;
    };
    std::vector<Snapshot> snapshots;
};

// Executes one simulation with all monitors; no file I/O.
RunOutcome run_simulation(const RunConfig& rc);

std::string run_report_json(const RunOutcome& out, const RunConfig& rc);

// Collects written files for the run-level manifest (path, size, fnv1a hash).
class OutputSink {
  public:
    explicit OutputSink(std::string root_dir);
    void write(const std::string& relpath, const std::string& bytes);
    void write_manifest();   // manifest.txt over everything written so far
    const std::string& root() const { return root_; }

  private:
    std::string root_;
    std::vector<std::pair<std::string, std::string>> entries_;   // relpath, "size hash"
};

std::string pgm_encode(const Field& f, double* out_min, double* out_max);

// Writes diagnostics.csv, report.json, snapshots and the manifest.
void write_run_outputs(const RunOutcome& out, const RunConfig& rc, OutputSink& sink,
                       const std::string& prefix = "");

// exit codes: 0 ok, 1 config/usage, 2 violations/thresholds, 3 aborted run
int cmd_run(const Config& cfg);
int cmd_sweep(const Config& cfg);
int cmd_converge(const Config& cfg);
int cmd_ineq(const Config& cfg);

// applies --out/--seed/--workers overrides onto a parsed config
void apply_cli_overrides(Config& cfg, const std::string& out_dir, long long seed, int workers);

uint64_t fnv1a64(const std::string& bytes);

} // namespace ddc
