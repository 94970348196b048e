#include "ddc/ddc.h"

#include <optional>
#include <string>

#include "ddc/harness.hpp"

namespace {

thread_local std::string t_last_error;

void set_error(const std::string& msg) { t_last_error = msg; }

ddc_status run_command(int (*cmd)(const ddc::Config&), const char* config_path, const char* out_dir,
                       long long seed, int workers) {
    if (!config_path) {
        set_error("config path is null");
        return DDC_ERR_CONFIG;
    }
    try {
        ddc::Config cfg = ddc::Config::parse_file(config_path);
        ddc::apply_cli_overrides(cfg, out_dir ? out_dir : "", seed, workers);
        const int code = cmd(cfg);
        if (code == 0) return DDC_OK;
        if (code == 2) {
            set_error("violations recorded or thresholds unmet");
            return DDC_ERR_VIOLATION;
        }
        if (code == 3) {
            set_error("run aborted before t_end");
            return DDC_ERR_ABORTED;
        }
        set_error("command failed");
        return DDC_ERR_CONFIG;
    } catch (const ddc::ConfigError& e) {
        set_error(e.what());
        return DDC_ERR_CONFIG;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return DDC_ERR_CONFIG;
    } catch (const std::exception& e) {
        set_error(e.what());
        return DDC_ERR_INTERNAL;
    }
}

} // namespace

struct ddc_sim {
    ddc::RunConfig rc;
    ddc::State state;
    ddc::StepControl ctrl;
    ddc::StepLedger ledger;
    std::optional<ddc::StopCause> stop;
};

namespace {

ddc_status sim_create_impl(ddc::Config cfg, ddc_sim** out_sim) {
    try {
        ddc::RunConfig rc = ddc::RunConfig::from_config(cfg);
        auto sim = new ddc_sim;
        sim->rc = rc;
        const ddc::Field u0 = ddc::build_preset_field(rc.grid, rc.u0);
        const ddc::Field v0 = ddc::build_preset_field(rc.grid, rc.v0);
        const ddc::InitialData init(u0, v0);
        sim->state = ddc::State{0.0, ddc::regularize_initial(u0, rc.params), v0, 0, 0.0};
        sim->ctrl = rc.ctrl;
        sim->ctrl.u_blowup_threshold = rc.blowup_factor * (1.0 + ddc::field_max(sim->state.u));
        *out_sim = sim;
        return DDC_OK;
    } catch (const std::exception& e) {
        set_error(e.what());
        return DDC_ERR_CONFIG;
    }
}

ddc_status copy_field(const ddc::Field& f, double* buf, size_t buf_len) {
    if (!buf || buf_len < f.data.size()) {
        set_error("buffer too small");
        return DDC_ERR_CONFIG;
    }
    for (size_t k = 0; k < f.data.size(); ++k) buf[k] = f.data[k];
    return DDC_OK;
}

} // namespace

extern "C" {

const char* ddc_version(void) { return "0.1.0"; }

const char* ddc_last_error(void) { return t_last_error.c_str(); }

const char* ddc_config_reference(void) {
    static const std::string page = ddc::config_reference_page();
    return page.c_str();
}

ddc_status ddc_run(const char* config_path, const char* out_dir, long long seed, int workers) {
    return run_command(ddc::cmd_run, config_path, out_dir, seed, workers);
}

ddc_status ddc_sweep(const char* config_path, const char* out_dir, long long seed, int workers) {
    return run_command(ddc::cmd_sweep, config_path, out_dir, seed, workers);
}

ddc_status ddc_converge(const char* config_path, const char* out_dir, long long seed, int workers) {
    return run_command(ddc::cmd_converge, config_path, out_dir, seed, workers);
}

ddc_status ddc_ineq(const char* config_path, const char* out_dir, long long seed, int workers) {
    return run_command(ddc::cmd_ineq, config_path, out_dir, seed, workers);
}

ddc_status ddc_sim_create(const char* config_path, ddc_sim** out_sim) {
    if (!config_path || !out_sim) {
        set_error("null argument");
        return DDC_ERR_CONFIG;
    }
    try {
        return sim_create_impl(ddc::Config::parse_file(config_path), out_sim);
    } catch (const std::exception& e) {
        set_error(e.what());
        return DDC_ERR_CONFIG;
    }
}

ddc_status ddc_sim_create_from_string(const char* config_text, ddc_sim** out_sim) {
    if (!config_text || !out_sim) {
        set_error("null argument");
        return DDC_ERR_CONFIG;
    }
    try {
        return sim_create_impl(ddc::Config::parse(config_text), out_sim);
    } catch (const std::exception& e) {
        set_error(e.what());
        return DDC_ERR_CONFIG;
    }
}

void ddc_sim_destroy(ddc_sim* sim) { delete sim; }

ddc_status ddc_sim_step(ddc_sim* sim, int* out_stopped) {
    if (!sim) {
        set_error("null simulation handle");
        return DDC_ERR_CONFIG;
    }
    if (sim->stop) {
        if (out_stopped) *out_stopped = 1;
        return DDC_OK;
    }
    try {
        sim->stop = ddc::advance(sim->state, sim->rc.params, sim->ctrl, sim->ledger);
        if (out_stopped) *out_stopped = sim->stop.has_value() ? 1 : 0;
        if (sim->stop && *sim->stop != ddc::StopCause::REACHED_T_END) {
            set_error("run stopped: " + ddc::to_string(*sim->stop));
            return DDC_ERR_ABORTED;
        }
        return DDC_OK;
    } catch (const std::exception& e) {
        set_error(e.what());
        return DDC_ERR_INTERNAL;
    }
}

ddc_status ddc_sim_run_to_end(ddc_sim* sim) {
    if (!sim) {
        set_error("null simulation handle");
        return DDC_ERR_CONFIG;
    }
    int stopped = 0;
    while (!stopped) {
        const ddc_status st = ddc_sim_step(sim, &stopped);
        if (st != DDC_OK) return st;
    }
    return DDC_OK;
}

double ddc_sim_time(const ddc_sim* sim) { return sim ? sim->state.t : 0.0; }

long long ddc_sim_step_index(const ddc_sim* sim) { return sim ? sim->state.step_index : -1; }

int ddc_sim_cells_x(const ddc_sim* sim) { return sim ? sim->rc.grid.nx : 0; }

int ddc_sim_cells_y(const ddc_sim* sim) { return sim ? sim->rc.grid.ny : 0; }

ddc_stop_cause ddc_sim_stop_cause(const ddc_sim* sim) {
    if (!sim || !sim->stop) return DDC_STOP_RUNNING;
    switch (*sim->stop) {
        case ddc::StopCause::REACHED_T_END: return DDC_STOP_REACHED_T_END;
        case ddc::StopCause::BLOWUP_SUSPECT_SUP_U: return DDC_STOP_BLOWUP_SUSPECT_SUP_U;
        case ddc::StopCause::DT_UNDERFLOW: return DDC_STOP_DT_UNDERFLOW;
        case ddc::StopCause::LINEAR_SOLVE_FAILURE: return DDC_STOP_LINEAR_SOLVE_FAILURE;
    }
    return DDC_STOP_RUNNING;
}

double ddc_sim_mass_u(const ddc_sim* sim) { return sim ? ddc::integrate(sim->state.u) : 0.0; }

double ddc_sim_sup_u(const ddc_sim* sim) { return sim ? ddc::field_max(sim->state.u) : 0.0; }

double ddc_sim_sup_v(const ddc_sim* sim) { return sim ? ddc::field_max(sim->state.v) : 0.0; }

double ddc_sim_consumption_budget(const ddc_sim* sim) { return sim ? sim->ledger.consumption : 0.0; }

ddc_status ddc_sim_copy_u(const ddc_sim* sim, double* buf, size_t buf_len) {
    if (!sim) {
        set_error("null simulation handle");
        return DDC_ERR_CONFIG;
    }
    return copy_field(sim->state.u, buf, buf_len);
}

ddc_status ddc_sim_copy_v(const ddc_sim* sim, double* buf, size_t buf_len) {
    if (!sim) {
        set_error("null simulation handle");
        return DDC_ERR_CONFIG;
    }
    return copy_field(sim->state.v, buf, buf_len);
}

} // extern "C"
