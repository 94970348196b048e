#include "ddc/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ddc {

const std::vector<ConfigKeyDoc>& config_key_table() {
    static const std::vector<ConfigKeyDoc> table = {
        {"grid", "dimension", "1", "spatial dimension, 1 or 2"},
        {"grid", "cells_x", "256", "cells in x (>= 4)"},
        {"grid", "cells_y", "1", "cells in y (1 in 1D, >= 4 in 2D)"},
        {"grid", "length_x", "1.0", "domain extent in x"},
        {"grid", "length_y", "1.0", "domain extent in y (1 in 1D)"},

        {"model", "m", "2.0", "diffusion exponent, 1 <= m < 4"},
        {"model", "alpha", "1.5", "sensitivity exponent"},
        {"model", "ell", "0.0", "growth coefficient"},
        {"model", "c_f", "1.0", "sensitivity coefficient"},
        {"model", "sensitivity_form", "f2", "f1: c_f u (u+1)^(a-1); f2: c_f u^a"},
        {"model", "epsilon", "0.1", "initial-data regularization, in [0,1); 0 only for m >= 3"},

        {"initial", "u0_preset", "gaussian_bump", "constant | gaussian_bump | two_bumps | checker"},
        {"initial", "u0_amplitude", "1.0", "preset amplitude"},
        {"initial", "u0_width", "0.12", "bump width relative to length_x"},
        {"initial", "u0_center_x", "0.5", "bump center, fraction of length_x"},
        {"initial", "u0_center_y", "0.5", "bump center, fraction of length_y"},
        {"initial", "u0_offset", "0.0", "additive offset"},
        {"initial", "u0_modes", "4", "checker half-period count"},
        {"initial", "v0_preset", "constant", "constant | gaussian_bump | two_bumps | checker"},
        {"initial", "v0_amplitude", "1.0", "preset amplitude"},
        {"initial", "v0_width", "0.12", "bump width relative to length_x"},
        {"initial", "v0_center_x", "0.5", "bump center, fraction of length_x"},
        {"initial", "v0_center_y", "0.5", "bump center, fraction of length_y"},
        {"initial", "v0_offset", "0.0", "additive offset (v0 must stay positive)"},
        {"initial", "v0_modes", "4", "checker half-period count"},

        {"stepping", "dt_init", "1e-4", "initial step size"},
        {"stepping", "dt_min", "1e-12", "lower step bound"},
        {"stepping", "dt_max", "1e-3", "upper step bound"},
        {"stepping", "safety", "0.9", "CFL safety factor in (0,1]"},
        {"stepping", "t_end", "1.0", "final time"},
        {"stepping", "blowup_factor", "1e6", "sup u threshold = factor * (1 + sup u0)"},
        {"stepping", "linear_solve_rtol", "1e-10", "CG relative residual target"},
        {"stepping", "max_halvings", "40", "dt halving retries per step"},
        {"stepping", "cg_max_iters", "2000", "CG iteration cap"},

        {"diagnostics", "cadence", "20", "accepted steps between records"},
        {"diagnostics", "p_list", "2,3,4", "Lp norms of u"},
        {"diagnostics", "q_list", "2,4", "gradient functional exponents (must include 2 and 4)"},
        {"diagnostics", "growth_factor", "10.0", "BOUNDED classification threshold"},
        {"diagnostics", "baseline_fraction", "0.1", "fraction of the run defining the early baseline"},
        {"diagnostics", "energy_c2", "0.25", "coefficient on int(v |grad u|^2) in the F monitor"},
        {"diagnostics", "energy_gc", "1.0", "constant multiplying the u part of G"},
        {"diagnostics", "audit_headroom", "1.25", "factor applied to audited energy constants"},
        {"diagnostics", "audit_c_f", "", "audit-mode constant for the F inequality (empty: calibrate)"},
        {"diagnostics", "audit_c_g", "", "audit-mode majorant constant for the G inequality (empty: calibrate)"},
        {"diagnostics", "audit_g_upart", "", "audit-mode u-part weight of G (required with audit_c_g)"},
        {"diagnostics", "audit_c1_list", "", "audit-mode constants per q_list entry (empty: calibrate)"},

        {"output", "out_dir", "out", "output directory"},
        {"output", "seed", "1", "run seed"},
        {"output", "workers", "1", "parallel worker count for sweeps and studies"},
        {"output", "snapshot_times", "", "comma list of snapshot times (empty: t_end)"},

        {"sweep", "m_values", "2.0", "sweep axis in m"},
        {"sweep", "alpha_values", "1.25,1.45,1.8", "sweep axis in alpha"},

        {"converge", "epsilon_ladder", "0.1,0.05,0.025,0.0125", "epsilon study values (>= 3)"},
        {"converge", "grid_levels", "64,128,256", "h study cell counts (>= 3, each dividing the next)"},

        {"ineq", "checks", "phi1,phi2,fi1,fi2,uv,uvnav,high", "which checks to run"},
        {"ineq", "corpus_count", "200", "fields per corpus"},
        {"ineq", "corpus_mode_cap", "4", "highest cosine mode"},
        {"ineq", "corpus_amplitude", "1.0", "coefficient amplitude law |a_k| <= A/k^2"},
        {"ineq", "corpus_offset_max", "0.5", "phi positivity offset range"},
        {"ineq", "corpus_psi_bound", "1.2", "psi log-amplitude bound B, min psi >= exp(-B)"},
        {"ineq", "phi_q_list", "2,4", "q values for PHI1"},
        {"ineq", "phi2_q_list", "2", "q values for PHI2"},
        {"ineq", "phi_grid_levels", "64,128,256", "refinement ladder for PHI checks"},
        {"ineq", "phi_dimensions", "1,2", "dimensions to run PHI checks in"},
        {"ineq", "fi1_p", "1.0", "FI1 exponent p >= 1"},
        {"ineq", "fi1_r", "4.0", "FI1 norm index r > 1"},
        {"ineq", "fi1_eta", "0.1", "FI1 structural weight"},
        {"ineq", "fi1_cells", "256", "FI1 grid cells (1D)"},
        {"ineq", "fi2_p_list", "0.5,1", "FI2 exponents p > 0"},
        {"ineq", "fi2_r", "2.0", "FI2 norm index r >= 2"},
        {"ineq", "fi2_eta", "0.1", "FI2 structural weight"},
        {"ineq", "uv_kappa", "-0.5", "UV interpolation kappa in (-1,0)"},
        {"ineq", "uv_beta_list", "1,2", "UV interpolation beta values in [1, kappa+3)"},
        {"ineq", "uv_eta", "0.1", "UV structural weight"},
        {"ineq", "uvnav_kappa", "-0.5", "UVNAV kappa in (-1,0)"},
        {"ineq", "uvnav_gamma_list", "0,1.5", "UVNAV gamma values in [0, kappa/2+2)"},
        {"ineq", "uvnav_eta", "0.1", "UVNAV structural weight"},
        {"ineq", "high_p", "3.0", "HIGH check p"},
        {"ineq", "high_m", "2.0", "HIGH check m"},
        {"ineq", "high_p0", "1.5", "HIGH check p0"},
        {"ineq", "high_q", "8.0", "HIGH check q > 2(p+m-1)/p0"},
        {"ineq", "high_beta", "4.0", "HIGH check beta in [p+m-1, p0+p+m-1)"},
        {"ineq", "high_eta", "0.1", "HIGH structural weight"},
        {"ineq", "high_cap", "10.0", "cap on int(u^p0)"},
        {"ineq", "cells", "64", "grid cells for the 2D protocol checks"},
        {"ineq", "holdout_headroom", "1.5", "factor applied to estimated constants on the holdout half"},
    };
    return table;
}

namespace {

const ConfigKeyDoc* find_key(const std::string& section, const std::string& key) {
    for (const auto& doc : config_key_table())
        if (doc.section == section && doc.key == key) return &doc;
    return nullptr;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

} // namespace

std::string config_reference_page() {
    std::string out = "# Configuration reference\n\n"
                      "Flat `key = value` lines grouped under `[section]` headers; `#` starts a comment.\n";
    std::string current;
    for (const auto& doc : config_key_table()) {
        if (doc.section != current) {
            current = doc.section;
            out += "\n## [" + current + "]\n\n";
        }
        out += "- `" + doc.key + "` (default `" + (doc.default_value.empty() ? "unset" : doc.default_value) +
               "`): " + doc.description + "\n";
    }
    return out;
}

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError("empty section name", line_no);
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected `key = value`", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key", line_no);
        if (section.empty()) throw ConfigError("key outside any [section]", line_no);
        if (!find_key(section, key))
            throw ConfigError("unknown key `" + key + "` in section [" + section + "]", line_no);
        cfg.data_[section][key] = value;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string Config::get(const std::string& section, const std::string& key) const {
    const auto sit = data_.find(section);
    if (sit != data_.end()) {
        const auto kit = sit->second.find(key);
        if (kit != sit->second.end()) return kit->second;
    }
    const ConfigKeyDoc* doc = find_key(section, key);
    if (!doc) throw std::invalid_argument("unknown config key [" + section + "] " + key);
    return doc->default_value;
}

bool Config::has(const std::string& section, const std::string& key) const {
    return !get(section, key).empty();
}

double Config::get_double(const std::string& section, const std::string& key) const {
    const std::string v = get(section, key);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw std::invalid_argument("config [" + section + "] " + key + ": not a number: `" + v + "`");
    return x;
}

long long Config::get_int(const std::string& section, const std::string& key) const {
    const std::string v = get(section, key);
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw std::invalid_argument("config [" + section + "] " + key + ": not an integer: `" + v + "`");
    return x;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
    return get(section, key);
}

std::vector<double> Config::get_double_list(const std::string& section, const std::string& key) const {
    const std::string v = get(section, key);
    std::vector<double> out;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        char* end = nullptr;
        const double x = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0')
            throw std::invalid_argument("config [" + section + "] " + key + ": bad list entry `" + item + "`");
        out.push_back(x);
    }
    return out;
}

std::vector<int> Config::get_int_list(const std::string& section, const std::string& key) const {
    std::vector<int> out;
    for (double x : get_double_list(section, key)) out.push_back(static_cast<int>(x));
    return out;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    if (!find_key(section, key)) throw std::invalid_argument("unknown config key [" + section + "] " + key);
    data_[section][key] = value;
}

std::string Config::emit() const {
    std::string out;
    for (const auto& [section, keys] : data_) {
        out += "[" + section + "]\n";
        for (const auto& [key, value] : keys) out += key + " = " + value + "\n";
        out += "\n";
    }
    return out;
}

} // namespace ddc
