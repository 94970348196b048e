#include "ddc/ineqlab.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "ddc/diagnostics.hpp"
#include "json.hpp"

namespace ddc {

namespace {

// splitmix64: tiny, platform-independent generator for synthetic coefficients
struct Rng {
    uint64_t s;
    explicit Rng(uint64_t seed) : s(seed) {}
    uint64_t next() {
        s += 0x9E3779B97F4A7C15ULL;
        uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform_pm1() { return 2.0 * uniform01() - 1.0; }
};

// floor for negative powers of nonnegative fields, emulating the
// epsilon-regularization of strictly positive states
constexpr double kUFloor = 1e-8;

inline double upow(double x, double e) {
    if (e == 0.0) return 1.0;
    if (e == 1.0) return x;
    if (e == 2.0) return x * x;
    if (e < 0.0) return std::pow(std::max(x, kUFloor), e);
    return std::pow(x, e);
}

} // namespace

double CosSeries::operator()(double x01, double y01) const {
    const int n = mode_cap + 1;
    double s = 0.0;
    if (dimension == 1) {
        for (int k = 0; k < n; ++k) s += coeff[static_cast<size_t>(k)] * std::cos(k * M_PI * x01);
    } else {
        for (int l = 0; l < n; ++l) {
            const double cy = std::cos(l * M_PI * y01);
            for (int k = 0; k < n; ++k)
                s += coeff[static_cast<size_t>(l * n + k)] * std::cos(k * M_PI * x01) * cy;
        }
    }
    return s;
}

Field SyntheticField::sample(const Grid& g) const {
    if (g.dimension != series.dimension)
        throw std::invalid_argument("synthetic field: grid dimension mismatch");
    const int n = series.mode_cap + 1;
    // precompute per-axis cosine tables
    std::vector<double> cx(static_cast<size_t>(n) * g.nx), cy;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < g.nx; ++i)
            cx[static_cast<size_t>(k * g.nx + i)] = std::cos(k * M_PI * (i + 0.5) / g.nx);
    if (g.dimension == 2) {
        cy.resize(static_cast<size_t>(n) * g.ny);
        for (int l = 0; l < n; ++l)
            for (int j = 0; j < g.ny; ++j)
                cy[static_cast<size_t>(l * g.ny + j)] = std::cos(l * M_PI * (j + 0.5) / g.ny);
    }

    Field out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            double s = 0.0;
            if (g.dimension == 1) {
                for (int k = 0; k < n; ++k)
                    s += series.coeff[static_cast<size_t>(k)] * cx[static_cast<size_t>(k * g.nx + i)];
            } else {
                for (int l = 0; l < n; ++l) {
                    double row = 0.0;
                    for (int k = 0; k < n; ++k)
                        row += series.coeff[static_cast<size_t>(l * n + k)] * cx[static_cast<size_t>(k * g.nx + i)];
                    s += row * cy[static_cast<size_t>(l * g.ny + j)];
                }
            }
            out.at(i, j) = (kind == FieldKind::SQUARED) ? s * s + offset : std::exp(s);
        }
    }
    return out;
}

void CorpusSpec::validate() const {
    if (count < 1) throw std::invalid_argument("corpus: count must be >= 1");
    if (dimension != 1 && dimension != 2) throw std::invalid_argument("corpus: dimension must be 1 or 2");
    if (mode_cap < 1) throw std::invalid_argument("corpus: mode_cap must be >= 1");
    if (!(amplitude > 0.0) || !(psi_bound > 0.0) || offset_max < 0.0)
        throw std::invalid_argument("corpus: amplitude, psi_bound must be positive, offset_max nonnegative");
}

std::vector<CorpusEntry> generate_corpus(const CorpusSpec& spec) {
    spec.validate();
    const int n = spec.mode_cap + 1;
    const int ncoef = spec.dimension == 1 ? n : n * n;

    std::vector<CorpusEntry> out;
    out.reserve(static_cast<size_t>(spec.count));
    for (int idx = 0; idx < spec.count; ++idx) {
        Rng rng(spec.seed * 0x100000001B3ULL + static_cast<uint64_t>(idx) + 1);

        CorpusEntry e;
        e.phi.kind = FieldKind::SQUARED;
        e.phi.series.dimension = spec.dimension;
        e.phi.series.mode_cap = spec.mode_cap;
        e.phi.series.coeff.resize(static_cast<size_t>(ncoef));
        for (int c = 0; c < ncoef; ++c) {
            const int k = c % n;
            const int l = spec.dimension == 1 ? 0 : c / n;
            const double decay = static_cast<double>(std::max(1, k) * std::max(1, k)) *
                                 static_cast<double>(std::max(1, l) * std::max(1, l));
            e.phi.series.coeff[static_cast<size_t>(c)] = spec.amplitude * rng.uniform_pm1() / decay;
        }
        const double pick = rng.uniform01();
        e.phi.offset = pick < 0.25 ? 0.0 : spec.offset_max * rng.uniform01();

        e.psi.kind = FieldKind::EXP;
        e.psi.series.dimension = spec.dimension;
        e.psi.series.mode_cap = spec.mode_cap;
        e.psi.series.coeff.resize(static_cast<size_t>(ncoef));
        double l1 = 0.0;
        for (int c = 0; c < ncoef; ++c) {
            const int k = c % n;
            const int l = spec.dimension == 1 ? 0 : c / n;
            const double decay = static_cast<double>(std::max(1, k) * std::max(1, k)) *
                                 static_cast<double>(std::max(1, l) * std::max(1, l));
            const double b = rng.uniform_pm1() / decay;
            e.psi.series.coeff[static_cast<size_t>(c)] = b;
            l1 += std::abs(b);
        }
        const double target = spec.psi_bound * (0.2 + 0.8 * rng.uniform01());
        if (l1 > 0.0) {
            const double scale = target / l1;
            for (double& b : e.psi.series.coeff) b *= scale;
        }
        out.push_back(std::move(e));
    }
    return out;
}

InequalityTerms fi1_terms(const Field& phi, const Field& psi, double p, double r, double eta) {
    const Grid& grid = phi.grid;
    const Field gphi = cell_gradient_sq(phi);
    const Field gpsi = cell_gradient_sq(psi);
    const double area = grid.cell_area();
    double lr = 0.0, t1 = 0.0, phip = 0.0, t2b = 0.0, phi1 = 0.0, phipsi = 0.0;
    for (int k = 0; k < grid.cells(); ++k) {
        lr += std::pow(phi[k], 0.5 * r * (p + 1.0)) * std::pow(psi[k], 0.5 * r);
        t1 += upow(phi[k], p - 1.0) * psi[k] * gphi[k];
        phip += std::pow(phi[k], p);
        t2b += phi[k] / psi[k] * gpsi[k];
        phi1 += phi[k];
        phipsi += phi[k] * psi[k];
    }
    InequalityTerms ev;
    ev.lhs = std::pow(lr * area, 2.0 / r);
    ev.structural = eta * t1 * area + eta * (phip * area) * (t2b * area);
    ev.carrier = std::pow(phi1 * area, p) * (phipsi * area);
    return ev;
}

InequalityTerms fi2_terms(const Field& phi, const Field& psi, double p, double r, double eta) {
    const Grid& grid = phi.grid;
    const Field gphi = cell_gradient_sq(phi);
    const Field gpsi = cell_gradient_sq(psi);
    const double area = grid.cell_area();
    double lr = 0.0, t1 = 0.0, t2 = 0.0, phi1 = 0.0, phipsi = 0.0;
    for (int k = 0; k < grid.cells(); ++k) {
        lr += std::pow(phi[k], 0.5 * r * (p + 1.0)) * std::pow(psi[k], 0.5 * r);
        t1 += upow(phi[k], p - 1.0) * psi[k] * gphi[k];
        t2 += std::pow(phi[k], p + 1.0) * gpsi[k] / psi[k];
        phi1 += phi[k];
        phipsi += phi[k] * psi[k];
    }
    InequalityTerms ev;
    ev.lhs = std::pow(lr * area, 2.0 / r);
    ev.structural = eta * t1 * area + eta * t2 * area;
    ev.carrier = std::pow(phi1 * area, p) * (phipsi * area);
    return ev;
}

InequalityTerms uv_terms(const Field& u, const Field& v, double kappa, double beta, double eta) {
    const Grid& grid = u.grid;
    const Field gu = cell_gradient_sq(u);
    const double area = grid.cell_area();
    double lhs = 0.0, t1 = 0.0, uv = 0.0;
    for (int k = 0; k < grid.cells(); ++k) {
        lhs += upow(u[k], beta) * v[k];
        t1 += upow(u[k], kappa) * v[k] * gu[k];
        uv += u[k] * v[k];
    }
    InequalityTerms ev;
    ev.lhs = lhs * area;
    ev.structural = eta * t1 * area + eta * dissipation_functional(v, 4.0);
    ev.carrier = uv * area;
    return ev;
}

InequalityTerms uvnav_terms(const Field& u, const Field& v, double kappa, double gamma, double eta) {
    const Grid& grid = u.grid;
    const Field gu = cell_gradient_sq(u);
    const Field gv = cell_gradient_sq(v);
    const double area = grid.cell_area();
    double lhs = 0.0, t1 = 0.0, t2 = 0.0, t4 = 0.0, uv = 0.0;
    for (int k = 0; k < grid.cells(); ++k) {
        lhs += upow(u[k], gamma) * v[k] * gv[k];
        t1 += upow(u[k], kappa) * v[k] * gu[k];
        t2 += u[k] * gv[k] * gv[k] / (v[k] * v[k] * v[k]);
        t4 += v[k] * gv[k];
        uv += u[k] * v[k];
    }
    InequalityTerms ev;
    ev.lhs = lhs * area;
    ev.structural = eta * t1 * area + eta * t2 * area + eta * dissipation_functional(v, 4.0) + t4 * area;
    ev.carrier = uv * area;
    return ev;
}

InequalityTerms high_terms(const Field& u, const Field& v, double p, double m, double q, double beta,
                           double eta) {
    const Grid& grid = u.grid;
    const Field gu = cell_gradient_sq(u);
    const double area = grid.cell_area();
    double lhs = 0.0, t1 = 0.0, uv = 0.0;
    for (int k = 0; k < grid.cells(); ++k) {
        lhs += upow(u[k], beta) * v[k];
        t1 += upow(u[k], p + m - 3.0) * v[k] * gu[k];
        uv += u[k] * v[k];
    }
    InequalityTerms ev;
    ev.lhs = lhs * area;
    ev.structural = eta * t1 * area + eta * dissipation_functional(v, q);
    ev.carrier = uv * area;
    return ev;
}

namespace {

Grid protocol_grid(int dimension, int cells) {
    return dimension == 1 ? make_grid(1, cells, 1, 1.0, 1.0) : make_grid(2, cells, cells, 1.0, 1.0);
}

// The interpolation constants depend on the initial-data bound only through a
// mass bound on u, so u test fields are compared at unit mass.
void normalize_mass(Field& u) {
    const double mass = integrate(u);
    if (mass > 0.0)
        for (double& x : u.data) x /= mass;
}

using EvalFn = std::function<InequalityTerms(const CorpusEntry&, const Grid&)>;

InequalityReport run_protocol(std::string id, std::vector<std::pair<std::string, double>> params,
                              const CorpusSpec& spec, const Grid& grid, double headroom,
                              const EvalFn& eval) {
    if (spec.count < 2)
        throw std::invalid_argument("protocol checks need a corpus of at least 2 fields");
    const std::vector<CorpusEntry> corpus = generate_corpus(spec);

    InequalityReport rep;
    rep.inequality_id = std::move(id);
    rep.params = std::move(params);
    rep.corpus_size = spec.count;
    rep.holdout_headroom = headroom;

    constexpr double kCarrierFloor = 1e-14;
    double c_est = 0.0;
    for (size_t i = 0; i < corpus.size(); i += 2) {
        const InequalityTerms ev = eval(corpus[i], grid);
        if (ev.carrier < kCarrierFloor) continue;
        c_est = std::max(c_est, (ev.lhs - ev.structural) / ev.carrier);
    }
    rep.estimated_constant = std::max(c_est, 1e-12);

    const double c_audit = headroom * rep.estimated_constant;
    int violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < corpus.size(); i += 2) {
        const InequalityTerms ev = eval(corpus[i], grid);
        const double rhs = ev.structural + c_audit * ev.carrier;
        const double margin = rhs - ev.lhs;
        worst_margin = std::min(worst_margin, margin);
        if (margin < -1e-12 * std::max(1.0, std::abs(ev.lhs))) ++violations;
    }
    rep.holdout_violations = violations;
    rep.worst_margin = std::isfinite(worst_margin) ? worst_margin : 0.0;
    rep.grid_levels.push_back(GridLevelResult{grid.nx, grid.ny, 0.0});
    rep.pass = (violations == 0) && std::isfinite(rep.estimated_constant);
    return rep;
}

} // namespace

InequalityReport check_phi(int which, double q, const CorpusSpec& spec_in,
                           const std::vector<int>& grid_levels_cells, int dimension) {
    if (which != 1 && which != 2) throw std::invalid_argument("check_phi: which must be 1 or 2");
    if (!(q >= 2.0)) throw std::invalid_argument("check_phi: q must be >= 2");
    if (grid_levels_cells.empty()) throw std::invalid_argument("check_phi: need at least one grid level");

    CorpusSpec spec = spec_in;
    spec.dimension = dimension;
    const std::vector<CorpusEntry> corpus = generate_corpus(spec);
    const double root_n = std::sqrt(static_cast<double>(dimension));
    const double factor = which == 1 ? (q + root_n) * (q + root_n) : (q + root_n + 1.0) * (q + root_n + 1.0);

    InequalityReport rep;
    rep.inequality_id = which == 1 ? "PHI1" : "PHI2";
    rep.params = {{"q", q}, {"n", static_cast<double>(dimension)}, {"factor", factor}};
    rep.corpus_size = spec.count;
    rep.holdout_headroom = 1.0;

    bool pass = true;
    double prev_worst = std::numeric_limits<double>::infinity();
    double est_constant = 0.0;
    int violations = 0;
    double final_tol = 0.0;
    for (int cells : grid_levels_cells) {
        const Grid g = protocol_grid(dimension, cells);
        const double tol_h = 10.0 * std::max(g.hx, g.hy);
        double worst = 0.0;
        for (const CorpusEntry& entry : corpus) {
            const Field phi = entry.psi.sample(g);   // strictly positive test field
            const Field gsq = cell_gradient_sq(phi);
            const double area = g.cell_area();
            double lhs = 0.0;
            if (which == 1) {
                for (int k = 0; k < g.cells(); ++k)
                    lhs += std::pow(gsq[k], 0.5 * (q + 2.0)) / std::pow(phi[k], q + 1.0);
            } else {
                const Field hfrob = frobenius_sq(hessian(phi));
                for (int k = 0; k < g.cells(); ++k)
                    lhs += upow(gsq[k], 0.5 * (q - 2.0)) / std::pow(phi[k], q - 1.0) * hfrob[k];
            }
            lhs *= area;
            const double dissip = dissipation_functional(phi, q);
            const double rhs = factor * dissip;
            const double ratio = rhs > 0.0 ? lhs / rhs : 0.0;
            worst = std::max(worst, ratio);
            if (dissip > 0.0) est_constant = std::max(est_constant, lhs / dissip);
            if (ratio > 1.0 + tol_h) ++violations;
        }
        rep.grid_levels.push_back(GridLevelResult{g.nx, g.ny, worst});
        if (worst > 1.0 + tol_h) pass = false;
        if (std::isfinite(prev_worst) && worst > prev_worst * 1.05) pass = false;
        prev_worst = worst;
        final_tol = tol_h;
    }
    rep.estimated_constant = std::max(est_constant, 1e-12);
    rep.holdout_violations = violations;
    rep.worst_margin = 1.0 + final_tol - rep.grid_levels.back().worst_ratio;
    rep.pass = pass && violations == 0;
    return rep;
}

InequalityReport check_fi1(double p, double r, double eta, const CorpusSpec& spec_in, int cells,
                           double headroom) {
    if (!(p >= 1.0)) throw std::invalid_argument("check_fi1: p must be >= 1");
    if (!(r > 1.0)) throw std::invalid_argument("check_fi1: r must be > 1");
    if (!(eta > 0.0)) throw std::invalid_argument("check_fi1: eta must be > 0");
    CorpusSpec spec = spec_in;
    spec.dimension = 1;
    const Grid g = protocol_grid(1, cells);
    return run_protocol("FI1", {{"p", p}, {"r", r}, {"eta", eta}}, spec, g, headroom,
                        [p, r, eta](const CorpusEntry& e, const Grid& grid) {
                            return fi1_terms(e.phi.sample(grid), e.psi.sample(grid), p, r, eta);
                        });
}

InequalityReport check_fi2(double p, double r, double eta, const CorpusSpec& spec_in, int cells,
                           double headroom) {
    if (!(p > 0.0)) throw std::invalid_argument("check_fi2: p must be > 0");
    if (!(r >= 2.0)) throw std::invalid_argument("check_fi2: r must be >= 2");
    if (!(eta > 0.0)) throw std::invalid_argument("check_fi2: eta must be > 0");
    CorpusSpec spec = spec_in;
    spec.dimension = 2;
    const Grid g = protocol_grid(2, cells);
    return run_protocol("FI2", {{"p", p}, {"r", r}, {"eta", eta}}, spec, g, headroom,
                        [p, r, eta](const CorpusEntry& e, const Grid& grid) {
                            return fi2_terms(e.phi.sample(grid), e.psi.sample(grid), p, r, eta);
                        });
}

InequalityReport check_interp_uv(double kappa, double beta, double eta, const CorpusSpec& spec_in,
                                 int cells, double headroom) {
    if (!(kappa > -1.0 && kappa < 0.0)) throw std::invalid_argument("check_interp_uv: kappa must be in (-1,0)");
    if (!(beta >= 1.0 && beta < kappa + 3.0))
        throw std::invalid_argument("check_interp_uv: beta must be in [1, kappa+3)");
    if (!(eta > 0.0)) throw std::invalid_argument("check_interp_uv: eta must be > 0");
    CorpusSpec spec = spec_in;
    spec.dimension = 2;
    const Grid g = protocol_grid(2, cells);
    return run_protocol("UV_INTERP", {{"kappa", kappa}, {"beta", beta}, {"eta", eta}}, spec, g, headroom,
                        [kappa, beta, eta](const CorpusEntry& e, const Grid& grid) {
                            Field u = e.phi.sample(grid);
                            normalize_mass(u);
                            return uv_terms(u, e.psi.sample(grid), kappa, beta, eta);
                        });
}

InequalityReport check_interp_uvnav(double kappa, double gamma, double eta, const CorpusSpec& spec_in,
                                    int cells, double headroom) {
    if (!(kappa > -1.0 && kappa < 0.0))
        throw std::invalid_argument("check_interp_uvnav: kappa must be in (-1,0)");
    if (!(gamma >= 0.0 && gamma < 0.5 * kappa + 2.0))
        throw std::invalid_argument("check_interp_uvnav: gamma must be in [0, kappa/2+2)");
    if (!(eta > 0.0)) throw std::invalid_argument("check_interp_uvnav: eta must be > 0");
    CorpusSpec spec = spec_in;
    spec.dimension = 2;
    const Grid g = protocol_grid(2, cells);
    return run_protocol("UVNAV_INTERP", {{"kappa", kappa}, {"gamma", gamma}, {"eta", eta}}, spec, g,
                        headroom, [kappa, gamma, eta](const CorpusEntry& e, const Grid& grid) {
                            Field u = e.phi.sample(grid);
                            normalize_mass(u);
                            return uvnav_terms(u, e.psi.sample(grid), kappa, gamma, eta);
                        });
}

InequalityReport check_interp_high(double p, double m, double p0, double q, double beta, double eta,
                                   double cap, const CorpusSpec& spec_in, int cells, double headroom) {
    if (!(p > 1.0)) throw std::invalid_argument("check_interp_high: p must be > 1");
    if (!(m >= 1.0)) throw std::invalid_argument("check_interp_high: m must be >= 1");
    if (!(p0 > 1.0)) throw std::invalid_argument("check_interp_high: p0 must be > 1");
    if (!(q > 2.0 * (p + m - 1.0) / p0))
        throw std::invalid_argument("check_interp_high: q must exceed 2(p+m-1)/p0");
    if (!(beta >= p + m - 1.0 && beta < p0 + p + m - 1.0))
        throw std::invalid_argument("check_interp_high: beta must be in [p+m-1, p0+p+m-1)");
    if (!(eta > 0.0) || !(cap > 0.0))
        throw std::invalid_argument("check_interp_high: eta and cap must be > 0");
    CorpusSpec spec = spec_in;
    spec.dimension = 2;
    const Grid g = protocol_grid(2, cells);
    return run_protocol(
        "UV1_HIGH",
        {{"p", p}, {"m", m}, {"p0", p0}, {"q", q}, {"beta", beta}, {"eta", eta}, {"cap", cap}}, spec, g,
        headroom, [p, m, p0, q, beta, eta, cap](const CorpusEntry& e, const Grid& grid) {
            Field u = e.phi.sample(grid);
            const Field v = e.psi.sample(grid);
            // normalize to the hypothesis int(u^p0) = cap; the constant of the
            // inequality is only meaningful at a fixed L^p0 level
            double up0 = 0.0;
            for (int k = 0; k < grid.cells(); ++k) up0 += std::pow(u[k], p0);
            up0 *= grid.cell_area();
            if (up0 > 0.0) {
                const double scale = std::pow(cap / up0, 1.0 / p0);
                for (double& x : u.data) x *= scale;
            }
            return high_terms(u, v, p, m, q, beta, eta);
        });
}

std::string report_json(const InequalityReport& rep) {
    nlohmann::json j;
    j["inequality_id"] = rep.inequality_id;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : rep.params) params[k] = v;
    j["params"] = params;
    j["corpus_size"] = rep.corpus_size;
    j["estimated_constant"] = rep.estimated_constant;
    j["holdout_headroom"] = rep.holdout_headroom;
    j["holdout_violations"] = rep.holdout_violations;
    j["worst_margin"] = rep.worst_margin;
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& gl : rep.grid_levels)
        levels.push_back({{"cells_x", gl.cells_x}, {"cells_y", gl.cells_y}, {"worst_ratio", gl.worst_ratio}});
    j["grid_levels"] = levels;
    j["pass"] = rep.pass;
    return j.dump(2);
}

} // namespace ddc
