#include "ddc/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ddc {

Grid make_grid(int dimension, int cells_x, int cells_y, double length_x, double length_y) {
    if (dimension != 1 && dimension != 2)
        throw std::invalid_argument("grid: dimension must be 1 or 2, got " + std::to_string(dimension));
    if (cells_x < 4)
        throw std::invalid_argument("grid: cells_x must be >= 4, got " + std::to_string(cells_x));
    if (dimension == 2 && cells_y < 4)
        throw std::invalid_argument("grid: cells_y must be >= 4 in 2D, got " + std::to_string(cells_y));
    if (dimension == 1 && cells_y != 1)
        throw std::invalid_argument("grid: cells_y must be 1 in 1D");
    if (!(length_x > 0.0) || !(length_y > 0.0))
        throw std::invalid_argument("grid: lengths must be positive");
    if (dimension == 1 && length_y != 1.0)
        throw std::invalid_argument("grid: length_y must be 1 in 1D");

    Grid g;
    g.dimension = dimension;
    g.nx = cells_x;
    g.ny = cells_y;
    g.lx = length_x;
    g.ly = length_y;
    g.hx = length_x / cells_x;
    g.hy = length_y / cells_y;
    return g;
}

FaceFluxes face_gradient(const Field& f) {
    const Grid& g = f.grid;
    FaceFluxes out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i)
            out.fx[static_cast<size_t>(out.xidx(i, j))] = (f.at(i + 1, j) - f.at(i, j)) / g.hx;
    if (g.dimension == 2) {
        for (int j = 0; j + 1 < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                out.fy[static_cast<size_t>(out.yidx(i, j))] = (f.at(i, j + 1) - f.at(i, j)) / g.hy;
    }
    return out;
}

Field divergence(const FaceFluxes& flux) {
    const Grid& g = flux.grid;
    Field out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double fe = (i + 1 < g.nx) ? flux.fx[static_cast<size_t>(flux.xidx(i, j))] : 0.0;
            const double fw = (i > 0) ? flux.fx[static_cast<size_t>(flux.xidx(i - 1, j))] : 0.0;
            double d = (fe - fw) / g.hx;
            if (g.dimension == 2) {
                const double fn = (j + 1 < g.ny) ? flux.fy[static_cast<size_t>(flux.yidx(i, j))] : 0.0;
                const double fs = (j > 0) ? flux.fy[static_cast<size_t>(flux.yidx(i, j - 1))] : 0.0;
                d += (fn - fs) / g.hy;
            }
            out.at(i, j) = d;
        }
    }
    return out;
}

double integrate(const Field& f) {
    double s = 0.0;
    for (double v : f.data) s += v;
    return s * f.grid.cell_area();
}

Field cell_gradient_sq(const Field& f) {
    const Grid& g = f.grid;
    const FaceFluxes grad = face_gradient(f);
    Field out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double ge = (i + 1 < g.nx) ? grad.fx[static_cast<size_t>(grad.xidx(i, j))] : 0.0;
            const double gw = (i > 0) ? grad.fx[static_cast<size_t>(grad.xidx(i - 1, j))] : 0.0;
            double s = (gw * gw + ge * ge) * 0.5;
            if (g.dimension == 2) {
                const double gn = (j + 1 < g.ny) ? grad.fy[static_cast<size_t>(grad.yidx(i, j))] : 0.0;
                const double gs = (j > 0) ? grad.fy[static_cast<size_t>(grad.yidx(i, j - 1))] : 0.0;
                s += (gs * gs + gn * gn) * 0.5;
            }
            out.at(i, j) = s;
        }
    }
    return out;
}

namespace {

// mirror ghost index: -1 -> 0, n -> n-1
inline int mirror(int i, int n) {
    if (i < 0) return 0;
    if (i >= n) return n - 1;
    return i;
}

} // namespace

HessianField hessian(const Field& f) {
    const Grid& g = f.grid;
    HessianField out{Field(g), Field(g), Field(g)};
    const double ihx2 = 1.0 / (g.hx * g.hx);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double fw = f.at(mirror(i - 1, g.nx), j);
            const double fe = f.at(mirror(i + 1, g.nx), j);
            const double fc = f.at(i, j);
            out.xx.at(i, j) = ((fw + fe) - 2.0 * fc) * ihx2;
        }
    }
    if (g.dimension == 2) {
        const double ihy2 = 1.0 / (g.hy * g.hy);
        const double ihxy = 1.0 / (4.0 * g.hx * g.hy);
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const double fs = f.at(i, mirror(j - 1, g.ny));
                const double fn = f.at(i, mirror(j + 1, g.ny));
                const double fc = f.at(i, j);
                out.yy.at(i, j) = ((fs + fn) - 2.0 * fc) * ihy2;

                const int iw = mirror(i - 1, g.nx), ie = mirror(i + 1, g.nx);
                const int js = mirror(j - 1, g.ny), jn = mirror(j + 1, g.ny);
                const double a = f.at(ie, jn);
                const double b = f.at(ie, js);
                const double c = f.at(iw, jn);
                const double d = f.at(iw, js);
                out.xy.at(i, j) = ((a - b) - (c - d)) * ihxy;
            }
        }
    }
    return out;
}

Field map_log(const Field& f) {
    Field out(f.grid);
    for (int k = 0; k < f.size(); ++k) {
        if (!(f[k] > 0.0))
            throw std::invalid_argument("map_log: field must be strictly positive");
        out[k] = std::log(f[k]);
    }
    return out;
}

HessianField hessian_log(const Field& f) {
    return hessian(map_log(f));
}

Field frobenius_sq(const HessianField& h) {
    const Grid& g = h.xx.grid;
    Field out(g);
    for (int k = 0; k < out.size(); ++k) {
        double s = h.xx[k] * h.xx[k];
        if (g.dimension == 2) s += h.yy[k] * h.yy[k] + 2.0 * h.xy[k] * h.xy[k];
        out[k] = s;
    }
    return out;
}

double field_min(const Field& f) {
    double m = f.data.empty() ? 0.0 : f.data[0];
    for (double v : f.data) m = std::min(m, v);
    return m;
}

double field_max(const Field& f) {
    double m = f.data.empty() ? 0.0 : f.data[0];
    for (double v : f.data) m = std::max(m, v);
    return m;
}

double lp_norm(const Field& f, double p) {
    if (!(p > 0.0)) throw std::invalid_argument("lp_norm: p must be positive");
    double s = 0.0;
    for (double v : f.data) s += std::pow(std::abs(v), p);
    return std::pow(s * f.grid.cell_area(), 1.0 / p);
}

double sup_face_gradient(const Field& f) {
    const FaceFluxes grad = face_gradient(f);
    double m = 0.0;
    for (double v : grad.fx) m = std::max(m, std::abs(v));
    for (double v : grad.fy) m = std::max(m, std::abs(v));
    return m;
}

} // namespace ddc
