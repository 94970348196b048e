#pragma once

// Uniform cell-centered grids on an interval or rectangle, with the discrete
// differential operators used by the scheme. All boundary closures are
// homogeneous Neumann via mirror ghost cells, so divergence(face_gradient(.))
// is the standard 3/5-point Neumann Laplacian and summation-by-parts holds
// exactly up to roundoff.

#include <cstddef>
#include <vector>

namespace ddc {

struct Grid {
    int dimension = 1;    // 1 or 2
    int nx = 0;           // cells in x
    int ny = 1;           // cells in y (1 in 1D)
    double lx = 1.0;      // domain extent in x
    double ly = 1.0;      // domain extent in y
    double hx = 0.0;      // lx / nx
    double hy = 0.0;      // ly / ny

    int cells() const { return nx * ny; }
    double cell_area() const { return hx * hy; }
    double domain_area() const { return lx * ly; }

    // row-major: j (y) slow, i (x) fast
    int idx(int i, int j) const { return j * nx + i; }
    double center_x(int i) const { return (i + 0.5) * hx; }
    double center_y(int j) const { return (j + 0.5) * hy; }

    bool operator==(const Grid&) const = default;
};

// Validates and builds a grid. Requires dimension in {1,2}, at least 4 cells
// per active dimension, positive lengths; in 1D, cells_y == 1 and
// length_y == 1.
Grid make_grid(int dimension, int cells_x, int cells_y, double length_x, double length_y);

struct Field {
    Grid grid;
    std::vector<double> data;

    Field() = default;
    explicit Field(const Grid& g, double fill = 0.0) : grid(g), data(static_cast<size_t>(g.cells()), fill) {}

    double& operator[](int k) { return data[static_cast<size_t>(k)]; }
    double operator[](int k) const { return data[static_cast<size_t>(k)]; }
    double& at(int i, int j) { return data[static_cast<size_t>(grid.idx(i, j))]; }
    double at(int i, int j) const { return data[static_cast<size_t>(grid.idx(i, j))]; }
    int size() const { return grid.cells(); }
};

// Interior-face values; boundary faces are identically zero (no-flux closure)
// and are not stored. x-faces sit between cells (i,j) and (i+1,j), y-faces
// between (i,j) and (i,j+1).
struct FaceFluxes {
    Grid grid;
    std::vector<double> fx;   // (nx-1) * ny
    std::vector<double> fy;   // nx * (ny-1), empty in 1D

    FaceFluxes() = default;
    explicit FaceFluxes(const Grid& g)
        : grid(g),
          fx(static_cast<size_t>((g.nx - 1) * g.ny), 0.0),
          fy(g.dimension == 2 ? static_cast<size_t>(g.nx * (g.ny - 1)) : 0, 0.0) {}

    int xidx(int i, int j) const { return j * (grid.nx - 1) + i; }   // 0 <= i < nx-1
    int yidx(int i, int j) const { return j * grid.nx + i; }         // 0 <= j < ny-1
};

// Per-cell symmetric second-difference matrix of a field; yy and xy stay zero
// in 1D.
struct HessianField {
    Field xx;
    Field yy;
    Field xy;
};

// (f_{i+1} - f_i)/h on interior faces, zero on boundary faces.
FaceFluxes face_gradient(const Field& f);

// Cell value (F_e - F_w)/hx + (F_n - F_s)/hy with zero boundary faces; its
// integral telescopes to zero.
Field divergence(const FaceFluxes& flux);

// Midpoint quadrature: sum of cell values times cell area.
double integrate(const Field& f);

// Per cell and direction, the average of the squared adjacent face gradients,
// summed over directions. Boundary faces contribute zero, so a linear profile
// gives s^2 at interior cells and s^2/2 at boundary cells.
Field cell_gradient_sq(const Field& f);

// Centered second differences with mirror ghosts; xy by the centered cross
// difference with mirrored indices.
HessianField hessian(const Field& f);

// hessian(ln f); rejects fields with non-positive entries.
HessianField hessian_log(const Field& f);

// xx^2 + yy^2 + 2 xy^2 per cell (xx^2 in 1D).
Field frobenius_sq(const HessianField& h);

double field_min(const Field& f);
double field_max(const Field& f);

// (integral of |f|^p)^(1/p)
double lp_norm(const Field& f, double p);

// max over interior faces of |face gradient|; the scheme's native sup |grad|.
double sup_face_gradient(const Field& f);

Field map_log(const Field& f);   // ln per cell, rejects non-positive values

} // namespace ddc
