#ifndef BLOCH_SOLVER2D_HPP
#define BLOCH_SOLVER2D_HPP

#include <array>
#include <string>
#include <vector>

#include "bloch/affine.hpp"
#include "bloch/numkernel.hpp"

namespace bloch {

// P1 triangulation of one square unit cell with periodic node pairing.
struct Mesh2D {
    std::vector<Eigen::Vector2d> nodes;
    std::vector<std::array<int, 3>> triangles; // positively oriented
    std::vector<int> region;                   // 0 matrix, 1 inclusion
    std::vector<std::pair<int, int>> pairs_x;  // (left, right), corners excluded
    std::vector<std::pair<int, int>> pairs_y;  // (bottom, top), corners excluded
    std::array<int, 4> corners{-1, -1, -1, -1}; // BL, BR, TL, TR
    Eigen::Vector2d origin{0.0, 0.0};
    double cell_size = 1.0;

    int node_count() const { return static_cast<int>(nodes.size()); }
};

struct Material2D {
    double E_matrix = 1.0;
    double rho_matrix = 1.0;
    double E_inclusion = 12.0;
    double rho_inclusion = 1.0;
    double radius = 0.35; // inclusion radius, centered in the cell
    double a = 1.0;       // cell size
};

struct MshTagMap {
    int matrix_tag = 1;
    int inclusion_tag = 2;
};

// ASCII MSH v2.2 with $Nodes/$Elements; element types 1, 2, 15. Periodic
// pairing is inferred by sorting boundary nodes along each edge and matching
// within 1e-9 * cell size.
Mesh2D parse_msh(const std::string& text, const MshTagMap& tags = {});
std::string write_msh(const Mesh2D& mesh, const MshTagMap& tags = {});

// Uniform right-triangle mesh on [0,a]^2, inclusion tagged by centroid.
Mesh2D generate_structured(int n_per_side, const Material2D& mat);

// Unconstrained P1 stiffness and consistent mass (region-wise coefficients).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> assemble_global(const Mesh2D& mesh, const Material2D& mat);

// Bloch-periodic constraint rows for the mesh: slaves on the right/top edges
// and the BR/TL/TR corners point at their left/bottom/BL masters.
std::vector<ConstraintRow> bloch_constraints(const Mesh2D& mesh);

AffineFamily bloch_reduce(const Eigen::MatrixXd& Kg, const Eigen::MatrixXd& Mg, const Mesh2D& mesh);

struct DispersionRow {
    double path_coord;
    double kx, ky;
    int band; // 1-based
    double omega;
};

struct DispersionTable {
    std::vector<DispersionRow> rows;
};

std::vector<Wave> sample_polyline(const std::vector<Wave>& vertices, int n_samples);
// Barycentric lattice points of the Gamma-X-M triangle at the given subdivision depth.
std::vector<Wave> ibz_triangle_grid(const Lattice& lattice, int subdivision);

DispersionTable band_structure(const AffineFamily& fam, const std::vector<Wave>& path_vertices,
                               int n_bands, int n_samples, int threads = 1);

} // namespace bloch

#endif
