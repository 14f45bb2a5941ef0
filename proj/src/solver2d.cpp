#include "bloch/solver2d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "bloch/parallel.hpp"

namespace bloch {

namespace {

double triangle_area2(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1, const Eigen::Vector2d& p2) {
    return (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
}

// Coordinate-based boundary classification and pairing shared by the parser
// and the structured generator.
void infer_pairing(Mesh2D& mesh) {
    double x0 = mesh.nodes[0].x(), x1 = x0, y0 = mesh.nodes[0].y(), y1 = y0;
    for (const auto& p : mesh.nodes) {
        x0 = std::min(x0, p.x());
        x1 = std::max(x1, p.x());
        y0 = std::min(y0, p.y());
        y1 = std::max(y1, p.y());
    }
    const double a = x1 - x0;
    if (std::abs((y1 - y0) - a) > 1e-9 * a)
        throw UnpairedBoundaryNode("cell bounding box is not square");
    mesh.origin = {x0, y0};
    mesh.cell_size = a;
    const double tol = 1e-9 * a;

    auto on = [&](double v, double ref) { return std::abs(v - ref) <= tol; };
    std::vector<int> left, right, bottom, top;
    mesh.corners = {-1, -1, -1, -1};
    for (int i = 0; i < mesh.node_count(); ++i) {
        const auto& p = mesh.nodes[i];
        const bool L = on(p.x(), x0), R = on(p.x(), x1), B = on(p.y(), y0), T = on(p.y(), y1);
        if (L && B) mesh.corners[0] = i;
        else if (R && B) mesh.corners[1] = i;
        else if (L && T) mesh.corners[2] = i;
        else if (R && T) mesh.corners[3] = i;
        else if (L) left.push_back(i);
        else if (R) right.push_back(i);
        else if (B) bottom.push_back(i);
        else if (T) top.push_back(i);
    }
    for (int c = 0; c < 4; ++c)
        if (mesh.corners[c] < 0) throw UnpairedBoundaryNode("missing cell corner node");

    auto pair_sides = [&](std::vector<int>& lo, std::vector<int>& hi, int axis,
                          std::vector<std::pair<int, int>>& out, const char* name) {
        auto tangential = [&](int i) { return axis == 0 ? mesh.nodes[i].y() : mesh.nodes[i].x(); };
        std::sort(lo.begin(), lo.end(), [&](int i, int j) { return tangential(i) < tangential(j); });
        std::sort(hi.begin(), hi.end(), [&](int i, int j) { return tangential(i) < tangential(j); });
        if (lo.size() != hi.size())
            throw UnpairedBoundaryNode(std::string(name) + " side node counts differ: " +
                                       std::to_string(lo.size()) + " vs " + std::to_string(hi.size()));
        out.clear();
        for (size_t i = 0; i < lo.size(); ++i) {
            if (std::abs(tangential(lo[i]) - tangential(hi[i])) > tol) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "%s pair mismatch near (%.12g, %.12g) / (%.12g, %.12g)",
                              name, mesh.nodes[lo[i]].x(), mesh.nodes[lo[i]].y(),
                              mesh.nodes[hi[i]].x(), mesh.nodes[hi[i]].y());
                throw UnpairedBoundaryNode(buf);
            }
            out.emplace_back(lo[i], hi[i]);
        }
    };
    pair_sides(left, right, 0, mesh.pairs_x, "left/right");
    pair_sides(bottom, top, 1, mesh.pairs_y, "bottom/top");
}

} // namespace

Mesh2D generate_structured(int n_per_side, const Material2D& mat) {
    if (n_per_side < 4) throw Error("structured mesh needs n_per_side >= 4");
    const int n = n_per_side;
    const double h = mat.a / n;
    Mesh2D mesh;
    mesh.nodes.reserve((n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) mesh.nodes.push_back({i * h, j * h});
    auto id = [&](int i, int j) { return i + j * (n + 1); };
    const Eigen::Vector2d center{mat.a / 2.0, mat.a / 2.0};
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const std::array<int, 3> t1{id(i, j), id(i + 1, j), id(i, j + 1)};
            const std::array<int, 3> t2{id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)};
            for (const auto& t : {t1, t2}) {
                mesh.triangles.push_back(t);
                const Eigen::Vector2d c =
                    (mesh.nodes[t[0]] + mesh.nodes[t[1]] + mesh.nodes[t[2]]) / 3.0;
                mesh.region.push_back((c - center).norm() < mat.radius ? 1 : 0);
            }
        }
    }
    infer_pairing(mesh);
    return mesh;
}

Mesh2D parse_msh(const std::string& text, const MshTagMap& tags) {
    std::istringstream in(text);
    std::string line;
    long lineno = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };

    Mesh2D mesh;
    std::map<long, int> node_index;
    bool seen_nodes = false, seen_elements = false;

    while (next_line()) {
        if (line == "$MeshFormat") {
            if (!next_line()) throw ParseError("truncated $MeshFormat", lineno);
            double version = 0;
            int file_type = 0, data_size = 0;
            if (std::sscanf(line.c_str(), "%lf %d %d", &version, &file_type, &data_size) != 3)
                throw ParseError("malformed $MeshFormat header", lineno);
            if (version < 2.0 || version >= 3.0 || file_type != 0)
                throw ParseError("expected ASCII MSH v2.x", lineno);
            if (!next_line() || line != "$EndMeshFormat")
                throw ParseError("missing $EndMeshFormat", lineno);
        } else if (line == "$Nodes") {
            if (!next_line()) throw ParseError("truncated $Nodes", lineno);
            long count = std::strtol(line.c_str(), nullptr, 10);
            for (long i = 0; i < count; ++i) {
                if (!next_line()) throw ParseError("truncated node list", lineno);
                long id;
                double x, y, z;
                if (std::sscanf(line.c_str(), "%ld %lf %lf %lf", &id, &x, &y, &z) != 4)
                    throw ParseError("malformed node record", lineno);
                node_index[id] = mesh.node_count();
                mesh.nodes.push_back({x, y});
            }
            if (!next_line() || line != "$EndNodes") throw ParseError("missing $EndNodes", lineno);
            seen_nodes = true;
        } else if (line == "$Elements") {
            if (!next_line()) throw ParseError("truncated $Elements", lineno);
            long count = std::strtol(line.c_str(), nullptr, 10);
            for (long i = 0; i < count; ++i) {
                if (!next_line()) throw ParseError("truncated element list", lineno);
                std::istringstream es(line);
                long id;
                int type, ntags;
                if (!(es >> id >> type >> ntags)) throw ParseError("malformed element record", lineno);
                std::vector<int> etags(ntags);
                for (int t = 0; t < ntags; ++t)
                    if (!(es >> etags[t])) throw ParseError("malformed element tags", lineno);
                const int n_nodes = type == 2 ? 3 : (type == 1 ? 2 : (type == 15 ? 1 : -1));
                if (n_nodes < 0) throw ParseError("unsupported element type " + std::to_string(type), lineno);
                std::array<long, 3> conn{};
                for (int c = 0; c < n_nodes; ++c)
                    if (!(es >> conn[c])) throw ParseError("malformed element connectivity", lineno);
                if (type != 2) continue; // lines and points only carry boundary tags
                std::array<int, 3> tri{};
                for (int c = 0; c < 3; ++c) {
                    auto it = node_index.find(conn[c]);
                    if (it == node_index.end())
                        throw ParseError("element references unknown node " + std::to_string(conn[c]), lineno);
                    tri[c] = it->second;
                }
                // restore positive orientation if the file stores it flipped
                if (triangle_area2(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]) < 0)
                    std::swap(tri[1], tri[2]);
                mesh.triangles.push_back(tri);
                const int phys = ntags > 0 ? etags[0] : tags.matrix_tag;
                mesh.region.push_back(phys == tags.inclusion_tag ? 1 : 0);
            }
            if (!next_line() || line != "$EndElements") throw ParseError("missing $EndElements", lineno);
            seen_elements = true;
        } else if (!line.empty() && line[0] == '$') {
            // skip unknown sections (e.g. $PhysicalNames)
            const std::string closing = "$End" + line.substr(1);
            while (next_line() && line != closing) {}
        }
    }
    if (!seen_nodes || !seen_elements) throw ParseError("missing $Nodes or $Elements section", lineno);
    infer_pairing(mesh);
    return mesh;
}

std::string write_msh(const Mesh2D& mesh, const MshTagMap& tags) {
    std::string out;
    char buf[256];
    out += "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n";
    out += std::to_string(mesh.node_count()) + "\n";
    for (int i = 0; i < mesh.node_count(); ++i) {
        std::snprintf(buf, sizeof buf, "%d %.17g %.17g 0\n", i + 1, mesh.nodes[i].x(), mesh.nodes[i].y());
        out += buf;
    }
    out += "$EndNodes\n$Elements\n";
    out += std::to_string(mesh.triangles.size()) + "\n";
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const int phys = mesh.region[t] == 1 ? tags.inclusion_tag : tags.matrix_tag;
        std::snprintf(buf, sizeof buf, "%zu 2 2 %d %d %d %d %d\n", t + 1, phys, phys,
                      mesh.triangles[t][0] + 1, mesh.triangles[t][1] + 1, mesh.triangles[t][2] + 1);
        out += buf;
    }
    out += "$EndElements\n";
    return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> assemble_global(const Mesh2D& mesh, const Material2D& mat) {
    const int n = mesh.node_count();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const auto& p0 = mesh.nodes[tri[0]];
        const auto& p1 = mesh.nodes[tri[1]];
        const auto& p2 = mesh.nodes[tri[2]];
        const double area2 = triangle_area2(p0, p1, p2);
        if (area2 < 1e-14 * mesh.cell_size * mesh.cell_size)
            throw DegenerateTriangle("triangle " + std::to_string(t) + " has vanishing area");
        const double area = 0.5 * area2;
        const double E = mesh.region[t] == 1 ? mat.E_inclusion : mat.E_matrix;
        const double rho = mesh.region[t] == 1 ? mat.rho_inclusion : mat.rho_matrix;
        // P1 gradients: grad phi_i = perp(edge opposite i) / (2 area)
        Eigen::Matrix<double, 3, 2> g;
        g.row(0) << p1.y() - p2.y(), p2.x() - p1.x();
        g.row(1) << p2.y() - p0.y(), p0.x() - p2.x();
        g.row(2) << p0.y() - p1.y(), p1.x() - p0.x();
        g /= area2;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                K(tri[i], tri[j]) += E * area * g.row(i).dot(g.row(j));
                M(tri[i], tri[j]) += rho * area / 12.0 * (i == j ? 2.0 : 1.0);
            }
        }
    }
    return {std::move(K), std::move(M)};
}

std::vector<ConstraintRow> bloch_constraints(const Mesh2D& mesh) {
    const int n = mesh.node_count();
    std::vector<ConstraintRow> rows(n, ConstraintRow{-1, {{0, 0}}});
    std::vector<bool> slave(n, false);
    for (auto [l, r] : mesh.pairs_x) { (void)l; slave[r] = true; }
    for (auto [b, t] : mesh.pairs_y) { (void)b; slave[t] = true; }
    slave[mesh.corners[1]] = slave[mesh.corners[2]] = slave[mesh.corners[3]] = true;

    Eigen::Index next = 0;
    std::vector<Eigen::Index> col(n, -1);
    for (int i = 0; i < n; ++i) {
        if (!slave[i]) {
            col[i] = next++;
            rows[i] = ConstraintRow{col[i], {{0, 0}}};
        }
    }
    for (auto [l, r] : mesh.pairs_x) rows[r] = ConstraintRow{col[l], {{1, 0}}};
    for (auto [b, t] : mesh.pairs_y) rows[t] = ConstraintRow{col[b], {{0, 1}}};
    const Eigen::Index bl = col[mesh.corners[0]];
    rows[mesh.corners[1]] = ConstraintRow{bl, {{1, 0}}};
    rows[mesh.corners[2]] = ConstraintRow{bl, {{0, 1}}};
    rows[mesh.corners[3]] = ConstraintRow{bl, {{1, 1}}};
    return rows;
}

AffineFamily bloch_reduce(const Eigen::MatrixXd& Kg, const Eigen::MatrixXd& Mg, const Mesh2D& mesh) {
    return build_from_constrained(Kg.cast<Complex>(), Mg.cast<Complex>(), bloch_constraints(mesh),
                                  Lattice::square(mesh.cell_size));
}

std::vector<Wave> sample_polyline(const std::vector<Wave>& vertices, int n_samples) {
    if (vertices.size() < 2 || n_samples < 2) throw Error("polyline needs >= 2 vertices and samples");
    std::vector<double> cum{0.0};
    for (size_t i = 1; i < vertices.size(); ++i)
        cum.push_back(cum.back() + (vertices[i] - vertices[i - 1]).norm());
    const double total = cum.back();
    std::vector<Wave> out;
    out.reserve(n_samples);
    size_t seg = 0;
    for (int i = 0; i < n_samples; ++i) {
        const double s = total * i / (n_samples - 1);
        while (seg + 2 < cum.size() && s > cum[seg + 1]) ++seg;
        const double denom = std::max(cum[seg + 1] - cum[seg], 1e-300);
        const double t = std::clamp((s - cum[seg]) / denom, 0.0, 1.0);
        out.push_back(vertices[seg] + t * (vertices[seg + 1] - vertices[seg]));
    }
    return out;
}

std::vector<Wave> ibz_triangle_grid(const Lattice& lattice, int subdivision) {
    const Wave g = lattice.gamma_point();
    const Wave x = lattice.x_point();
    const Wave m = lattice.m_point();
    std::vector<Wave> pts;
    for (int i = 0; i <= subdivision; ++i)
        for (int j = 0; j <= subdivision - i; ++j) {
            const int l = subdivision - i - j;
            pts.push_back((i * g + j * x + l * m) / subdivision);
        }
    return pts;
}

DispersionTable band_structure(const AffineFamily& fam, const std::vector<Wave>& path_vertices,
                               int n_bands, int n_samples, int threads) {
    if (n_bands > fam.dim()) throw Error("requested more bands than the reduced dimension");
    auto ks = sample_polyline(path_vertices, n_samples);
    std::vector<double> coord(ks.size(), 0.0);
    for (size_t i = 1; i < ks.size(); ++i) coord[i] = coord[i - 1] + (ks[i] - ks[i - 1]).norm();

    std::vector<RealVector> eigs(ks.size());
    parallel_for_index(ks.size(), threads, [&](size_t i) {
        eigs[i] = eig_hermitian_gen(fam.evaluate(ks[i])).omega2.head(n_bands);
    });

    DispersionTable table;
    table.rows.reserve(ks.size() * n_bands);
    for (size_t i = 0; i < ks.size(); ++i)
        for (int j = 0; j < n_bands; ++j)
            table.rows.push_back({coord[i], ks[i].x(), ks[i].y(), j + 1,
                                  std::sqrt(std::max(0.0, eigs[i][j]))});
    return table;
}

} // namespace bloch
