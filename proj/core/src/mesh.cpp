#include "pmc/mesh.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <set>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "pmc/errors.hpp"

namespace pmc {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

}  // namespace

double Mesh::boundary_theta(int j) const {
    const int m = num_boundary();
    return 2.0 * std::numbers::pi * j / m;
}

void Mesh::finalize() {
    const int nt = num_triangles();
    const int nn = num_nodes();
    area.resize(nt);
    hat_gradient.resize(nt);
    centroid.resize(nt);
    h_max = 0.0;
    for (int t = 0; t < nt; ++t) {
        const auto& tri = triangles[t];
        const Vec2 p0 = nodes[tri[0]], p1 = nodes[tri[1]], p2 = nodes[tri[2]];
        const double a = signed_area(p0, p1, p2);
        if (!(a > 0.0)) throw InvalidArgument("mesh: nonpositive triangle area");
        area[t] = a;
        centroid[t] = (p0 + p1 + p2) / 3.0;
        const Vec2 p[3] = {p0, p1, p2};
        for (int i = 0; i < 3; ++i) {
            const Vec2 e = p[(i + 2) % 3] - p[(i + 1) % 3];  // edge opposite vertex i
            hat_gradient[t][i] = Vec2(-e.y(), e.x()) / (2.0 * a);
            h_max = std::max(h_max, e.norm());
        }
    }
    node_on_boundary.assign(nn, 0);
    boundary_index_of.assign(nn, -1);
    for (size_t j = 0; j < boundary_nodes.size(); ++j) {
        node_on_boundary[boundary_nodes[j]] = 1;
        boundary_index_of[boundary_nodes[j]] = static_cast<int>(j);
    }
    interior_of.assign(nn, -1);
    interior_nodes.clear();
    for (int i = 0; i < nn; ++i) {
        if (!node_on_boundary[i]) {
            interior_of[i] = static_cast<int>(interior_nodes.size());
            interior_nodes.push_back(i);
        }
    }

    // triangle adjacent to each boundary edge
    std::map<std::pair<int, int>, int> edge_tri;
    for (int t = 0; t < nt; ++t) {
        for (int i = 0; i < 3; ++i) {
            int a = triangles[t][i], b = triangles[t][(i + 1) % 3];
            edge_tri[{std::min(a, b), std::max(a, b)}] = t;
        }
    }
    boundary_edge_triangle.clear();
    for (const auto& e : boundary_edges) {
        auto it = edge_tri.find({std::min(e[0], e[1]), std::max(e[0], e[1])});
        if (it == edge_tri.end()) throw InvalidArgument("mesh: boundary edge without triangle");
        boundary_edge_triangle.push_back(it->second);
    }

    // bucket grid for point location
    const int cells = std::max(4, static_cast<int>(std::ceil(2.2 / h_max)));
    locator_.cells = cells;
    locator_.cell_size = 2.4 / cells;  // covers [-1.2, 1.2]^2
    locator_.buckets.assign(static_cast<size_t>(cells) * cells, {});
    auto cell_of = [&](double x) {
        int c = static_cast<int>((x + 1.2) / locator_.cell_size);
        return std::clamp(c, 0, cells - 1);
    };
    for (int t = 0; t < nt; ++t) {
        double x0 = 1e30, x1 = -1e30, y0 = 1e30, y1 = -1e30;
        for (int i = 0; i < 3; ++i) {
            const Vec2& p = nodes[triangles[t][i]];
            x0 = std::min(x0, p.x());
            x1 = std::max(x1, p.x());
            y0 = std::min(y0, p.y());
            y1 = std::max(y1, p.y());
        }
        for (int cx = cell_of(x0); cx <= cell_of(x1); ++cx)
            for (int cy = cell_of(y0); cy <= cell_of(y1); ++cy)
                locator_.buckets[static_cast<size_t>(cx) * cells + cy].push_back(t);
    }
}

int Mesh::locate(const Vec2& p) const {
    const int cells = locator_.cells;
    auto cell_of = [&](double x) {
        int c = static_cast<int>((x + 1.2) / locator_.cell_size);
        return std::clamp(c, 0, cells - 1);
    };
    auto min_bary = [&](int t) {
        const auto& tri = triangles[t];
        const double a = area[t];
        const double l0 = signed_area(p, nodes[tri[1]], nodes[tri[2]]) / a;
        const double l1 = signed_area(nodes[tri[0]], p, nodes[tri[2]]) / a;
        const double l2 = 1.0 - l0 - l1;
        return std::min({l0, l1, l2});
    };
    int best = -1;
    double best_val = -1e30;
    const int cx = cell_of(p.x()), cy = cell_of(p.y());
    for (int dx = 0; dx <= 2 && best_val < -1e-12; ++dx) {
        // widen the search ring until a containing triangle shows up
        for (int ix = std::max(0, cx - dx); ix <= std::min(cells - 1, cx + dx); ++ix) {
            for (int iy = std::max(0, cy - dx); iy <= std::min(cells - 1, cy + dx); ++iy) {
                for (int t : locator_.buckets[static_cast<size_t>(ix) * cells + iy]) {
                    const double v = min_bary(t);
                    if (v > best_val) {
                        best_val = v;
                        best = t;
                    }
                }
            }
        }
    }
    if (best < 0) {
        // point far outside all buckets; fall back to a full scan
        for (int t = 0; t < num_triangles(); ++t) {
            const double v = min_bary(t);
            if (v > best_val) {
                best_val = v;
                best = t;
            }
        }
    }
    return best;
}

double Mesh::eval(const ScalarField& f, const Vec2& p) const {
    const int t = locate(p);
    const auto& tri = triangles[t];
    const double a = area[t];
    double l0 = signed_area(p, nodes[tri[1]], nodes[tri[2]]) / a;
    double l1 = signed_area(nodes[tri[0]], p, nodes[tri[2]]) / a;
    double l2 = 1.0 - l0 - l1;
    return l0 * f[tri[0]] + l1 * f[tri[1]] + l2 * f[tri[2]];
}

double Mesh::eval_cellwise(const std::vector<double>& f, const Vec2& p) const {
    return f[static_cast<size_t>(locate(p))];
}

Mesh generate_disk_mesh(int level) {
    if (level < 0) throw ConfigError("generate_disk_mesh: level must be >= 0");
    if (level > 8) throw ConfigError("generate_disk_mesh: level > 8 exceeds the memory guard");
    const int N = 1 << (level + 1);
    Mesh mesh;
    mesh.level = level;
    mesh.rings = N;

    mesh.nodes.push_back(Vec2(0.0, 0.0));
    std::vector<int> ring_start(N + 1, 0);
    ring_start[0] = 0;  // center "ring" is the single node 0
    for (int i = 1; i <= N; ++i) {
        ring_start[i] = static_cast<int>(mesh.nodes.size());
        const double r = static_cast<double>(i) / N;
        const int ni = 6 * i;
        for (int j = 0; j < ni; ++j) {
            const double th = 2.0 * std::numbers::pi * j / ni;
            mesh.nodes.push_back(Vec2(r * std::cos(th), r * std::sin(th)));
        }
    }
    // place the outermost ring exactly on the unit circle (it already is, by
    // construction r = N/N = 1; cos/sin keep |p| = 1 to roundoff)

    for (int j = 0; j < 6; ++j)
        mesh.triangles.push_back({0, ring_start[1] + j, ring_start[1] + (j + 1) % 6});
    for (int i = 1; i < N; ++i) {
        const int ni = 6 * i, no = 6 * (i + 1);
        for (int s = 0; s < 6; ++s) {
            auto inner = [&](int k) { return ring_start[i] + (s * i + k) % ni; };
            auto outer = [&](int k) { return ring_start[i + 1] + (s * (i + 1) + k) % no; };
            for (int k = 0; k < i; ++k) {
                mesh.triangles.push_back({inner(k), outer(k), outer(k + 1)});
                mesh.triangles.push_back({inner(k), outer(k + 1), inner(k + 1)});
            }
            mesh.triangles.push_back({inner(i), outer(i), outer(i + 1)});
        }
    }

    const int nb = 6 * N;
    const int b0 = ring_start[N];
    for (int j = 0; j < nb; ++j) {
        mesh.boundary_nodes.push_back(b0 + j);
        mesh.boundary_edges.push_back({b0 + j, b0 + (j + 1) % nb});
    }

    relax_interior(mesh);
    mesh.finalize();
    return mesh;
}

// Interior nodes move to the combinatorial-harmonic (Tutte) embedding with
// the boundary held fixed. The raw ring placement leaves the six seed spokes
// as kink lines where nodal operators lose pointwise consistency; the
// relaxed positions restore second-order patch symmetry everywhere, and the
// embedding stays fold-free for a convex boundary.
void relax_interior(Mesh& mesh) {
    const int n = static_cast<int>(mesh.nodes.size());
    std::vector<char> on_boundary(n, 0);
    for (int b : mesh.boundary_nodes) on_boundary[b] = 1;
    std::vector<std::set<int>> nbr(n);
    for (const auto& t : mesh.triangles)
        for (int i = 0; i < 3; ++i) {
            nbr[t[i]].insert(t[(i + 1) % 3]);
            nbr[t[(i + 1) % 3]].insert(t[i]);
        }
    std::vector<int> interior, index_of(n, -1);
    for (int i = 0; i < n; ++i)
        if (!on_boundary[i]) {
            index_of[i] = static_cast<int>(interior.size());
            interior.push_back(i);
        }
    const int ni = static_cast<int>(interior.size());
    if (ni == 0) return;
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Zero(ni, 2);
    for (int k = 0; k < ni; ++k) {
        const int i = interior[k];
        trip.emplace_back(k, k, static_cast<double>(nbr[i].size()));
        for (int j : nbr[i]) {
            if (on_boundary[j]) {
                rhs.row(k) += mesh.nodes[j].transpose();
            } else {
                trip.emplace_back(k, index_of[j], -1.0);
            }
        }
    }
    Eigen::SparseMatrix<double> L(ni, ni);
    L.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(L);
    if (chol.info() != Eigen::Success)
        throw InvalidArgument("relax_interior: factorization failed");
    const Eigen::MatrixX2d sol = chol.solve(rhs);
    for (int k = 0; k < ni; ++k) mesh.nodes[interior[k]] = sol.row(k).transpose();
}

BoundaryFrame boundary_frame(const Mesh& mesh) {
    BoundaryFrame frame;
    frame.tangent.reserve(mesh.num_boundary());
    frame.normal.reserve(mesh.num_boundary());
    for (int b : mesh.boundary_nodes) {
        Vec2 n = mesh.nodes[b].normalized();
        frame.normal.push_back(n);
        frame.tangent.push_back(Vec2(-n.y(), n.x()));
    }
    return frame;
}

GradientField gradient(const Mesh& mesh, const ScalarField& u) {
    if (u.size() != mesh.num_nodes()) throw InvalidArgument("gradient: field size mismatch");
    GradientField g(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        Vec2 acc = Vec2::Zero();
        for (int i = 0; i < 3; ++i) acc += u[mesh.triangles[t][i]] * mesh.hat_gradient[t][i];
        g[t] = acc;
    }
    return g;
}

double boundary_length(const Mesh& mesh) {
    double len = 0.0;
    for (const auto& e : mesh.boundary_edges) len += (mesh.nodes[e[0]] - mesh.nodes[e[1]]).norm();
    return len;
}

void dump_mesh(std::ostream& os, const Mesh& mesh) {
    os.precision(17);
    os << "#nodes x y\n";
    for (const auto& p : mesh.nodes) os << p.x() << " " << p.y() << "\n";
    os << "#triangles i j k\n";
    for (const auto& t : mesh.triangles) os << t[0] << " " << t[1] << " " << t[2] << "\n";
    os << "#boundary i j\n";
    for (const auto& e : mesh.boundary_edges) os << e[0] << " " << e[1] << "\n";
}

Mesh load_mesh(std::istream& is) {
    Mesh mesh;
    std::string line;
    int section = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("#nodes", 0) == 0) section = 1;
            else if (line.rfind("#triangles", 0) == 0) section = 2;
            else if (line.rfind("#boundary", 0) == 0) section = 3;
            else throw InvalidArgument("load_mesh: unknown section: " + line);
            continue;
        }
        std::istringstream ss(line);
        if (section == 1) {
            double x, y;
            ss >> x >> y;
            mesh.nodes.push_back(Vec2(x, y));
        } else if (section == 2) {
            std::array<int, 3> t{};
            ss >> t[0] >> t[1] >> t[2];
            mesh.triangles.push_back(t);
        } else if (section == 3) {
            std::array<int, 2> e{};
            ss >> e[0] >> e[1];
            mesh.boundary_edges.push_back(e);
            mesh.boundary_nodes.push_back(e[0]);
        } else {
            throw InvalidArgument("load_mesh: data before any section header");
        }
    }
    mesh.finalize();
    return mesh;
}

}  // namespace pmc
