#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "pmc/types.hpp"

namespace pmc {

/// Triangulated unit disk. Nodes are laid out in concentric rings: a center
/// node, then ring i (radius i/N) carrying 6i nodes, so the outermost ring
/// lies exactly on the unit circle. Triangles are positively oriented and the
/// boundary loop runs counterclockwise. Immutable after construction.
struct Mesh {
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::array<int, 2>> boundary_edges;  // ordered CCW loop
    std::vector<int> boundary_nodes;                 // ordered CCW
    double h_max = 0.0;
    int level = -1;
    int rings = 0;

    // derived quantities, filled by finalize()
    std::vector<double> area;                        // positive triangle areas
    std::vector<std::array<Vec2, 3>> hat_gradient;   // grad of the 3 hat functions
    std::vector<Vec2> centroid;
    std::vector<char> node_on_boundary;
    std::vector<int> interior_of;                    // node -> interior dof index or -1
    std::vector<int> boundary_index_of;              // node -> position in boundary loop or -1
    std::vector<int> interior_nodes;
    std::vector<int> boundary_edge_triangle;         // triangle adjacent to each boundary edge

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_boundary() const { return static_cast<int>(boundary_nodes.size()); }
    int num_interior() const { return static_cast<int>(interior_nodes.size()); }

    /// Angle of the j-th boundary node; nodes are equally spaced in angle.
    double boundary_theta(int j) const;

    /// Index of the triangle containing p (nearest triangle if p falls on an
    /// edge or a hair outside the polygon).
    int locate(const Vec2& p) const;

    /// P1 evaluation of a nodal field at an arbitrary point.
    double eval(const ScalarField& f, const Vec2& p) const;

    /// Value of a per-triangle field at the triangle containing p.
    double eval_cellwise(const std::vector<double>& f, const Vec2& p) const;

    void finalize();

  private:
    // uniform-grid bucket index over triangle bounding boxes
    struct Locator {
        int cells = 0;
        double cell_size = 0.0;
        std::vector<std::vector<int>> buckets;
    };
    Locator locator_;
};

/// Tangent/normal frame at each boundary node; tangent points CCW, normal out.
struct BoundaryFrame {
    std::vector<Vec2> tangent;
    std::vector<Vec2> normal;
};

/// Build the ring mesh at the given refinement level (h_max roughly halves
/// per level). Throws ConfigError for level > 8 or level < 0.
Mesh generate_disk_mesh(int level);

/// Move interior nodes to the uniform-weight harmonic embedding (boundary
/// fixed); called by the generator before finalize().
void relax_interior(Mesh& mesh);

BoundaryFrame boundary_frame(const Mesh& mesh);

/// Per-triangle gradient of a P1 nodal field.
GradientField gradient(const Mesh& mesh, const ScalarField& u);

/// Total length of the discrete boundary loop.
double boundary_length(const Mesh& mesh);

void dump_mesh(std::ostream& os, const Mesh& mesh);
Mesh load_mesh(std::istream& is);

}  // namespace pmc
