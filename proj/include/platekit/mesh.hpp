#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "platekit/geometry.hpp"

namespace platekit {

enum class BoundaryTag : int { Interior = 0, Clamped, SimplySupported, Free };

char tag_letter(BoundaryTag t);
BoundaryTag tag_from_letter(char c);

struct Edge {
  std::array<int, 2> v{-1, -1};   // endpoint vertex indices
  Vec2 normal;                    // fixed unit normal n_E (exterior on the boundary)
  Vec2 tangent;                   // t_E = (n2, -n1), points from v[0] to v[1]
  std::array<int, 2> owners{-1, -1};  // owners[0] on the side n_E points away from
  BoundaryTag tag = BoundaryTag::Interior;
  std::array<int, 2> dn{-1, +1};  // orientation sign per endpoint

  bool is_boundary() const { return owners[1] < 0; }
};

struct GhostElement {
  int boundary_edge = -1;
  Vec2 ghost_vertex;
  int ghost_dof = -1;       // global index among vertex + ghost dofs
  int owner_triangle = -1;
};

/// Boundary condition assignment for the four sides of the unit square.
struct BcLayout {
  BoundaryTag bottom = BoundaryTag::SimplySupported;  // y = 0
  BoundaryTag right = BoundaryTag::SimplySupported;   // x = 1
  BoundaryTag top = BoundaryTag::SimplySupported;     // y = 1
  BoundaryTag left = BoundaryTag::SimplySupported;    // x = 0

  static BcLayout all(BoundaryTag t) { return {t, t, t, t}; }
  static BcLayout all_simply_supported() { return all(BoundaryTag::SimplySupported); }
  static BcLayout all_clamped() { return all(BoundaryTag::Clamped); }
  static BcLayout all_free() { return all(BoundaryTag::Free); }
  /// Two opposite sides simply supported, one clamped, one free.
  static BcLayout mixed_sscf() {
    return {BoundaryTag::Clamped, BoundaryTag::SimplySupported, BoundaryTag::Free,
            BoundaryTag::SimplySupported};
  }
};

struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> tri_edges;  // edge k joins local vertices k, k+1
  std::vector<GhostElement> ghosts;
  std::vector<int> edge_ghost;            // edge index -> ghost index or -1
  std::vector<bool> vertex_constrained;   // on the closure of Gamma_C + Gamma_S
  double h = 0.0;                         // max element diameter
  double quasi_uniformity_ratio = 0.0;    // max/min edge length

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
  int n_ghosts() const { return static_cast<int>(ghosts.size()); }

  Vec2 vertex(int i) const { return vertices[i]; }
  Vec2 centroid(int k) const;
  double area(int k) const;
  double diameter(int k) const;
  Vec2 edge_midpoint(int e) const;
  double edge_length(int e) const;
  /// Local index (0..2) of the triangle vertex opposite edge e, given owner k.
  int opposite_vertex(int k, int e) const;
  /// Triangle across edge e from triangle k, or -1.
  int neighbor(int k, int e) const;
};

/// Right-triangle grid on the unit square, each cell split by the same diagonal.
Mesh build_structured_mesh(int n);

/// Jittered grid, Delaunay retriangulated; deterministic for a fixed seed.
/// Boundary vertices stay at grid positions. Redraws if min angle < 15 degrees.
Mesh build_unstructured_mesh(int n, std::uint64_t seed, double jitter);

/// Hand-built 12-triangle unit-square mesh whose element 0 has a five-node
/// (degenerate) standard patch. With degenerate=false one interior edge is
/// flipped, which removes the degeneracy while keeping the same vertices.
Mesh build_degenerate_demo_mesh(bool degenerate = true);

/// Assign boundary tags by side and mark strongly constrained vertices.
void tag_boundary(Mesh& mesh, const BcLayout& layout);

/// One ghost element per boundary edge: point reflection of the opposite
/// vertex through the edge midpoint. Ghost dofs follow the vertex dofs.
void add_ghosts(Mesh& mesh);

/// Structural checks (incidence, orientation, area sum); throws on violation.
void validate_mesh(const Mesh& mesh, double expected_area = -1.0);

void write_mesh(const Mesh& mesh, const std::string& path);
void write_mesh(const Mesh& mesh, std::ostream& out);
/// Reads the plain-text format, rebuilds edges/ghosts. Reorients clockwise
/// triangles, reporting them in `warnings` if given.
Mesh read_mesh(const std::string& path, std::vector<std::string>* warnings = nullptr);
Mesh read_mesh(std::istream& in, std::vector<std::string>* warnings = nullptr);

}  // namespace platekit
