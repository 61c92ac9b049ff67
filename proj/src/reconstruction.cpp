#include "platekit/reconstruction.hpp"

#include <array>
#include <cmath>
#include <fstream>

#include "platekit/element.hpp"
#include "platekit/errors.hpp"

namespace platekit {

const char* recon_kind_name(ReconKind k) {
  switch (k) {
    case ReconKind::Morley:
      return "Morley";
    case ReconKind::FullQuadratic:
      return "FullQuadratic";
    case ReconKind::LeastSquares:
      return "LeastSquares";
  }
  return "?";
}

namespace {

/// Gradients of the three linear hat functions on a (possibly ghost) triangle.
std::array<Vec2, 3> linear_hat_gradients(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double inv2A = 1.0 / (2.0 * signed_area(a, b, c));
  return {perp(c - b) * inv2A, perp(a - c) * inv2A, perp(b - a) * inv2A};
}

void monomial_row(Eigen::MatrixXd& m, int row, const Vec2& q) {
  m(row, 0) = 1.0;
  m(row, 1) = q.x;
  m(row, 2) = q.y;
  m(row, 3) = q.x * q.x;
  m(row, 4) = q.x * q.y;
  m(row, 5) = q.y * q.y;
}

std::vector<int> patch_dofs(const Patch& patch) {
  std::vector<int> dofs;
  dofs.reserve(patch.n_nodes());
  for (const auto& node : patch.nodes) dofs.push_back(node.dof);
  return dofs;
}

}  // namespace

ReconstructionMap morley_map(const Mesh& mesh, const Patch& patch) {
  const int k = patch.center;
  const int n = patch.n_nodes();
  const P2Basis basis(mesh, k);
  const auto& tri = mesh.triangles[k];

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(6, 6);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(6, n);
  for (int i = 0; i < 3; ++i) {
    M(i, i) = 1.0;    // P2 value at vertex i is coefficient i
    rhs(i, i) = 1.0;  // center vertices are patch columns 0..2
  }

  for (int le = 0; le < 3; ++le) {
    const int e = mesh.tri_edges[k][le];
    const Edge& edge = mesh.edges[e];
    const Vec2 mid = mesh.edge_midpoint(e);
    const auto grads = basis.gradients(mid);
    for (int j = 0; j < 6; ++j) M(3 + le, j) = dot(grads[j], edge.normal);

    const int a = tri[le], b = tri[(le + 1) % 3];
    const Vec2 pa = mesh.vertices[a], pb = mesh.vertices[b];

    // Linear piece on the neighbor. Boundary edges use the ghost element when
    // the patch carries one; otherwise the average is single-sided (the Basic
    // Plate Triangle convention for exterior edges).
    Vec2 pd;
    int d_dof = -1;
    if (edge.is_boundary()) {
      if (mesh.edge_ghost[e] >= 0 &&
          patch.node_column(mesh.ghosts[mesh.edge_ghost[e]].ghost_dof) >= 0) {
        const GhostElement& g = mesh.ghosts[mesh.edge_ghost[e]];
        pd = g.ghost_vertex;
        d_dof = g.ghost_dof;
      }
    } else {
      const int nb = mesh.neighbor(k, e);
      d_dof = mesh.triangles[nb][mesh.opposite_vertex(nb, e)];
      pd = mesh.vertices[d_dof];
    }
    const double w = d_dof >= 0 ? 0.5 : 1.0;

    // Linear piece on the center element.
    const auto gk = linear_hat_gradients(mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                         mesh.vertices[tri[2]]);
    for (int i = 0; i < 3; ++i) rhs(3 + le, i) += w * dot(gk[i], edge.normal);

    if (d_dof >= 0) {
      const auto gn = linear_hat_gradients(pa, pb, pd);
      const int cols[3] = {patch.node_column(a), patch.node_column(b), patch.node_column(d_dof)};
      for (int i = 0; i < 3; ++i) rhs(3 + le, cols[i]) += w * dot(gn[i], edge.normal);
    }
  }

  ReconstructionMap map;
  map.element = k;
  map.kind = ReconKind::Morley;
  map.matrix = M.partialPivLu().solve(rhs);
  map.dofs = patch_dofs(patch);
  return map;
}

ReconstructionMap full_quadratic_map(const Mesh& mesh, const Patch& patch) {
  if (patch.vandermonde_rank < 6 || patch.n_nodes() != 6)
    throw DegeneratePatchError("element " + std::to_string(patch.center) +
                               " has a degenerate standard patch (" +
                               patch_status_name(patch.status) +
                               "); the least-squares reconstruction can extend it");

  const Vec2 c = mesh.centroid(patch.center);
  const double s = 1.0 / mesh.diameter(patch.center);
  Eigen::MatrixXd V(6, 6), E(6, 6);
  for (int i = 0; i < 6; ++i) monomial_row(V, i, (patch.nodes[i].pos - c) * s);
  const P2Basis basis(mesh, patch.center);
  for (int i = 0; i < 6; ++i) monomial_row(E, i, (basis.node(i) - c) * s);

  ReconstructionMap map;
  map.element = patch.center;
  map.kind = ReconKind::FullQuadratic;
  map.matrix = V.transpose().partialPivLu().solve(E.transpose()).transpose();
  map.dofs = patch_dofs(patch);
  return map;
}

ReconstructionMap least_squares_map(const Mesh& mesh, const Patch& patch) {
  if (patch.vandermonde_rank < 6)
    throw DegeneratePatchError("element " + std::to_string(patch.center) +
                               ": patch rank " + std::to_string(patch.vandermonde_rank) +
                               " after extension; cannot reconstruct a quadratic");

  const int n = patch.n_nodes();
  const int m = n - 3;
  const P2Basis basis(mesh, patch.center);
  auto bubbles = [&basis](const Vec2& x) {
    const auto l = basis.barycentric(x);
    return std::array<double, 3>{l[0] * l[1], l[1] * l[2], l[2] * l[0]};
  };

  // Residual rows at the non-center nodes for the 3 free bubble amplitudes.
  Eigen::MatrixXd B(m, 3);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, n);
  for (int r = 0; r < m; ++r) {
    const Vec2 x = patch.nodes[3 + r].pos;
    const auto b = bubbles(x);
    for (int i = 0; i < 3; ++i) B(r, i) = b[i];
    const auto l = basis.barycentric(x);
    for (int j = 0; j < 3; ++j) P(r, j) = -l[j];
    P(r, 3 + r) += 1.0;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
  qr.setThreshold(1e-8);
  if (qr.rank() < 3)
    throw DegeneratePatchError("element " + std::to_string(patch.center) +
                               ": rank-deficient least-squares system; extension insufficient");
  const Eigen::MatrixXd C = qr.solve(P);  // 3 x n

  ReconstructionMap map;
  map.element = patch.center;
  map.kind = ReconKind::LeastSquares;
  map.matrix = Eigen::MatrixXd::Zero(6, n);
  for (int i = 0; i < 3; ++i) map.matrix(i, i) = 1.0;
  for (int k = 3; k < 6; ++k) {
    const Vec2 x = basis.node(k);
    const auto l = basis.barycentric(x);
    for (int j = 0; j < 3; ++j) map.matrix(k, j) += l[j];
    const auto b = bubbles(x);
    for (int i = 0; i < 3; ++i) map.matrix.row(k) += b[i] * C.row(i);
  }
  map.dofs = patch_dofs(patch);
  return map;
}

double verify_reproduction(const Mesh& mesh, const ReconstructionMap& map, const Patch& patch) {
  const Vec2 c = mesh.centroid(patch.center);
  const double s = 1.0 / mesh.diameter(patch.center);
  const int n = patch.n_nodes();
  Eigen::MatrixXd samples(n, 6);
  for (int i = 0; i < n; ++i) monomial_row(samples, i, (patch.nodes[i].pos - c) * s);
  const P2Basis basis(mesh, patch.center);
  Eigen::MatrixXd expected(6, 6);
  for (int i = 0; i < 6; ++i) monomial_row(expected, i, (basis.node(i) - c) * s);

  return (map.matrix * samples - expected).cwiseAbs().maxCoeff();
}

ReconstructionSet build_reconstruction_maps(const Mesh& mesh, ReconKind kind,
                                            bool include_ghosts) {
  ReconstructionSet set;
  set.patches = build_all_patches(mesh, kind == ReconKind::LeastSquares, include_ghosts);
  set.maps.reserve(set.patches.size());
  for (const auto& patch : set.patches) {
    switch (kind) {
      case ReconKind::Morley:
        set.maps.push_back(morley_map(mesh, patch));
        break;
      case ReconKind::FullQuadratic:
        set.maps.push_back(full_quadratic_map(mesh, patch));
        break;
      case ReconKind::LeastSquares:
        set.maps.push_back(least_squares_map(mesh, patch));
        break;
    }
  }
  return set;
}

void write_reproduction_diagnostics(const Mesh& mesh, const ReconstructionSet& set,
                                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << "element,kind,reproduction_residual\n";
  char buf[64];
  for (std::size_t i = 0; i < set.maps.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6g", verify_reproduction(mesh, set.maps[i], set.patches[i]));
    out << set.maps[i].element << "," << recon_kind_name(set.maps[i].kind) << "," << buf << "\n";
  }
}

}  // namespace platekit
