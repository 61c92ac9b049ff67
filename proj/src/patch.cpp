#include "platekit/patch.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <fstream>
#include <set>

#include "platekit/errors.hpp"

namespace platekit {

const char* patch_status_name(PatchStatus s) {
  switch (s) {
    case PatchStatus::Ok:
      return "Ok";
    case PatchStatus::FiveNodes:
      return "FiveNodes";
    case PatchStatus::Collinear:
      return "Collinear";
    case PatchStatus::ExtendedOk:
      return "ExtendedOk";
  }
  return "?";
}

int Patch::node_column(int dof) const {
  for (int i = 0; i < n_nodes(); ++i)
    if (nodes[i].dof == dof) return i;
  return -1;
}

namespace {

void add_node(Patch& patch, int dof, const Vec2& pos) {
  if (patch.node_column(dof) < 0) patch.nodes.push_back({dof, pos});
}

double patch_diameter(const Patch& patch) {
  double d = 0.0;
  for (int i = 0; i < patch.n_nodes(); ++i)
    for (int j = i + 1; j < patch.n_nodes(); ++j)
      d = std::max(d, norm(patch.nodes[i].pos - patch.nodes[j].pos));
  return d;
}

}  // namespace

PatchStatus detect_degeneracy(const Mesh& mesh, Patch& patch, double tol) {
  const Vec2 c = mesh.centroid(patch.center);
  const double s = 1.0 / mesh.diameter(patch.center);
  const int n = patch.n_nodes();
  Eigen::MatrixXd V(n, 6);
  for (int i = 0; i < n; ++i) {
    const Vec2 q = (patch.nodes[i].pos - c) * s;
    V(i, 0) = 1.0;
    V(i, 1) = q.x;
    V(i, 2) = q.y;
    V(i, 3) = q.x * q.x;
    V(i, 4) = q.x * q.y;
    V(i, 5) = q.y * q.y;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(V);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * sv(0)) ++rank;
  patch.vandermonde_rank = rank;
  if (rank == 6)
    return patch.status == PatchStatus::ExtendedOk ? PatchStatus::ExtendedOk : PatchStatus::Ok;
  return n < 6 ? PatchStatus::FiveNodes : PatchStatus::Collinear;
}

Patch standard_patch(const Mesh& mesh, int k, bool include_ghosts) {
  Patch patch;
  patch.center = k;
  patch.members.push_back(k);
  const auto& tri = mesh.triangles[k];
  for (int i = 0; i < 3; ++i) add_node(patch, tri[i], mesh.vertices[tri[i]]);
  for (int le = 0; le < 3; ++le) {
    const int e = mesh.tri_edges[k][le];
    const Edge& edge = mesh.edges[e];
    if (edge.is_boundary()) {
      if (!include_ghosts) continue;
      const GhostElement& g = mesh.ghosts[mesh.edge_ghost[e]];
      patch.ghost_members.push_back(mesh.edge_ghost[e]);
      add_node(patch, g.ghost_dof, g.ghost_vertex);
    } else {
      const int nb = mesh.neighbor(k, e);
      patch.members.push_back(nb);
      const int opp = mesh.triangles[nb][mesh.opposite_vertex(nb, e)];
      add_node(patch, opp, mesh.vertices[opp]);
    }
  }
  patch.status = detect_degeneracy(mesh, patch);
  return patch;
}

Patch extend_patch(const Mesh& mesh, Patch patch, double tol) {
  if (patch.vandermonde_rank == 6) return patch;

  const double max_diam = kPatchDiameterFactor * mesh.diameter(patch.center);
  std::set<int> member_set(patch.members.begin(), patch.members.end());

  while (patch.vandermonde_rank < 6) {
    int best = -1;
    for (int m : member_set) {
      for (int le = 0; le < 3; ++le) {
        const int nb = mesh.neighbor(m, mesh.tri_edges[m][le]);
        if (nb < 0 || member_set.count(nb)) continue;
        if (best >= 0 && nb >= best) continue;
        // Reject candidates that would break the finite-patch bound.
        double d = patch_diameter(patch);
        for (int i : mesh.triangles[nb])
          for (const auto& node : patch.nodes)
            d = std::max(d, norm(mesh.vertices[i] - node.pos));
        for (int i : mesh.triangles[nb])
          for (int j : mesh.triangles[nb])
            d = std::max(d, norm(mesh.vertices[i] - mesh.vertices[j]));
        if (d <= max_diam) best = nb;
      }
    }
    if (best < 0)
      throw UnrecoverablePatchError(
          "extend_patch: no admissible extension within the diameter bound for element " +
          std::to_string(patch.center));
    member_set.insert(best);
    patch.members.push_back(best);
    for (int i : mesh.triangles[best]) add_node(patch, i, mesh.vertices[i]);
    patch.status = detect_degeneracy(mesh, patch, tol);
  }
  patch.status = PatchStatus::ExtendedOk;
  return patch;
}

std::vector<Patch> build_all_patches(const Mesh& mesh, bool extend, bool include_ghosts) {
  std::vector<Patch> patches;
  patches.reserve(mesh.n_triangles());
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    Patch p = standard_patch(mesh, k, include_ghosts);
    if (extend && p.vandermonde_rank < 6) p = extend_patch(mesh, p);
    patches.push_back(std::move(p));
  }
  return patches;
}

void write_patch_diagnostics(const std::vector<Patch>& patches, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << "element,status,rank,n_members,n_nodes\n";
  for (const auto& p : patches)
    out << p.center << "," << patch_status_name(p.status) << "," << p.vandermonde_rank << ","
        << p.members.size() + p.ghost_members.size() << "," << p.n_nodes() << "\n";
}

}  // namespace platekit
