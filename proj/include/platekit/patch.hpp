#pragma once

#include <string>
#include <vector>

#include "platekit/geometry.hpp"
#include "platekit/mesh.hpp"

namespace platekit {

enum class PatchStatus : int { Ok = 0, FiveNodes, Collinear, ExtendedOk };

const char* patch_status_name(PatchStatus s);

struct Patch {
  int center = -1;

  struct Node {
    int dof = -1;  // vertex index or ghost dof
    Vec2 pos;
  };
  std::vector<int> members;        // real triangle indices, center first
  std::vector<int> ghost_members;  // ghost indices into mesh.ghosts
  std::vector<Node> nodes;         // center's three vertices first
  PatchStatus status = PatchStatus::Ok;
  int vandermonde_rank = 0;

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  /// Column of a given dof, or -1.
  int node_column(int dof) const;
};

constexpr double kPatchRankTol = 1e-8;
/// Finite-patch bound diam(N(K)) <= C h_K.
constexpr double kPatchDiameterFactor = 4.0;

/// Center element plus its edge neighbors; boundary edges contribute the
/// ghost element instead (unless include_ghosts is off, as in the Basic
/// Plate Triangle). Sets status and rank via detect_degeneracy.
Patch standard_patch(const Mesh& mesh, int k, bool include_ghosts = true);

/// Numerical rank of the quadratic monomial matrix on the patch nodes,
/// coordinates centered at the center's centroid and scaled by 1/h_K.
/// Updates patch.vandermonde_rank and returns the status.
PatchStatus detect_degeneracy(const Mesh& mesh, Patch& patch, double tol = kPatchRankTol);

/// Adds edge-neighboring elements (smallest index first) until rank 6,
/// honoring the finite-patch diameter bound. Idempotent on full-rank patches.
Patch extend_patch(const Mesh& mesh, Patch patch, double tol = kPatchRankTol);

/// Patches for every element; extends degenerate ones when extend is set.
std::vector<Patch> build_all_patches(const Mesh& mesh, bool extend, bool include_ghosts = true);

/// CSV diagnostic: element,status,rank,n_members,n_nodes.
void write_patch_diagnostics(const std::vector<Patch>& patches, const std::string& path);

}  // namespace platekit
