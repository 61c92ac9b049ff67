#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "platekit/mesh.hpp"
#include "platekit/patch.hpp"

namespace platekit {

enum class ReconKind : int { Morley = 0, FullQuadratic, LeastSquares };

const char* recon_kind_name(ReconKind k);

/// Linear map from patch nodal values to the 6 local P2 coefficients on the
/// center element. Rows 0..2 select the center's vertex values exactly.
struct ReconstructionMap {
  int element = -1;
  ReconKind kind = ReconKind::FullQuadratic;
  Eigen::MatrixXd matrix;  // 6 x n_patch_nodes
  std::vector<int> dofs;   // global dof per column
};

/// Vertex match on K plus average normal gradient of the two adjacent linear
/// pieces (interior + ghost on the boundary) at each edge midpoint.
ReconstructionMap morley_map(const Mesh& mesh, const Patch& patch);

/// Interpolation through all six nodes of a nondegenerate standard patch.
/// Throws DegeneratePatchError when rank < 6 or the patch has extra nodes.
ReconstructionMap full_quadratic_map(const Mesh& mesh, const Patch& patch);

/// Exact at K's vertices, least squares at the remaining patch nodes.
/// Equals full_quadratic_map on a nondegenerate standard patch.
ReconstructionMap least_squares_map(const Mesh& mesh, const Patch& patch);

/// Max coefficient error reproducing the six quadratic monomials sampled at
/// the patch nodes (ghost coordinates included).
double verify_reproduction(const Mesh& mesh, const ReconstructionMap& map, const Patch& patch);

struct ReconstructionSet {
  std::vector<Patch> patches;
  std::vector<ReconstructionMap> maps;
};

/// Maps for every element. LeastSquares extends degenerate patches first;
/// FullQuadratic throws on the first degenerate patch. The Basic Plate
/// Triangle builds Morley maps with include_ghosts off (single-sided
/// boundary averages, no ghost unknowns).
ReconstructionSet build_reconstruction_maps(const Mesh& mesh, ReconKind kind,
                                            bool include_ghosts = true);

/// CSV diagnostic: element,kind,reproduction_residual.
void write_reproduction_diagnostics(const Mesh& mesh, const ReconstructionSet& set,
                                    const std::string& path);

}  // namespace platekit
