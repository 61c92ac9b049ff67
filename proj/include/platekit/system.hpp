#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <string>
#include <vector>

#include "platekit/element.hpp"
#include "platekit/mesh.hpp"
#include "platekit/reconstruction.hpp"

namespace platekit {

enum class Family : int { ReconFQ = 0, ReconLSFQ, ReconMorley, Bpt, DpvNodal, DpvC0 };
enum class LoadMode : int { Reconstructed = 0, PlainLinear };
enum class PenaltyProjection : int { P0 = 0, P1 };

struct MethodSpec {
  Family family = Family::ReconFQ;
  LoadMode load_mode = LoadMode::Reconstructed;

  static MethodSpec make(Family f);
  /// Accepts fq, lsfq, morley, bpt, dpv, dpvc0.
  static MethodSpec parse(const std::string& name);
  const char* name() const;

  bool uses_reconstruction() const {
    return family == Family::ReconFQ || family == Family::ReconLSFQ ||
           family == Family::ReconMorley || family == Family::Bpt;
  }
  /// The Basic Plate Triangle averages single-sidedly on exterior edges and
  /// carries no ghost unknowns.
  bool uses_ghosts() const { return uses_reconstruction() && family != Family::Bpt; }
  ReconKind recon_kind() const;
};

/// Reconstruction maps matching the method's conventions.
ReconstructionSet build_method_reconstruction(const Mesh& mesh, MethodSpec method);

std::vector<std::string> method_names();

struct DgConfig {
  double beta = 100.0;
  PenaltyProjection penalty_projection = PenaltyProjection::P0;
  int quadrature_degree = 4;  // load integration
};

enum class DofKind : int { Vertex = 0, Ghost, ElementMidpoint, EdgeMidpoint };

struct DofInfo {
  DofKind kind = DofKind::Vertex;
  int index = -1;  // vertex / ghost / element / edge index
  int sub = -1;    // local midpoint for ElementMidpoint
  Vec2 pos;
};

/// Global unknown bookkeeping plus the per-element map from global dof values
/// to the 6 local P2 coefficients (a reconstruction matrix or a selector).
struct DofLayout {
  Family family = Family::ReconFQ;
  int n_global = 0;
  std::vector<DofInfo> dofs;

  struct ElementScatter {
    std::vector<int> dofs;
    Eigen::MatrixXd coeff_map;  // 6 x |dofs|
  };
  std::vector<ElementScatter> elements;

  std::vector<char> constrained;
  std::vector<double> constrained_value;
  std::vector<int> free_index;  // global -> free position or -1
  std::vector<int> free_dofs;   // free position -> global
  int n_free = 0;
};

using ScalarField = std::function<double(Vec2)>;

DofLayout make_dof_layout(const Mesh& mesh, MethodSpec method, const ReconstructionSet* recon,
                          const ScalarField* essential_value = nullptr);

struct SparseSystem {
  MethodSpec method;
  DgConfig config;
  DofLayout layout;
  Eigen::SparseMatrix<double> matrix;  // over free dofs, symmetric
  Eigen::VectorXd rhs;                 // reduced right-hand side
  Eigen::VectorXd rhs_lift;            // contribution of constrained values
  double h = 0.0;                      // global mesh size used in all weights
};

/// Assembles the dG bilinear form: element bending energies plus, on every
/// edge outside the simply supported and free sets, the symmetrized average
/// moment / normal-jump coupling and the beta h^-1 penalty on the projected
/// jump. Transversal-force terms vanish identically for quadratic fields.
SparseSystem assemble(const Mesh& mesh, MethodSpec method, const MaterialParams& material,
                      const DgConfig& config, const ReconstructionSet* recon,
                      const ScalarField* essential_value = nullptr);

/// Fills system.rhs. Reconstructed mode integrates f against reconstructed
/// basis functions; PlainLinear (the Basic Plate Triangle) against hats.
void assemble_load(SparseSystem& system, const Mesh& mesh, const ScalarField& f);

struct Solution {
  MethodSpec method;
  Eigen::VectorXd nodal;  // all global dofs, constrained values included
  std::vector<LocalQuadratic> reconstructed;
  int n_free = 0;
};

/// Sparse symmetric factorization; reports singular systems with the
/// smallest pivot. One step of iterative refinement, residual-checked.
Solution solve(const SparseSystem& system, const Mesh& mesh);

void write_matrix_market(const SparseSystem& system, const std::string& path);

}  // namespace platekit
