#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "platekit/mesh.hpp"
#include "platekit/system.hpp"

namespace platekit {

/// Smooth scalar field with derivatives through third order.
class SmoothField {
 public:
  struct Third {
    double xxx = 0.0, xxy = 0.0, xyy = 0.0, yyy = 0.0;
  };

  virtual ~SmoothField() = default;
  virtual double value(const Vec2& x) const = 0;
  virtual Vec2 gradient(const Vec2& x) const = 0;
  virtual Sym2 hessian(const Vec2& x) const = 0;
  virtual Third third(const Vec2& x) const = 0;
};

class ZeroField final : public SmoothField {
 public:
  double value(const Vec2&) const override { return 0.0; }
  Vec2 gradient(const Vec2&) const override { return {}; }
  Sym2 hessian(const Vec2&) const override { return {}; }
  Third third(const Vec2&) const override { return {}; }
};

/// u = sin(pi x) sin(2 pi y); satisfies D lap^2 u = 25 pi^4 u with D = 1.
class ExactP1 final : public SmoothField {
 public:
  double value(const Vec2& x) const override;
  Vec2 gradient(const Vec2& x) const override;
  Sym2 hessian(const Vec2& x) const override;
  Third third(const Vec2& x) const override;
  static double load(const Vec2& x);
};

struct ModelProblem {
  std::string id;
  MaterialParams material;
  BcLayout layout;
  ScalarField load;
  std::shared_ptr<const SmoothField> exact;  // set lazily for p2

  static ModelProblem p1();
  /// Reference field attached by attach_p2_reference.
  static ModelProblem p2();
};

/// Piecewise quadratic field on a structured mesh with O(1) point location.
/// Serves as the over-resolved reference solution for the p2 problem; third
/// derivatives come from vertex-averaged Hessian recovery.
class StructuredP2Field final : public SmoothField {
 public:
  StructuredP2Field(int n, Mesh mesh, std::vector<LocalQuadratic> coeffs);

  double value(const Vec2& x) const override;
  Vec2 gradient(const Vec2& x) const override;
  Sym2 hessian(const Vec2& x) const override;
  Third third(const Vec2& x) const override;

  int locate(const Vec2& x) const;
  int resolution() const { return n_; }
  const Mesh& mesh() const { return mesh_; }
  const std::vector<LocalQuadratic>& coeffs() const { return coeffs_; }

 private:
  int n_;
  Mesh mesh_;
  std::vector<LocalQuadratic> coeffs_;
  std::vector<P2Basis> bases_;
  std::vector<Third> thirds_;
};

/// Directory from PLATEKIT_CACHE, or "platekit_cache" in the working directory.
std::string reference_cache_dir();

/// Over-resolved DpvC0 solve of the p2 problem on a structured mesh, cached to
/// disk. The returned field at `resolution` is Richardson-checked against the
/// half-resolution solve (relative L2 disagreement must stay below 1%).
std::shared_ptr<const StructuredP2Field> reference_p2(const std::string& cache_dir,
                                                      int resolution = 256);

/// Builds/loads the reference and installs it as problem.exact.
void attach_p2_reference(ModelProblem& problem, int resolution = 256);

/// ||u - U_h|| with elementwise quadrature of the given degree.
double l2_error(const Mesh& mesh, const std::vector<LocalQuadratic>& discrete,
                const SmoothField& u, int degree = 6);

/// ||u - U|| against the piecewise linear vertex interpolant itself, without
/// reconstruction (defined for reconstruction families only).
double l2_error_nodal_linear(const Mesh& mesh, const Solution& solution, const SmoothField& u,
                             int degree = 6);

struct EnergyBreakdown {
  double volume = 0.0;  // sum_K (sigma(e), kappa(e))_K
  double mnn = 0.0;     // h ||<M_nn(e)>||^2 on dK \ (E_F + E_S)
  double t = 0.0;       // h^3 ||<T(e)>||^2 on dK \ E_F
  double jump = 0.0;    // h^-1 ||P0 [e_n]||^2 on dK \ (E_F + E_S)
  double squared() const { return volume + mnn + t + jump; }
  double total() const;
};

/// Mesh-dependent energy norm of e = u - U_h; interior edges are visited from
/// both element sides and therefore counted twice.
EnergyBreakdown energy_error(const Mesh& mesh, const std::vector<LocalQuadratic>& discrete,
                             const SmoothField& u, const MaterialParams& material);

struct ErrorRow {
  int n = 0;
  double h = 0.0;
  int ndof = 0;
  double err_l2 = 0.0;
  double err_energy = 0.0;
  double err_l2_nodal = std::numeric_limits<double>::quiet_NaN();
};

struct ErrorReport {
  std::string method;
  std::string problem;
  std::string mesh_type;
  double beta = 0.0;
  std::vector<ErrorRow> rows;
  std::optional<double> slope_l2;
  std::optional<double> slope_energy;
  std::optional<double> slope_l2_nodal;
  bool partial = false;
  std::string note;
};

/// Least-squares slope of log(err) vs log(h) over the finest three levels.
std::optional<double> fit_slope(const std::vector<double>& h, const std::vector<double>& err);

using MeshProvider = std::function<const Mesh&(int n)>;

MeshProvider default_mesh_provider(const std::string& mesh_type, std::uint64_t seed,
                                   double jitter, const BcLayout& layout);

ErrorReport convergence_study(const ModelProblem& problem, MethodSpec method,
                              const std::string& mesh_type, const std::vector<int>& levels,
                              const DgConfig& config, const MeshProvider& provider);

/// Schema: method,problem,mesh_type,beta,n,h,ndof,err_l2,err_energy with
/// fitted slopes appended as comment lines. Written atomically.
void write_report_csv(const ErrorReport& report, const std::string& path,
                      bool nodal_l2_column = false);

}  // namespace platekit
