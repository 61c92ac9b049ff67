#pragma once

#include <array>

#include "platekit/geometry.hpp"
#include "platekit/mesh.hpp"

namespace platekit {

struct MaterialParams {
  double E = 0.0;       // Young's modulus
  double nu = 0.0;      // Poisson's ratio
  double p = 0.0;       // plate thickness
  double D = 0.0;       // bending stiffness E p^3 / (12 (1 - nu^2))
  double lambda = 0.0;  // D nu
  double mu = 0.0;      // D (1 - nu)

  static MaterialParams from_elastic(double E, double nu, double p);
  static MaterialParams from_stiffness(double D, double nu);
};

/// Local P2 Lagrange basis on a triangle: nodes 0..2 are the vertices,
/// node 3+k is the midpoint of the edge joining vertices k and k+1.
class P2Basis {
 public:
  P2Basis(const Vec2& a, const Vec2& b, const Vec2& c);
  P2Basis(const Mesh& mesh, int k);

  Vec2 vertex(int i) const { return v_[i]; }
  Vec2 node(int k) const;  // the 6 basis nodes
  double area() const { return area_; }

  /// Affine barycentric coordinates; valid outside the triangle too.
  std::array<double, 3> barycentric(const Vec2& x) const;

  std::array<double, 6> values(const Vec2& x) const;
  std::array<Vec2, 6> gradients(const Vec2& x) const;
  /// Constant per basis function.
  const std::array<Sym2, 6>& hessians() const { return hess_; }

 private:
  std::array<Vec2, 3> v_;
  std::array<Vec2, 3> grad_lambda_;
  std::array<Sym2, 6> hess_;
  double area_ = 0.0;
};

/// A quadratic on one element, stored as values at the 6 P2 nodes.
struct LocalQuadratic {
  int element = -1;
  std::array<double, 6> coeffs{};

  double value(const P2Basis& basis, const Vec2& x) const;
  Vec2 gradient(const P2Basis& basis, const Vec2& x) const;
  Sym2 hessian(const P2Basis& basis) const;
};

struct MomentState {
  Sym2 kappa;  // curvatures (constant for quadratic fields)
  Sym2 sigma;  // moments
};

Sym2 constitutive(const Sym2& kappa, const MaterialParams& m);
MomentState moments(const LocalQuadratic& q, const P2Basis& basis, const MaterialParams& m);

struct EdgeTraces {
  double M_nn = 0.0;
  double M_nt = 0.0;
  double T = 0.0;  // identically zero for quadratic fields
};

EdgeTraces edge_traces(const LocalQuadratic& q, const P2Basis& basis, const Edge& edge,
                       const MaterialParams& m);

/// 6x6 element stiffness (sigma(phi_i), kappa(phi_j))_K; exact, constant integrands.
std::array<std::array<double, 6>, 6> element_stiffness(const P2Basis& basis,
                                                       const MaterialParams& m);

}  // namespace platekit
