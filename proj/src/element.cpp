#include "platekit/element.hpp"

#include <stdexcept>

#include "platekit/errors.hpp"

namespace platekit {

MaterialParams MaterialParams::from_elastic(double E, double nu, double p) {
  if (nu < 0.0 || nu >= 0.5) throw ConfigError("MaterialParams: nu must be in [0, 0.5)");
  MaterialParams m;
  m.E = E;
  m.nu = nu;
  m.p = p;
  m.D = E * p * p * p / (12.0 * (1.0 - nu * nu));
  m.lambda = m.D * nu;
  m.mu = m.D * (1.0 - nu);
  return m;
}

MaterialParams MaterialParams::from_stiffness(double D, double nu) {
  if (nu < 0.0 || nu >= 0.5) throw ConfigError("MaterialParams: nu must be in [0, 0.5)");
  MaterialParams m;
  m.nu = nu;
  m.D = D;
  m.lambda = D * nu;
  m.mu = D * (1.0 - nu);
  return m;
}

P2Basis::P2Basis(const Vec2& a, const Vec2& b, const Vec2& c) : v_{a, b, c} {
  area_ = signed_area(a, b, c);
  if (area_ <= 0.0) throw std::invalid_argument("P2Basis: triangle is not counterclockwise");
  const double inv2A = 1.0 / (2.0 * area_);
  grad_lambda_[0] = perp(c - b) * inv2A;
  grad_lambda_[1] = perp(a - c) * inv2A;
  grad_lambda_[2] = perp(b - a) * inv2A;

  auto outer = [](const Vec2& g, const Vec2& h) {
    return Sym2{g.x * h.x, 0.5 * (g.x * h.y + g.y * h.x), g.y * h.y};
  };
  for (int i = 0; i < 3; ++i) hess_[i] = outer(grad_lambda_[i], grad_lambda_[i]) * 4.0;
  for (int i = 0; i < 3; ++i) {
    int j = (i + 1) % 3;
    hess_[3 + i] = outer(grad_lambda_[i], grad_lambda_[j]) * 8.0;
  }
}

P2Basis::P2Basis(const Mesh& mesh, int k)
    : P2Basis(mesh.vertices[mesh.triangles[k][0]], mesh.vertices[mesh.triangles[k][1]],
              mesh.vertices[mesh.triangles[k][2]]) {}

Vec2 P2Basis::node(int k) const {
  if (k < 3) return v_[k];
  return (v_[k - 3] + v_[(k - 2) % 3]) * 0.5;
}

std::array<double, 3> P2Basis::barycentric(const Vec2& x) const {
  std::array<double, 3> l;
  l[1] = signed_area(v_[0], x, v_[2]) / area_;
  l[2] = signed_area(v_[0], v_[1], x) / area_;
  l[0] = 1.0 - l[1] - l[2];
  return l;
}

std::array<double, 6> P2Basis::values(const Vec2& x) const {
  auto l = barycentric(x);
  std::array<double, 6> out;
  for (int i = 0; i < 3; ++i) out[i] = l[i] * (2.0 * l[i] - 1.0);
  for (int i = 0; i < 3; ++i) out[3 + i] = 4.0 * l[i] * l[(i + 1) % 3];
  return out;
}

std::array<Vec2, 6> P2Basis::gradients(const Vec2& x) const {
  auto l = barycentric(x);
  std::array<Vec2, 6> out;
  for (int i = 0; i < 3; ++i) out[i] = grad_lambda_[i] * (4.0 * l[i] - 1.0);
  for (int i = 0; i < 3; ++i) {
    int j = (i + 1) % 3;
    out[3 + i] = (grad_lambda_[i] * l[j] + grad_lambda_[j] * l[i]) * 4.0;
  }
  return out;
}

double LocalQuadratic::value(const P2Basis& basis, const Vec2& x) const {
  auto phi = basis.values(x);
  double s = 0.0;
  for (int i = 0; i < 6; ++i) s += coeffs[i] * phi[i];
  return s;
}

Vec2 LocalQuadratic::gradient(const P2Basis& basis, const Vec2& x) const {
  auto g = basis.gradients(x);
  Vec2 s;
  for (int i = 0; i < 6; ++i) s += g[i] * coeffs[i];
  return s;
}

Sym2 LocalQuadratic::hessian(const P2Basis& basis) const {
  const auto& h = basis.hessians();
  Sym2 s;
  for (int i = 0; i < 6; ++i) s = s + h[i] * coeffs[i];
  return s;
}

Sym2 constitutive(const Sym2& kappa, const MaterialParams& m) {
  const double lt = m.lambda * kappa.trace();
  return {lt + m.mu * kappa.a11, m.mu * kappa.a12, lt + m.mu * kappa.a22};
}

MomentState moments(const LocalQuadratic& q, const P2Basis& basis, const MaterialParams& m) {
  MomentState s;
  s.kappa = q.hessian(basis);
  s.sigma = constitutive(s.kappa, m);
  return s;
}

EdgeTraces edge_traces(const LocalQuadratic& q, const P2Basis& basis, const Edge& edge,
                       const MaterialParams& m) {
  Sym2 sigma = constitutive(q.hessian(basis), m);
  EdgeTraces t;
  t.M_nn = quad_form(sigma, edge.normal, edge.normal);
  t.M_nt = quad_form(sigma, edge.normal, edge.tangent);
  t.T = 0.0;  // third derivatives of a quadratic vanish, and M_nt is constant on E
  return t;
}

std::array<std::array<double, 6>, 6> element_stiffness(const P2Basis& basis,
                                                       const MaterialParams& m) {
  const auto& h = basis.hessians();
  std::array<std::array<double, 6>, 6> a{};
  for (int i = 0; i < 6; ++i) {
    Sym2 sigma_i = constitutive(h[i], m);
    for (int j = 0; j < 6; ++j) a[i][j] = basis.area() * contract(sigma_i, h[j]);
  }
  return a;
}

}  // namespace platekit
