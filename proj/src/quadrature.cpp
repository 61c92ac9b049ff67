#include "platekit/quadrature.hpp"

#include <array>
#include <stdexcept>

namespace platekit {

namespace {

TriangleRule make_centroid_rule() {
  TriangleRule r;
  r.degree = 1;
  r.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0}};
  return r;
}

TriangleRule make_degree2_rule() {
  TriangleRule r;
  r.degree = 2;
  const double a = 1.0 / 6.0, b = 2.0 / 3.0, w = 1.0 / 3.0;
  r.points = {{b, a, a, w}, {a, b, a, w}, {a, a, b, w}};
  return r;
}

void push_orbit3(TriangleRule& r, double a, double b, double w) {
  r.points.push_back({a, b, b, w});
  r.points.push_back({b, a, b, w});
  r.points.push_back({b, b, a, w});
}

void push_orbit6(TriangleRule& r, double a, double b, double c, double w) {
  r.points.push_back({a, b, c, w});
  r.points.push_back({a, c, b, w});
  r.points.push_back({b, a, c, w});
  r.points.push_back({b, c, a, w});
  r.points.push_back({c, a, b, w});
  r.points.push_back({c, b, a, w});
}

// Dunavant degree-4 rule, 6 points.
TriangleRule make_degree4_rule() {
  TriangleRule r;
  r.degree = 4;
  push_orbit3(r, 0.108103018168070, 0.445948490915965, 0.223381589678011);
  push_orbit3(r, 0.816847572980459, 0.091576213509771, 0.109951743655322);
  return r;
}

// Dunavant degree-5 rule, 7 points.
TriangleRule make_degree5_rule() {
  TriangleRule r;
  r.degree = 5;
  r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225});
  push_orbit3(r, 0.059715871789770, 0.470142064105115, 0.132394152788506);
  push_orbit3(r, 0.797426985353087, 0.101286507323456, 0.125939180544827);
  return r;
}

// Dunavant degree-6 rule, 12 points.
TriangleRule make_degree6_rule() {
  TriangleRule r;
  r.degree = 6;
  push_orbit3(r, 0.501426509658179, 0.249286745170910, 0.116786275726379);
  push_orbit3(r, 0.873821971016996, 0.063089014491502, 0.050844906370207);
  push_orbit6(r, 0.053145049844817, 0.310352451033784, 0.636502499121399,
              0.082851075618374);
  return r;
}

}  // namespace

const TriangleRule& triangle_rule(int degree) {
  static const TriangleRule d1 = make_centroid_rule();
  static const TriangleRule d2 = make_degree2_rule();
  static const TriangleRule d4 = make_degree4_rule();
  static const TriangleRule d5 = make_degree5_rule();
  static const TriangleRule d6 = make_degree6_rule();
  if (degree <= 1) return d1;
  if (degree == 2) return d2;
  if (degree <= 4) return d4;
  if (degree == 5) return d5;
  if (degree == 6) return d6;
  throw std::invalid_argument("triangle_rule: unsupported degree " + std::to_string(degree));
}

EdgeRule edge_rule(int degree) {
  if (degree < 0) degree = 0;
  const int n = (degree + 2) / 2;  // ceil((degree+1)/2)
  // Gauss-Legendre abscissae/weights on [-1,1].
  std::vector<std::array<double, 2>> gl;
  switch (n) {
    case 1:
      gl = {{0.0, 2.0}};
      break;
    case 2:
      gl = {{-0.5773502691896257, 1.0}, {0.5773502691896257, 1.0}};
      break;
    case 3:
      gl = {{-0.7745966692414834, 5.0 / 9.0},
            {0.0, 8.0 / 9.0},
            {0.7745966692414834, 5.0 / 9.0}};
      break;
    case 4:
      gl = {{-0.8611363115940526, 0.3478548451374538},
            {-0.3399810435848563, 0.6521451548625461},
            {0.3399810435848563, 0.6521451548625461},
            {0.8611363115940526, 0.3478548451374538}};
      break;
    case 5:
      gl = {{-0.9061798459386640, 0.2369268850561891},
            {-0.5384693101056831, 0.4786286704993665},
            {0.0, 0.5688888888888889},
            {0.5384693101056831, 0.4786286704993665},
            {0.9061798459386640, 0.2369268850561891}};
      break;
    case 6:
      gl = {{-0.9324695142031521, 0.1713244923791704},
            {-0.6612093864662645, 0.3607615730481386},
            {-0.2386191860831969, 0.4679139345726910},
            {0.2386191860831969, 0.4679139345726910},
            {0.6612093864662645, 0.3607615730481386},
            {0.9324695142031521, 0.1713244923791704}};
      break;
    default:
      throw std::invalid_argument("edge_rule: unsupported degree " + std::to_string(degree));
  }
  EdgeRule r;
  r.n_points = n;
  for (const auto& [xi, w] : gl) r.points.push_back({0.5 * (xi + 1.0), 0.5 * w});
  return r;
}

}  // namespace platekit
