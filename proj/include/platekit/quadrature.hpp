#pragma once

#include <vector>

namespace platekit {

/// Symmetric quadrature rule on a triangle in barycentric coordinates.
/// Weights sum to 1; multiply by the element area.
struct TriangleRule {
  struct Point {
    double l0, l1, l2;
    double w;
  };
  int degree = 0;  // highest polynomial degree integrated exactly
  std::vector<Point> points;
};

/// Gauss rule on the unit interval [0,1]. Weights sum to 1; multiply by edge length.
struct EdgeRule {
  struct Point {
    double t;
    double w;
  };
  int n_points = 0;
  std::vector<Point> points;
};

/// Smallest symmetric rule exact to the requested degree. Supports degree <= 6.
const TriangleRule& triangle_rule(int degree);

/// Gauss rule with ceil((degree+1)/2) points, exact to the requested degree.
EdgeRule edge_rule(int degree);

}  // namespace platekit
