#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace platekit {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }
/// Rotate by +90 degrees.
inline Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }

/// Symmetric 2x2 tensor (curvatures, moments, Hessians of scalar fields).
struct Sym2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  double trace() const { return a11 + a22; }

  Sym2 operator+(const Sym2& o) const { return {a11 + o.a11, a12 + o.a12, a22 + o.a22}; }
  Sym2 operator-(const Sym2& o) const { return {a11 - o.a11, a12 - o.a12, a22 - o.a22}; }
  Sym2 operator*(double s) const { return {a11 * s, a12 * s, a22 * s}; }
};

/// Full double contraction A : B.
inline double contract(const Sym2& a, const Sym2& b) {
  return a.a11 * b.a11 + 2.0 * a.a12 * b.a12 + a.a22 * b.a22;
}

/// Bilinear form n . A m.
inline double quad_form(const Sym2& a, const Vec2& n, const Vec2& m) {
  return a.a11 * n.x * m.x + a.a12 * (n.x * m.y + n.y * m.x) + a.a22 * n.y * m.y;
}

inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross(b - a, c - a);
}

inline double triangle_diameter(const Vec2& a, const Vec2& b, const Vec2& c) {
  return std::max({norm(b - a), norm(c - b), norm(a - c)});
}

}  // namespace platekit
