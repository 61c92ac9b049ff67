#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "platekit/element.hpp"
#include "platekit/errors.hpp"
#include "platekit/reconstruction.hpp"

using namespace platekit;

namespace {

Eigen::VectorXd sample_at_nodes(const Patch& patch, const std::function<double(Vec2)>& f) {
  Eigen::VectorXd v(patch.n_nodes());
  for (int i = 0; i < patch.n_nodes(); ++i) v(i) = f(patch.nodes[i].pos);
  return v;
}

LocalQuadratic apply(const ReconstructionMap& map, const Eigen::VectorXd& values) {
  Eigen::VectorXd c = map.matrix * values;
  LocalQuadratic q;
  q.element = map.element;
  for (int i = 0; i < 6; ++i) q.coeffs[i] = c(i);
  return q;
}

int find_interior_element(const Mesh& m) {
  for (int k = 0; k < m.n_triangles(); ++k) {
    bool interior = true;
    for (int le = 0; le < 3; ++le)
      if (m.edges[m.tri_edges[k][le]].is_boundary()) interior = false;
    if (interior) return k;
  }
  return -1;
}

}  // namespace

TEST_CASE("morley reconstruction averages the neighbor gradients") {
  Mesh m = build_unstructured_mesh(5, 17, 0.2);
  int k = find_interior_element(m);
  REQUIRE(k >= 0);
  Patch patch = standard_patch(m, k);
  ReconstructionMap map = morley_map(m, patch);

  std::mt19937_64 rng(31);
  Eigen::VectorXd v(patch.n_nodes());
  for (int i = 0; i < patch.n_nodes(); ++i) v(i) = ((rng() >> 11) * 0x1.0p-53) * 2 - 1;
  LocalQuadratic q = apply(map, v);
  P2Basis basis(m, k);

  auto value_at = [&](int dof) { return v(patch.node_column(dof)); };
  for (int le = 0; le < 3; ++le) {
    const int e = m.tri_edges[k][le];
    const Edge& edge = m.edges[e];
    const int nb = m.neighbor(k, e);
    REQUIRE(nb >= 0);

    // constant gradients of the two linear pieces, by hand
    auto linear_gradient = [&](int tri) {
      const auto& t = m.triangles[tri];
      Vec2 a = m.vertices[t[0]], b = m.vertices[t[1]], c = m.vertices[t[2]];
      double inv2A = 1.0 / (2.0 * signed_area(a, b, c));
      return (perp(c - b) * value_at(t[0]) + perp(a - c) * value_at(t[1]) +
              perp(b - a) * value_at(t[2])) *
             inv2A;
    };
    Vec2 avg = (linear_gradient(k) + linear_gradient(nb)) * 0.5;
    double expected = dot(avg, edge.normal);
    double got = dot(q.gradient(basis, m.edge_midpoint(e)), edge.normal);
    CHECK(got == doctest::Approx(expected).epsilon(1e-11));
  }
}

TEST_CASE("morley reconstruction reproduces global linears") {
  Mesh m = build_unstructured_mesh(4, 3, 0.2);
  auto lin = [](Vec2 p) { return 0.7 + 1.3 * p.x - 2.1 * p.y; };
  for (int k = 0; k < m.n_triangles(); ++k) {
    Patch patch = standard_patch(m, k);
    ReconstructionMap map = morley_map(m, patch);
    LocalQuadratic q = apply(map, sample_at_nodes(patch, lin));
    P2Basis basis(m, k);
    for (int i = 0; i < 6; ++i)
      CHECK(q.coeffs[i] == doctest::Approx(lin(basis.node(i))).epsilon(1e-12));
  }
}

TEST_CASE("morley equals full quadratic on structured meshes") {
  Mesh m = build_structured_mesh(4);
  auto xsq = [](Vec2 p) { return p.x * p.x; };
  for (int k = 0; k < m.n_triangles(); ++k) {
    Patch patch = standard_patch(m, k);
    ReconstructionMap mor = morley_map(m, patch);
    ReconstructionMap fq = full_quadratic_map(m, patch);
    CHECK((mor.matrix - fq.matrix).cwiseAbs().maxCoeff() <= 1e-12);

    // sampling x^2 reproduces x^2 on K (independent oracle: direct evaluation)
    LocalQuadratic q = apply(mor, sample_at_nodes(patch, xsq));
    P2Basis basis(m, k);
    for (int i = 0; i < 6; ++i)
      CHECK(q.coeffs[i] == doctest::Approx(xsq(basis.node(i))).epsilon(1e-12));
  }
}

TEST_CASE("full quadratic reconstruction interpolates quadratics") {
  Mesh m = build_unstructured_mesh(5, 21, 0.2);
  auto quad = [](Vec2 p) { return p.x * p.y; };
  for (int k = 0; k < m.n_triangles(); ++k) {
    Patch patch = standard_patch(m, k);
    ReconstructionMap map = full_quadratic_map(m, patch);
    LocalQuadratic q = apply(map, sample_at_nodes(patch, quad));
    P2Basis basis(m, k);
    for (int i = 0; i < 6; ++i)
      CHECK(q.coeffs[i] == doctest::Approx(quad(basis.node(i))).epsilon(1e-12));
  }

  // constants are quadratics
  Patch patch = standard_patch(m, 0);
  ReconstructionMap map = full_quadratic_map(m, patch);
  LocalQuadratic q = apply(map, sample_at_nodes(patch, [](Vec2) { return 1.0; }));
  for (int i = 0; i < 6; ++i) CHECK(q.coeffs[i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("full quadratic rejects degenerate patches") {
  Mesh m = build_degenerate_demo_mesh(true);
  Patch patch = standard_patch(m, 0);
  CHECK_THROWS_AS(full_quadratic_map(m, patch), DegeneratePatchError);
}

TEST_CASE("least squares equals full quadratic on standard patches") {
  Mesh m = build_unstructured_mesh(5, 23, 0.2);
  for (int k = 0; k < m.n_triangles(); ++k) {
    Patch patch = standard_patch(m, k);
    ReconstructionMap ls = least_squares_map(m, patch);
    ReconstructionMap fq = full_quadratic_map(m, patch);
    CHECK((ls.matrix - fq.matrix).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("least squares is exact on consistent extended patches") {
  Mesh m = build_degenerate_demo_mesh(true);
  Patch patch = extend_patch(m, standard_patch(m, 0));
  REQUIRE(patch.vandermonde_rank == 6);
  // grow to a seven-node overdetermined patch with consistent data
  for (int i = 0; i < m.n_vertices() && patch.n_nodes() < 7; ++i)
    if (patch.node_column(i) < 0) patch.nodes.push_back({i, m.vertices[i]});
  REQUIRE(patch.n_nodes() == 7);
  ReconstructionMap map = least_squares_map(m, patch);
  auto quad = [](Vec2 p) { return p.x * p.x + p.y; };
  LocalQuadratic q = apply(map, sample_at_nodes(patch, quad));
  P2Basis basis(m, 0);
  for (int i = 0; i < 6; ++i)
    CHECK(q.coeffs[i] == doctest::Approx(quad(basis.node(i))).epsilon(1e-11));
}

TEST_CASE("least squares rejects rank-deficient patches") {
  Mesh m = build_degenerate_demo_mesh(true);
  Patch patch = standard_patch(m, 0);  // not extended
  CHECK_THROWS_AS(least_squares_map(m, patch), DegeneratePatchError);
}

TEST_CASE("reproduction identity") {
  Mesh m = build_unstructured_mesh(6, 29, 0.2);
  double worst_fq = 0.0, worst_ls = 0.0, worst_morley = 0.0;
  for (int k = 0; k < m.n_triangles(); ++k) {
    Patch patch = standard_patch(m, k);
    worst_fq = std::max(worst_fq, verify_reproduction(m, full_quadratic_map(m, patch), patch));
    worst_ls = std::max(worst_ls, verify_reproduction(m, least_squares_map(m, patch), patch));
    worst_morley = std::max(worst_morley, verify_reproduction(m, morley_map(m, patch), patch));
  }
  CHECK(worst_fq <= 1e-10);
  CHECK(worst_ls <= 1e-10);
  // the Morley reconstruction fails the identity on unstructured meshes
  CHECK(worst_morley > 1e-3);
}

TEST_CASE("nodal match at the center vertices") {
  Mesh m = build_unstructured_mesh(4, 31, 0.2);
  std::mt19937_64 rng(5);
  for (int k = 0; k < m.n_triangles(); ++k) {
    Patch patch = standard_patch(m, k);
    for (auto kind : {ReconKind::Morley, ReconKind::FullQuadratic, ReconKind::LeastSquares}) {
      ReconstructionMap map = kind == ReconKind::Morley ? morley_map(m, patch)
                              : kind == ReconKind::FullQuadratic
                                  ? full_quadratic_map(m, patch)
                                  : least_squares_map(m, patch);
      Eigen::VectorXd v(patch.n_nodes());
      for (int i = 0; i < patch.n_nodes(); ++i) v(i) = ((rng() >> 11) * 0x1.0p-53) * 2 - 1;
      LocalQuadratic q = apply(map, v);
      for (int i = 0; i < 3; ++i) CHECK(q.coeffs[i] == doctest::Approx(v(i)).epsilon(1e-13));
    }
  }
}

TEST_CASE("maps are linear operators") {
  Mesh m = build_unstructured_mesh(4, 37, 0.2);
  Patch patch = standard_patch(m, find_interior_element(m));
  ReconstructionMap map = full_quadratic_map(m, patch);
  std::mt19937_64 rng(13);
  auto rnd = [&rng]() { return ((rng() >> 11) * 0x1.0p-53) * 2 - 1; };
  Eigen::VectorXd u(patch.n_nodes()), v(patch.n_nodes());
  for (int i = 0; i < patch.n_nodes(); ++i) {
    u(i) = rnd();
    v(i) = rnd();
  }
  const double a = 1.7, b = -0.4;
  Eigen::VectorXd lhs = map.matrix * (a * u + b * v);
  Eigen::VectorXd rhs = a * (map.matrix * u) + b * (map.matrix * v);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("reconstruction is invariant under similarity transforms") {
  Mesh base = build_unstructured_mesh(4, 41, 0.2);
  for (double scale : {1e-3, 1.0, 1e3}) {
    Mesh moved = base;
    const double c = std::cos(0.83), s = std::sin(0.83);
    for (auto& v : moved.vertices) {
      Vec2 r{c * v.x - s * v.y, s * v.x + c * v.y};
      v = r * scale + Vec2{11.0, -4.0};
    }
    std::ostringstream ss;
    write_mesh(moved, ss);
    std::istringstream in(ss.str());
    Mesh reread = read_mesh(in);
    for (int k = 0; k < reread.n_triangles(); ++k) {
      Patch patch = standard_patch(reread, k);
      CHECK(verify_reproduction(reread, full_quadratic_map(reread, patch), patch) <= 1e-10);
      CHECK(verify_reproduction(reread, least_squares_map(reread, patch), patch) <= 1e-10);
    }
  }
}

TEST_CASE("bpt maps carry no ghost columns") {
  Mesh m = build_structured_mesh(3);
  ReconstructionSet set = build_reconstruction_maps(m, ReconKind::Morley, /*include_ghosts=*/false);
  for (const auto& map : set.maps)
    for (int dof : map.dofs) CHECK(dof < m.n_vertices());
}

TEST_CASE("reproduction diagnostics CSV") {
  Mesh m = build_structured_mesh(2);
  ReconstructionSet set = build_reconstruction_maps(m, ReconKind::FullQuadratic);
  const char* path = "recon_diag_test.csv";
  write_reproduction_diagnostics(m, set, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "element,kind,reproduction_residual");
  std::remove(path);
}
