#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "platekit/errors.hpp"
#include "platekit/mesh.hpp"

using namespace platekit;

namespace {

double mesh_area(const Mesh& m) {
  double a = 0.0;
  for (int k = 0; k < m.n_triangles(); ++k) a += m.area(k);
  return a;
}

double min_angle(const Mesh& m) {
  double worst = 360.0;
  for (const auto& t : m.triangles) {
    for (int i = 0; i < 3; ++i) {
      Vec2 u = m.vertices[t[(i + 1) % 3]] - m.vertices[t[i]];
      Vec2 v = m.vertices[t[(i + 2) % 3]] - m.vertices[t[i]];
      double c = dot(u, v) / (norm(u) * norm(v));
      worst = std::min(worst, std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / M_PI);
    }
  }
  return worst;
}

std::string mesh_text(const Mesh& m) {
  std::ostringstream ss;
  write_mesh(m, ss);
  return ss.str();
}

}  // namespace

TEST_CASE("structured mesh counts") {
  Mesh m1 = build_structured_mesh(1);
  CHECK(m1.n_triangles() == 2);
  CHECK(m1.n_vertices() == 4);
  CHECK(m1.n_edges() == 5);

  Mesh m2 = build_structured_mesh(2);
  CHECK(m2.n_triangles() == 8);
  CHECK(m2.n_vertices() == 9);
}

TEST_CASE("structured mesh satisfies the interior midpoint criterion") {
  Mesh m = build_structured_mesh(4);
  for (int e = 0; e < m.n_edges(); ++e) {
    const Edge& edge = m.edges[e];
    if (edge.is_boundary()) continue;
    Vec2 mid = m.edge_midpoint(e);
    int b = m.triangles[edge.owners[0]][m.opposite_vertex(edge.owners[0], e)];
    int d = m.triangles[edge.owners[1]][m.opposite_vertex(edge.owners[1], e)];
    Vec2 other_mid = (m.vertices[b] + m.vertices[d]) * 0.5;
    CHECK(norm(mid - other_mid) <= 1e-14);
  }
}

TEST_CASE("structured mesh size parameters") {
  Mesh m = build_structured_mesh(4);
  CHECK(m.h == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-14));
  CHECK(m.quasi_uniformity_ratio == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("triangle areas sum to the domain area") {
  for (const Mesh& m : {build_structured_mesh(3), build_unstructured_mesh(8, 42, 0.2),
                        build_degenerate_demo_mesh(true), build_degenerate_demo_mesh(false)}) {
    CHECK(mesh_area(m) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_NOTHROW(validate_mesh(m, 1.0));
  }
}

TEST_CASE("unstructured mesh quality") {
  Mesh m = build_unstructured_mesh(8, 42, 0.2);
  for (int k = 0; k < m.n_triangles(); ++k) CHECK(m.area(k) > 0.0);
  CHECK(min_angle(m) >= 15.0);
}

TEST_CASE("unstructured mesh is deterministic") {
  Mesh a = build_unstructured_mesh(6, 7, 0.2);
  Mesh b = build_unstructured_mesh(6, 7, 0.2);
  CHECK(mesh_text(a) == mesh_text(b));
  Mesh c = build_unstructured_mesh(6, 8, 0.2);
  CHECK(mesh_text(a) != mesh_text(c));
}

TEST_CASE("zero jitter reduces to the structured mesh") {
  Mesh a = build_unstructured_mesh(4, 3, 0.0);
  Mesh b = build_structured_mesh(4);
  CHECK(mesh_text(a) == mesh_text(b));
}

TEST_CASE("builder precondition errors") {
  CHECK_THROWS_AS(build_structured_mesh(0), ConfigError);
  CHECK_THROWS_AS(build_unstructured_mesh(4, 1, 0.5), ConfigError);
  CHECK_THROWS_AS(build_unstructured_mesh(0, 1, 0.1), ConfigError);
}

TEST_CASE("boundary tagging marks constrained vertices") {
  Mesh m = build_structured_mesh(4);

  tag_boundary(m, BcLayout::all_simply_supported());
  for (int e = 0; e < m.n_edges(); ++e) {
    const Edge& edge = m.edges[e];
    if (!edge.is_boundary()) continue;
    CHECK(edge.tag == BoundaryTag::SimplySupported);
    CHECK(m.vertex_constrained[edge.v[0]]);
    CHECK(m.vertex_constrained[edge.v[1]]);
  }

  tag_boundary(m, BcLayout::mixed_sscf());
  // Interior vertices of the free side (y = 1) stay unconstrained.
  int free_side_unconstrained = 0;
  for (int i = 0; i < m.n_vertices(); ++i) {
    const Vec2 p = m.vertices[i];
    if (std::abs(p.y - 1.0) < 1e-12 && p.x > 1e-12 && p.x < 1.0 - 1e-12) {
      CHECK(!m.vertex_constrained[i]);
      ++free_side_unconstrained;
    }
  }
  CHECK(free_side_unconstrained == 3);

  tag_boundary(m, BcLayout::all_free());
  for (int i = 0; i < m.n_vertices(); ++i) CHECK(!m.vertex_constrained[i]);
}

TEST_CASE("ghost vertices are point reflections") {
  std::istringstream one_triangle(
      "platemesh 1\nvertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 2\nboundary 3\n0 1 S\n1 2 S\n2 0 "
      "S\n");
  Mesh m = read_mesh(one_triangle);
  REQUIRE(m.n_ghosts() == 3);
  for (const auto& g : m.ghosts) {
    const Edge& e = m.edges[g.boundary_edge];
    if ((e.v[0] == 0 && e.v[1] == 1) || (e.v[0] == 1 && e.v[1] == 0)) {
      CHECK(g.ghost_vertex.x == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(g.ghost_vertex.y == doctest::Approx(-1.0).epsilon(1e-15));
    }
  }

  Mesh s = build_structured_mesh(2);
  CHECK(s.n_ghosts() == 8);  // one per boundary edge
  for (int e = 0; e < s.n_edges(); ++e)
    CHECK((s.edges[e].is_boundary() ? s.edge_ghost[e] >= 0 : s.edge_ghost[e] < 0));
  // ghost dofs appended after the vertex dofs, ordered by edge
  for (int g = 0; g < s.n_ghosts(); ++g) CHECK(s.ghosts[g].ghost_dof == s.n_vertices() + g);
}

TEST_CASE("edge geometry invariants") {
  for (const Mesh& m : {build_structured_mesh(3), build_unstructured_mesh(6, 5, 0.2)}) {
    for (int e = 0; e < m.n_edges(); ++e) {
      const Edge& edge = m.edges[e];
      CHECK(norm(edge.normal) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(std::abs(dot(edge.normal, edge.tangent)) <= 1e-14);
      // t = (n2, -n1)
      CHECK(edge.tangent.x == doctest::Approx(edge.normal.y).epsilon(1e-14));
      CHECK(edge.tangent.y == doctest::Approx(-edge.normal.x).epsilon(1e-14));
      // owners[0] lies on the side the normal points away from
      Vec2 mid = m.edge_midpoint(e);
      CHECK(dot(edge.normal, m.centroid(edge.owners[0]) - mid) < 0.0);
      if (!edge.is_boundary()) CHECK(dot(edge.normal, m.centroid(edge.owners[1]) - mid) > 0.0);
      // dn: +1 where the tangent points outward
      Vec2 p0 = m.vertices[edge.v[0]], p1 = m.vertices[edge.v[1]];
      if (dot(edge.tangent, p1 - p0) > 0.0) {
        CHECK(edge.dn[0] == -1);
        CHECK(edge.dn[1] == +1);
      } else {
        CHECK(edge.dn[0] == +1);
        CHECK(edge.dn[1] == -1);
      }
    }
  }
}

TEST_CASE("mesh io round trip") {
  Mesh m = build_unstructured_mesh(5, 11, 0.15);
  tag_boundary(m, BcLayout::mixed_sscf());
  std::string text = mesh_text(m);
  std::istringstream in(text);
  Mesh back = read_mesh(in);
  CHECK(mesh_text(back) == text);
  CHECK(back.h == doctest::Approx(m.h).epsilon(1e-15));
}

TEST_CASE("mesh io rejects duplicated triangles") {
  std::istringstream bad(
      "platemesh 1\nvertices 4\n0 0\n1 0\n1 1\n0 1\ntriangles 3\n0 1 3\n1 2 3\n3 1 2\nboundary 4\n"
      "0 1 S\n1 2 S\n2 3 S\n3 0 S\n");
  CHECK_THROWS_AS(read_mesh(bad), ParseError);
}

TEST_CASE("mesh io reorients clockwise triangles with a warning") {
  std::istringstream cw(
      "platemesh 1\nvertices 4\n0 0\n1 0\n1 1\n0 1\ntriangles 2\n0 3 1\n1 2 3\nboundary 4\n"
      "0 1 S\n1 2 S\n2 3 S\n3 0 S\n");
  std::vector<std::string> warnings;
  Mesh m = read_mesh(cw, &warnings);
  CHECK(warnings.size() == 1);
  for (int k = 0; k < m.n_triangles(); ++k) CHECK(m.area(k) > 0.0);
}

TEST_CASE("mesh io parse errors carry line numbers") {
  std::istringstream bad("platemesh 1\nvertices 2\n0 0\nnot-a-number 1\n");
  try {
    read_mesh(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& ex) {
    CHECK(std::string(ex.what()).find("line 4") != std::string::npos);
  }

  std::istringstream gap(
      "platemesh 1\nvertices 4\n0 0\n1 0\n1 1\n0 1\ntriangles 2\n0 1 3\n1 2 3\nboundary 3\n"
      "0 1 S\n1 2 S\n2 3 S\n");
  CHECK_THROWS_AS(read_mesh(gap), ParseError);
}

TEST_CASE("degenerate demo meshes are valid") {
  Mesh d = build_degenerate_demo_mesh(true);
  Mesh f = build_degenerate_demo_mesh(false);
  CHECK(d.n_vertices() == f.n_vertices());
  CHECK(d.n_triangles() == f.n_triangles());
  CHECK(d.h == doctest::Approx(f.h));
}
