#include "platekit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "platekit/errors.hpp"

namespace platekit {

char tag_letter(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::Clamped:
      return 'C';
    case BoundaryTag::SimplySupported:
      return 'S';
    case BoundaryTag::Free:
      return 'F';
    default:
      return 'I';
  }
}

BoundaryTag tag_from_letter(char c) {
  switch (c) {
    case 'C':
      return BoundaryTag::Clamped;
    case 'S':
      return BoundaryTag::SimplySupported;
    case 'F':
      return BoundaryTag::Free;
    default:
      throw ParseError(std::string("unknown boundary tag '") + c + "'");
  }
}

Vec2 Mesh::centroid(int k) const {
  const auto& t = triangles[k];
  return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
}

double Mesh::area(int k) const {
  const auto& t = triangles[k];
  return signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
}

double Mesh::diameter(int k) const {
  const auto& t = triangles[k];
  return triangle_diameter(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
}

Vec2 Mesh::edge_midpoint(int e) const {
  return (vertices[edges[e].v[0]] + vertices[edges[e].v[1]]) * 0.5;
}

double Mesh::edge_length(int e) const {
  return norm(vertices[edges[e].v[1]] - vertices[edges[e].v[0]]);
}

int Mesh::opposite_vertex(int k, int e) const {
  const auto& t = triangles[k];
  const auto& ev = edges[e].v;
  for (int i = 0; i < 3; ++i)
    if (t[i] != ev[0] && t[i] != ev[1]) return i;
  throw std::logic_error("opposite_vertex: edge not part of triangle");
}

int Mesh::neighbor(int k, int e) const {
  const auto& o = edges[e].owners;
  if (o[0] == k) return o[1];
  if (o[1] == k) return o[0];
  throw std::logic_error("neighbor: triangle does not own edge");
}

namespace {

void build_edges(Mesh& mesh) {
  mesh.edges.clear();
  mesh.tri_edges.assign(mesh.triangles.size(), {-1, -1, -1});
  std::map<std::pair<int, int>, int> index;
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const auto& t = mesh.triangles[k];
    for (int le = 0; le < 3; ++le) {
      int a = t[le], b = t[(le + 1) % 3];
      auto key = std::minmax(a, b);
      auto it = index.find(key);
      int e;
      if (it == index.end()) {
        e = mesh.n_edges();
        index.emplace(key, e);
        Edge edge;
        edge.v = {key.first, key.second};
        mesh.edges.push_back(edge);
      } else {
        e = it->second;
      }
      mesh.tri_edges[k][le] = e;
      auto& owners = mesh.edges[e].owners;
      if (owners[0] < 0)
        owners[0] = k;
      else if (owners[1] < 0)
        owners[1] = k;
      else
        throw ParseError("edge shared by more than two triangles");
    }
  }

  for (auto& e : mesh.edges) {
    Vec2 p0 = mesh.vertices[e.v[0]], p1 = mesh.vertices[e.v[1]];
    Vec2 t = (p1 - p0) / norm(p1 - p0);
    Vec2 n{-t.y, t.x};  // so that t = (n2, -n1)
    // owners[0] must lie on the side n points away from.
    auto side = [&](int k) {
      int lv = -1;
      const auto& tri = mesh.triangles[k];
      for (int i = 0; i < 3; ++i)
        if (tri[i] != e.v[0] && tri[i] != e.v[1]) lv = i;
      return dot(mesh.vertices[tri[lv]] - p0, n);
    };
    if (e.is_boundary()) {
      if (side(e.owners[0]) > 0) {
        n = n * -1.0;
        t = t * -1.0;
      }
    } else {
      double s0 = side(e.owners[0]);
      double s1 = side(e.owners[1]);
      if (s0 * s1 >= 0) throw std::logic_error("edge owners on the same side");
      if (s0 > 0) std::swap(e.owners[0], e.owners[1]);
    }
    e.normal = n;
    e.tangent = t;
    e.dn = dot(t, p1 - p0) > 0 ? std::array<int, 2>{-1, +1} : std::array<int, 2>{+1, -1};
  }
}

void compute_size_parameters(Mesh& mesh) {
  double hmax = 0.0;
  for (int k = 0; k < mesh.n_triangles(); ++k) hmax = std::max(hmax, mesh.diameter(k));
  mesh.h = hmax;
  double emin = std::numeric_limits<double>::max(), emax = 0.0;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    double l = mesh.edge_length(e);
    emin = std::min(emin, l);
    emax = std::max(emax, l);
  }
  mesh.quasi_uniformity_ratio = emax / emin;
}

void mark_constrained_vertices(Mesh& mesh) {
  mesh.vertex_constrained.assign(mesh.vertices.size(), false);
  for (const auto& e : mesh.edges) {
    if (e.tag == BoundaryTag::Clamped || e.tag == BoundaryTag::SimplySupported) {
      mesh.vertex_constrained[e.v[0]] = true;
      mesh.vertex_constrained[e.v[1]] = true;
    }
  }
}

void finalize(Mesh& mesh, const BcLayout& layout) {
  build_edges(mesh);
  compute_size_parameters(mesh);
  tag_boundary(mesh, layout);
  add_ghosts(mesh);
}

double min_angle_deg(const Mesh& mesh) {
  double worst = 180.0;
  for (const auto& t : mesh.triangles) {
    for (int i = 0; i < 3; ++i) {
      Vec2 a = mesh.vertices[t[i]];
      Vec2 u = mesh.vertices[t[(i + 1) % 3]] - a;
      Vec2 v = mesh.vertices[t[(i + 2) % 3]] - a;
      double c = dot(u, v) / (norm(u) * norm(v));
      c = std::clamp(c, -1.0, 1.0);
      worst = std::min(worst, std::acos(c) * 180.0 / M_PI);
    }
  }
  return worst;
}

// --- Bowyer-Watson Delaunay ------------------------------------------------

struct DelaunayTriangulation {
  const std::vector<Vec2>& pts;
  std::vector<std::array<int, 3>> tris;
  std::vector<char> dead;

  explicit DelaunayTriangulation(const std::vector<Vec2>& points) : pts(points) {}

  static bool in_circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
    // (a,b,c) counterclockwise; strictly inside iff det > 0.
    double ax = a.x - p.x, ay = a.y - p.y;
    double bx = b.x - p.x, by = b.y - p.y;
    double cx = c.x - p.x, cy = c.y - p.y;
    double a2 = ax * ax + ay * ay, b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
    double det = ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);
    return det > 0.0;
  }

  void insert(int ip) {
    const Vec2 p = pts[ip];
    std::vector<int> cavity;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (dead[t]) continue;
      const auto& tr = tris[t];
      if (in_circumcircle(pts[tr[0]], pts[tr[1]], pts[tr[2]], p)) cavity.push_back(t);
    }
    if (cavity.empty()) throw std::logic_error("delaunay: empty cavity");

    // Cavity boundary = oriented edges appearing exactly once.
    std::map<std::pair<int, int>, std::pair<int, int>> once;  // key -> oriented edge
    for (int t : cavity) {
      dead[t] = 1;
      const auto& tr = tris[t];
      for (int le = 0; le < 3; ++le) {
        int a = tr[le], b = tr[(le + 1) % 3];
        auto key = std::minmax(a, b);
        auto it = once.find(key);
        if (it == once.end())
          once.emplace(key, std::make_pair(a, b));
        else
          once.erase(it);
      }
    }
    for (const auto& [key, e] : once) {
      std::array<int, 3> nt{e.first, e.second, ip};
      if (signed_area(pts[nt[0]], pts[nt[1]], pts[nt[2]]) <= 0.0) std::swap(nt[0], nt[1]);
      tris.push_back(nt);
      dead.push_back(0);
    }
  }

  void compact() {
    std::vector<std::array<int, 3>> alive;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t)
      if (!dead[t]) alive.push_back(tris[t]);
    tris = std::move(alive);
    dead.assign(tris.size(), 0);
  }
};

std::vector<std::array<int, 3>> delaunay_triangulate(const std::vector<Vec2>& points) {
  const int n = static_cast<int>(points.size());
  std::vector<Vec2> pts = points;
  pts.push_back({-50.0, -50.0});
  pts.push_back({51.0, -50.0});
  pts.push_back({0.5, 101.0});

  DelaunayTriangulation dt(pts);
  dt.tris.push_back({n, n + 1, n + 2});
  dt.dead.push_back(0);
  for (int i = 0; i < n; ++i) {
    dt.insert(i);
    if (dt.tris.size() > 4 * static_cast<std::size_t>(std::max(64, i))) dt.compact();
  }
  dt.compact();

  std::vector<std::array<int, 3>> result;
  for (const auto& t : dt.tris)
    if (t[0] < n && t[1] < n && t[2] < n) result.push_back(t);

  // Canonical order: smallest vertex first (rotation keeps orientation), then sort.
  for (auto& t : result) {
    int rot = 0;
    if (t[1] < t[0] && t[1] <= t[2]) rot = 1;
    if (t[2] < t[0] && t[2] < t[1]) rot = 2;
    std::rotate(t.begin(), t.begin() + rot, t.end());
  }
  std::sort(result.begin(), result.end());
  return result;
}

}  // namespace

Mesh build_structured_mesh(int n) {
  if (n < 1) throw ConfigError("build_structured_mesh: n must be >= 1");
  Mesh mesh;
  const double s = 1.0 / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) mesh.vertices.push_back({i * s, j * s});
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      mesh.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i, j + 1)});
      mesh.triangles.push_back({vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  finalize(mesh, BcLayout::all_simply_supported());
  return mesh;
}

Mesh build_unstructured_mesh(int n, std::uint64_t seed, double jitter) {
  if (n < 1) throw ConfigError("build_unstructured_mesh: n must be >= 1");
  if (jitter < 0.0 || jitter > 0.3)
    throw ConfigError("build_unstructured_mesh: jitter must be in [0, 0.3]");

  if (jitter == 0.0) return build_structured_mesh(n);

  const double s = 1.0 / n;
  const double hs = std::sqrt(2.0) / n;
  for (int attempt = 0; attempt < 20; ++attempt) {
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(attempt));
    auto uniform = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };

    std::vector<Vec2> pts;
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= n; ++i) {
        Vec2 p{i * s, j * s};
        if (i > 0 && i < n && j > 0 && j < n) {
          double r = jitter * hs * std::sqrt(uniform());
          double th = 2.0 * M_PI * uniform();
          p += {r * std::cos(th), r * std::sin(th)};
        }
        pts.push_back(p);
      }
    }

    Mesh mesh;
    mesh.vertices = pts;
    mesh.triangles = delaunay_triangulate(pts);

    bool ok = !mesh.triangles.empty();
    for (const auto& t : mesh.triangles)
      if (signed_area(pts[t[0]], pts[t[1]], pts[t[2]]) <= 0.0) ok = false;
    if (ok) {
      double total = 0.0;
      for (int k = 0; k < mesh.n_triangles(); ++k)
        total += signed_area(pts[mesh.triangles[k][0]], pts[mesh.triangles[k][1]],
                             pts[mesh.triangles[k][2]]);
      if (std::abs(total - 1.0) > 1e-10) ok = false;
    }
    if (ok && min_angle_deg(mesh) < 15.0) ok = false;
    if (!ok) continue;

    finalize(mesh, BcLayout::all_simply_supported());
    return mesh;
  }
  throw ConfigError("build_unstructured_mesh: could not reach min angle 15 deg, lower jitter");
}

Mesh build_degenerate_demo_mesh(bool degenerate) {
  Mesh mesh;
  mesh.vertices = {
      {0.0, 0.0},    // 0 corner
      {1.0, 0.0},    // 1 corner
      {1.0, 1.0},    // 2 corner
      {0.0, 1.0},    // 3 corner
      {0.45, 0.45},  // 4
      {0.75, 0.40},  // 5
      {0.40, 0.75},  // 6
      {0.78, 0.72},  // 7
      {0.22, 0.16},  // 8
  };
  if (degenerate) {
    // Vertex 4 has a three-element star, so element 0's neighbors across
    // edges (4,5) and (6,4) share vertex 8: a five-node standard patch.
    mesh.triangles = {
        {4, 5, 6},  // element 0
        {5, 7, 6},
        {5, 4, 8},
        {4, 6, 8},
        {0, 8, 6},
    };
  } else {
    // Same vertices, center fanned to the whole inner quad: no interior
    // vertex of degree three, every standard patch has six distinct nodes.
    mesh.triangles = {
        {4, 8, 5},  // element 0
        {4, 5, 7},
        {4, 7, 6},
        {4, 6, 8},
        {0, 8, 6},
    };
  }
  mesh.triangles.insert(mesh.triangles.end(), {
                                                  {0, 1, 5},
                                                  {0, 5, 8},
                                                  {0, 6, 3},
                                                  {1, 2, 5},
                                                  {5, 2, 7},
                                                  {7, 2, 3},
                                                  {6, 7, 3},
                                              });
  finalize(mesh, BcLayout::all_simply_supported());
  return mesh;
}

void tag_boundary(Mesh& mesh, const BcLayout& layout) {
  const double tol = 1e-9;
  for (auto& e : mesh.edges) {
    if (!e.is_boundary()) {
      e.tag = BoundaryTag::Interior;
      continue;
    }
    Vec2 p0 = mesh.vertices[e.v[0]], p1 = mesh.vertices[e.v[1]];
    if (std::abs(p0.y) < tol && std::abs(p1.y) < tol)
      e.tag = layout.bottom;
    else if (std::abs(p0.x - 1.0) < tol && std::abs(p1.x - 1.0) < tol)
      e.tag = layout.right;
    else if (std::abs(p0.y - 1.0) < tol && std::abs(p1.y - 1.0) < tol)
      e.tag = layout.top;
    else if (std::abs(p0.x) < tol && std::abs(p1.x) < tol)
      e.tag = layout.left;
    else
      throw ConfigError("tag_boundary: boundary edge not covered by any layout segment");
  }
  mark_constrained_vertices(mesh);
}

void add_ghosts(Mesh& mesh) {
  mesh.ghosts.clear();
  mesh.edge_ghost.assign(mesh.edges.size(), -1);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Edge& edge = mesh.edges[e];
    if (!edge.is_boundary()) continue;
    GhostElement g;
    g.boundary_edge = e;
    g.owner_triangle = edge.owners[0];
    int lv = mesh.opposite_vertex(g.owner_triangle, e);
    Vec2 opp = mesh.vertices[mesh.triangles[g.owner_triangle][lv]];
    g.ghost_vertex = mesh.vertices[edge.v[0]] + mesh.vertices[edge.v[1]] - opp;
    g.ghost_dof = mesh.n_vertices() + mesh.n_ghosts();
    mesh.edge_ghost[e] = mesh.n_ghosts();
    mesh.ghosts.push_back(g);
  }
}

void validate_mesh(const Mesh& mesh, double expected_area) {
  double total = 0.0;
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    double a = mesh.area(k);
    if (a <= 0.0) throw ParseError("triangle " + std::to_string(k) + " has non-positive area");
    total += a;
  }
  if (expected_area > 0.0 && std::abs(total - expected_area) > 1e-12 * expected_area)
    throw ParseError("triangle areas do not sum to the domain area");
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    for (int le = 0; le < 3; ++le) {
      const Edge& e = mesh.edges[mesh.tri_edges[k][le]];
      if (e.owners[0] != k && e.owners[1] != k)
        throw ParseError("edge/triangle incidence inconsistent");
    }
  }
  for (const auto& e : mesh.edges) {
    if (e.is_boundary() && e.tag == BoundaryTag::Interior)
      throw ParseError("untagged boundary edge");
    if (!e.is_boundary() && e.tag != BoundaryTag::Interior)
      throw ParseError("interior edge carries a boundary tag");
  }
  for (const auto& g : mesh.ghosts) {
    const Edge& e = mesh.edges[g.boundary_edge];
    int lv = mesh.opposite_vertex(g.owner_triangle, g.boundary_edge);
    Vec2 opp = mesh.vertices[mesh.triangles[g.owner_triangle][lv]];
    Vec2 expect = mesh.vertices[e.v[0]] + mesh.vertices[e.v[1]] - opp;
    if (norm(expect - g.ghost_vertex) > 1e-14)
      throw ParseError("ghost vertex violates the point-reflection identity");
  }
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  char buf[64];
  out << "platemesh 1\n";
  out << "vertices " << mesh.n_vertices() << "\n";
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x, v.y);
    out << buf;
  }
  out << "triangles " << mesh.n_triangles() << "\n";
  for (const auto& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
  int nb = 0;
  for (const auto& e : mesh.edges)
    if (e.is_boundary()) ++nb;
  out << "boundary " << nb << "\n";
  for (const auto& e : mesh.edges)
    if (e.is_boundary()) out << e.v[0] << " " << e.v[1] << " " << tag_letter(e.tag) << "\n";
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  write_mesh(mesh, out);
}

namespace {

struct LineReader {
  std::istream& in;
  int line_no = 0;
  std::string current;

  bool next() {
    while (std::getline(in, current)) {
      ++line_no;
      auto pos = current.find_first_not_of(" \t\r");
      if (pos == std::string::npos) continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("mesh parse error at line " + std::to_string(line_no) + ": " + msg);
  }
};

}  // namespace

Mesh read_mesh(std::istream& in, std::vector<std::string>* warnings) {
  LineReader lr{in};
  if (!lr.next()) lr.fail("empty file");
  {
    std::istringstream ss(lr.current);
    std::string word;
    int version = 0;
    if (!(ss >> word >> version) || word != "platemesh" || version != 1)
      lr.fail("expected header 'platemesh 1'");
  }

  Mesh mesh;
  auto read_section = [&lr](const std::string& name) {
    if (!lr.next()) lr.fail("expected section '" + name + "'");
    std::istringstream ss(lr.current);
    std::string word;
    long count = -1;
    if (!(ss >> word >> count) || word != name || count < 0)
      lr.fail("expected section '" + name + " N'");
    return count;
  };

  long nv = read_section("vertices");
  for (long i = 0; i < nv; ++i) {
    if (!lr.next()) lr.fail("unexpected end of vertex list");
    std::istringstream ss(lr.current);
    Vec2 v;
    if (!(ss >> v.x >> v.y)) lr.fail("malformed vertex line");
    mesh.vertices.push_back(v);
  }

  long nt = read_section("triangles");
  std::set<std::array<int, 3>> seen;
  for (long i = 0; i < nt; ++i) {
    if (!lr.next()) lr.fail("unexpected end of triangle list");
    std::istringstream ss(lr.current);
    std::array<int, 3> t{};
    if (!(ss >> t[0] >> t[1] >> t[2])) lr.fail("malformed triangle line");
    for (int a : t)
      if (a < 0 || a >= mesh.n_vertices()) lr.fail("triangle vertex index out of range");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) lr.fail("repeated vertex in triangle");
    if (signed_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) < 0.0) {
      std::swap(t[1], t[2]);
      if (warnings)
        warnings->push_back("triangle at line " + std::to_string(lr.line_no) +
                            " was clockwise; reoriented");
    }
    std::array<int, 3> key = t;
    std::sort(key.begin(), key.end());
    if (!seen.insert(key).second) lr.fail("duplicated triangle");
    mesh.triangles.push_back(t);
  }

  build_edges(mesh);
  compute_size_parameters(mesh);

  std::map<std::pair<int, int>, int> boundary_index;
  for (int e = 0; e < mesh.n_edges(); ++e)
    if (mesh.edges[e].is_boundary())
      boundary_index.emplace(std::minmax(mesh.edges[e].v[0], mesh.edges[e].v[1]), e);

  long nb = read_section("boundary");
  std::set<int> tagged;
  for (long i = 0; i < nb; ++i) {
    if (!lr.next()) lr.fail("unexpected end of boundary list");
    std::istringstream ss(lr.current);
    int a = -1, b = -1;
    std::string tag;
    if (!(ss >> a >> b >> tag) || tag.size() != 1) lr.fail("malformed boundary line");
    auto it = boundary_index.find(std::minmax(a, b));
    if (it == boundary_index.end()) lr.fail("boundary line does not match a boundary edge");
    try {
      mesh.edges[it->second].tag = tag_from_letter(tag[0]);
    } catch (const ParseError&) {
      lr.fail("unknown boundary tag '" + tag + "'");
    }
    tagged.insert(it->second);
  }
  if (tagged.size() != boundary_index.size())
    throw ParseError("boundary section does not cover all boundary edges");

  mark_constrained_vertices(mesh);
  add_ghosts(mesh);
  validate_mesh(mesh);
  return mesh;
}

Mesh read_mesh(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file '" + path + "'");
  return read_mesh(in, warnings);
}

}  // namespace platekit
