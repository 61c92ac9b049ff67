#include <doctest.h>

#include <Eigen/SparseCholesky>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "platekit/analysis.hpp"
#include "platekit/errors.hpp"
#include "platekit/system.hpp"

using namespace platekit;

namespace {

SparseSystem assemble_method(const Mesh& mesh, const std::string& name,
                             const MaterialParams& material, DgConfig config = {},
                             const ScalarField* essential = nullptr,
                             ReconstructionSet* recon_out = nullptr) {
  MethodSpec method = MethodSpec::parse(name);
  static thread_local ReconstructionSet recon;
  const ReconstructionSet* ptr = nullptr;
  if (method.uses_reconstruction()) {
    recon = build_method_reconstruction(mesh, method);
    ptr = &recon;
    if (recon_out) *recon_out = recon;
  }
  return assemble(mesh, method, material, config, ptr, essential);
}

double rel_frobenius_diff(const Eigen::SparseMatrix<double>& a,
                          const Eigen::SparseMatrix<double>& b) {
  return Eigen::SparseMatrix<double>(a - b).norm() / a.norm();
}

}  // namespace

TEST_CASE("method name parsing") {
  CHECK(MethodSpec::parse("bpt").load_mode == LoadMode::PlainLinear);
  CHECK(MethodSpec::parse("fq").load_mode == LoadMode::Reconstructed);
  CHECK(!MethodSpec::parse("bpt").uses_ghosts());
  CHECK(MethodSpec::parse("morley").uses_ghosts());
  CHECK(!MethodSpec::parse("dpv").uses_reconstruction());
  CHECK_THROWS_AS(MethodSpec::parse("nope"), ConfigError);
  try {
    MethodSpec::parse("nope");
  } catch (const ConfigError& ex) {
    CHECK(std::string(ex.what()).find("lsfq") != std::string::npos);
  }
}

TEST_CASE("dof layout sizes") {
  Mesh m = build_structured_mesh(4);
  MaterialParams mat = MaterialParams::from_stiffness(1.0, 0.0);

  SparseSystem fq = assemble_method(m, "fq", mat);
  CHECK(fq.layout.n_global == m.n_vertices() + m.n_ghosts());
  SparseSystem bpt = assemble_method(m, "bpt", mat);
  CHECK(bpt.layout.n_global == m.n_vertices());
  SparseSystem dpv = assemble_method(m, "dpv", mat);
  CHECK(dpv.layout.n_global == m.n_vertices() + 3 * m.n_triangles());
  SparseSystem dpvc0 = assemble_method(m, "dpvc0", mat);
  CHECK(dpvc0.layout.n_global == m.n_vertices() + m.n_edges());

  // all-S: boundary vertices constrained everywhere; dpvc0 adds boundary midpoints
  int nb = 0;
  for (const auto& e : m.edges)
    if (e.is_boundary()) ++nb;
  CHECK(fq.layout.n_free == fq.layout.n_global - 4 * 4);  // 16 boundary vertices at n=4
  CHECK(dpvc0.layout.n_free == dpvc0.layout.n_global - 16 - nb);
}

TEST_CASE("assembled matrices are symmetric") {
  Mesh m = build_unstructured_mesh(6, 3, 0.2);
  MaterialParams mat = MaterialParams::from_stiffness(1.0, 0.0);
  for (const char* name : {"fq", "lsfq", "morley", "bpt", "dpv", "dpvc0"}) {
    SparseSystem s = assemble_method(m, name, mat);
    CHECK(rel_frobenius_diff(s.matrix, Eigen::SparseMatrix<double>(s.matrix.transpose())) <=
          1e-12);
  }
}

TEST_CASE("assembly is deterministic") {
  Mesh m = build_unstructured_mesh(5, 9, 0.2);
  MaterialParams mat = MaterialParams::from_stiffness(1.0, 0.0);
  SparseSystem a = assemble_method(m, "fq", mat);
  SparseSystem b = assemble_method(m, "fq", mat);
  REQUIRE(a.matrix.nonZeros() == b.matrix.nonZeros());
  for (int i = 0; i < a.matrix.nonZeros(); ++i)
    CHECK(a.matrix.valuePtr()[i] == b.matrix.valuePtr()[i]);
}

TEST_CASE("morley and fq assemble identical matrices on structured meshes") {
  Mesh m = build_structured_mesh(8);
  MaterialParams mat = MaterialParams::from_stiffness(1.0, 0.0);
  SparseSystem a = assemble_method(m, "morley", mat);
  SparseSystem b = assemble_method(m, "fq", mat);
  CHECK(rel_frobenius_diff(a.matrix, b.matrix) <= 1e-10);
}

TEST_CASE("morley reconstruction kills interior edge jumps at midpoints") {
  Mesh m = build_unstructured_mesh(5, 13, 0.2);
  ReconstructionSet recon = build_reconstruction_maps(m, ReconKind::Morley);
  std::mt19937_64 rng(3);
  Eigen::VectorXd u(m.n_vertices() + m.n_ghosts());
  for (int i = 0; i < u.size(); ++i) u(i) = ((rng() >> 11) * 0x1.0p-53) * 2 - 1;

  auto coeffs_of = [&](int k) {
    Eigen::VectorXd local(recon.maps[k].dofs.size());
    for (std::size_t i = 0; i < recon.maps[k].dofs.size(); ++i)
      local(i) = u(recon.maps[k].dofs[i]);
    Eigen::VectorXd c = recon.maps[k].matrix * local;
    LocalQuadratic q;
    for (int i = 0; i < 6; ++i) q.coeffs[i] = c(i);
    return q;
  };

  for (int e = 0; e < m.n_edges(); ++e) {
    const Edge& edge = m.edges[e];
    if (edge.is_boundary()) continue;
    P2Basis bp(m, edge.owners[0]), bm(m, edge.owners[1]);
    Vec2 mid = m.edge_midpoint(e);
    double jump = dot(coeffs_of(edge.owners[0]).gradient(bp, mid) -
                          coeffs_of(edge.owners[1]).gradient(bm, mid),
                      edge.normal);
    CHECK(std::abs(jump) <= 1e-11);
  }
}

TEST_CASE("plain linear load integrates hat functions") {
  Mesh m = build_structured_mesh(4);
  MaterialParams mat = MaterialParams::from_stiffness(1.0, 0.0);
  SparseSystem s = assemble_method(m, "bpt", mat);
  assemble_load(s, m, [](const Vec2&) { return 1.0; });
  // interior vertex: hat integral = star area / 3 = 6 * (1/(2 n^2)) / 3 = 1/n^2
  const int n = 4;
  int vid = 2 * (n + 1) + 2;  // vertex (2,2), interior
  REQUIRE(!s.layout.constrained[vid]);
  CHECK(s.rhs(s.layout.free_index[vid]) == doctest::Approx(1.0 / (n * n)).epsilon(1e-13));
}

TEST_CASE("zero load gives the zero solution") {
  Mesh m = build_unstructured_mesh(4, 5, 0.2);
  MaterialParams mat = MaterialParams::from_stiffness(1.0, 0.0);
  SparseSystem s = assemble_method(m, "fq", mat);
  assemble_load(s, m, [](const Vec2&) { return 0.0; });
  Solution sol = solve(s, m);
  CHECK(sol.nodal.cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("all-free boundary is reported singular") {
  Mesh m = build_structured_mesh(4);
  tag_boundary(m, BcLayout::all_free());
  MaterialParams mat = MaterialParams::from_stiffness(1.0, 0.0);
  SparseSystem s = assemble_method(m, "fq", mat);
  assemble_load(s, m, [](const Vec2& x) { return ExactP1::load(x); });
  CHECK_THROWS_AS(solve(s, m), SolveError);
}

TEST_CASE("factorization pivots are positive at beta 100") {
  MaterialParams p1 = MaterialParams::from_stiffness(1.0, 0.0);
  Mesh m = build_unstructured_mesh(8, 1, 0.2);
  for (const char* name : {"fq", "lsfq", "morley", "bpt", "dpv", "dpvc0"}) {
    SparseSystem s = assemble_method(m, name, p1);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(s.matrix);
    REQUIRE(ldlt.info() == Eigen::Success);
    CHECK(ldlt.vectorD().minCoeff() > 0.0);
  }
}

TEST_CASE("smoke solve has a tiny backward error") {
  Mesh m = build_unstructured_mesh(32, 42, 0.2);
  MaterialParams mat = MaterialParams::from_stiffness(1.0, 0.0);
  SparseSystem s = assemble_method(m, "fq", mat);
  assemble_load(s, m, [](const Vec2& x) { return ExactP1::load(x); });
  Solution sol = solve(s, m);
  Eigen::VectorXd u(s.layout.n_free);
  for (int i = 0; i < s.layout.n_free; ++i) u(i) = sol.nodal(s.layout.free_dofs[i]);
  double backward = (s.matrix * u - s.rhs).norm() / (s.matrix.norm() * u.norm() + s.rhs.norm());
  CHECK(backward <= 1e-10);
  CHECK(sol.nodal.allFinite());
}

TEST_CASE("quadratic patch test for dpvc0") {
  auto manufactured = [](const Vec2& p) { return p.x * p.y + 0.3 * p.x - 0.2 * p.y + 0.1; };
  MaterialParams mat = MaterialParams::from_stiffness(1.0, 0.3);
  for (Mesh m : {build_structured_mesh(8), build_unstructured_mesh(8, 1, 0.2)}) {
    ScalarField essential = manufactured;
    SparseSystem s = assemble_method(m, "dpvc0", mat, DgConfig{}, &essential);
    assemble_load(s, m, [](const Vec2&) { return 0.0; });
    Solution sol = solve(s, m);
    double worst = 0.0;
    for (int i = 0; i < s.layout.n_global; ++i)
      worst = std::max(worst, std::abs(sol.nodal(i) - manufactured(s.layout.dofs[i].pos)));
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("sparsity stays within the patch overlap graph") {
  Mesh m = build_unstructured_mesh(4, 7, 0.2);
  MaterialParams mat = MaterialParams::from_stiffness(1.0, 0.0);
  ReconstructionSet recon;
  SparseSystem s = assemble_method(m, "fq", mat, DgConfig{}, nullptr, &recon);

  std::set<std::pair<int, int>> allowed;
  auto add_pairs = [&](const std::vector<int>& a, const std::vector<int>& b) {
    for (int i : a)
      for (int j : b) allowed.emplace(i, j);
  };
  for (int e = 0; e < m.n_edges(); ++e) {
    const Edge& edge = m.edges[e];
    std::vector<int> dofs = recon.maps[edge.owners[0]].dofs;
    if (!edge.is_boundary()) {
      const auto& other = recon.maps[edge.owners[1]].dofs;
      dofs.insert(dofs.end(), other.begin(), other.end());
    }
    add_pairs(dofs, dofs);
  }
  for (int col = 0; col < s.matrix.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(s.matrix, col); it; ++it) {
      if (it.value() == 0.0) continue;
      int gi = s.layout.free_dofs[it.row()];
      int gj = s.layout.free_dofs[it.col()];
      CHECK(allowed.count({gi, gj}) == 1);
    }
  }
}

TEST_CASE("ghost dofs are always coupled") {
  Mesh m = build_unstructured_mesh(5, 19, 0.2);
  MaterialParams mat = MaterialParams::from_stiffness(1.0, 0.0);
  for (const char* name : {"fq", "lsfq", "morley"}) {
    SparseSystem s = assemble_method(m, name, mat);
    for (int i = 0; i < s.layout.n_free; ++i) {
      if (s.layout.dofs[s.layout.free_dofs[i]].kind != DofKind::Ghost) continue;
      CHECK(s.matrix.coeff(i, i) != 0.0);
    }
  }
}

TEST_CASE("matrix market dump") {
  Mesh m = build_structured_mesh(2);
  MaterialParams mat = MaterialParams::from_stiffness(1.0, 0.0);
  SparseSystem s = assemble_method(m, "dpvc0", mat);
  const char* path = "system_test.mtx";
  write_matrix_market(s, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "%%MatrixMarket matrix coordinate real symmetric");
  int rows, cols;
  long nnz;
  in >> rows >> cols >> nnz;
  CHECK(rows == s.layout.n_free);
  CHECK(cols == s.layout.n_free);
  CHECK(nnz > 0);
  std::remove(path);
}

TEST_CASE("beta must be positive") {
  Mesh m = build_structured_mesh(2);
  MaterialParams mat = MaterialParams::from_stiffness(1.0, 0.0);
  DgConfig config;
  config.beta = -1.0;
  CHECK_THROWS_AS(assemble_method(m, "dpvc0", mat, config), ConfigError);
}
