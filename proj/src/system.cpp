#include "platekit/system.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "platekit/errors.hpp"
#include "platekit/quadrature.hpp"

namespace platekit {

MethodSpec MethodSpec::make(Family f) {
  MethodSpec m;
  m.family = f;
  m.load_mode = (f == Family::Bpt) ? LoadMode::PlainLinear : LoadMode::Reconstructed;
  return m;
}

MethodSpec MethodSpec::parse(const std::string& name) {
  if (name == "fq") return make(Family::ReconFQ);
  if (name == "lsfq") return make(Family::ReconLSFQ);
  if (name == "morley") return make(Family::ReconMorley);
  if (name == "bpt") return make(Family::Bpt);
  if (name == "dpv") return make(Family::DpvNodal);
  if (name == "dpvc0") return make(Family::DpvC0);
  std::string valid;
  for (const auto& n : method_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown method '" + name + "' (valid: " + valid + ")");
}

const char* MethodSpec::name() const {
  switch (family) {
    case Family::ReconFQ:
      return "fq";
    case Family::ReconLSFQ:
      return "lsfq";
    case Family::ReconMorley:
      return "morley";
    case Family::Bpt:
      return "bpt";
    case Family::DpvNodal:
      return "dpv";
    case Family::DpvC0:
      return "dpvc0";
  }
  return "?";
}

ReconKind MethodSpec::recon_kind() const {
  switch (family) {
    case Family::ReconFQ:
      return ReconKind::FullQuadratic;
    case Family::ReconLSFQ:
      return ReconKind::LeastSquares;
    case Family::ReconMorley:
    case Family::Bpt:
      return ReconKind::Morley;
    default:
      throw std::logic_error("recon_kind: method does not use reconstruction");
  }
}

std::vector<std::string> method_names() {
  return {"fq", "lsfq", "morley", "bpt", "dpv", "dpvc0"};
}

ReconstructionSet build_method_reconstruction(const Mesh& mesh, MethodSpec method) {
  return build_reconstruction_maps(mesh, method.recon_kind(), method.uses_ghosts());
}

DofLayout make_dof_layout(const Mesh& mesh, MethodSpec method, const ReconstructionSet* recon,
                          const ScalarField* essential_value) {
  DofLayout layout;
  layout.family = method.family;
  const int nv = mesh.n_vertices();

  for (int i = 0; i < nv; ++i) layout.dofs.push_back({DofKind::Vertex, i, -1, mesh.vertices[i]});

  if (method.uses_reconstruction()) {
    if (!recon) throw std::logic_error("make_dof_layout: reconstruction maps missing");
    const int nghost = method.uses_ghosts() ? mesh.n_ghosts() : 0;
    for (int g = 0; g < nghost; ++g)
      layout.dofs.push_back({DofKind::Ghost, g, -1, mesh.ghosts[g].ghost_vertex});
    layout.n_global = nv + nghost;
    layout.elements.resize(mesh.n_triangles());
    for (int k = 0; k < mesh.n_triangles(); ++k) {
      layout.elements[k].dofs = recon->maps[k].dofs;
      layout.elements[k].coeff_map = recon->maps[k].matrix;
    }
  } else if (method.family == Family::DpvNodal) {
    for (int k = 0; k < mesh.n_triangles(); ++k) {
      P2Basis basis(mesh, k);
      for (int m = 0; m < 3; ++m)
        layout.dofs.push_back({DofKind::ElementMidpoint, k, m, basis.node(3 + m)});
    }
    layout.n_global = nv + 3 * mesh.n_triangles();
    layout.elements.resize(mesh.n_triangles());
    for (int k = 0; k < mesh.n_triangles(); ++k) {
      auto& el = layout.elements[k];
      const auto& t = mesh.triangles[k];
      el.dofs = {t[0], t[1], t[2], nv + 3 * k, nv + 3 * k + 1, nv + 3 * k + 2};
      el.coeff_map = Eigen::MatrixXd::Identity(6, 6);
    }
  } else {  // DpvC0
    for (int e = 0; e < mesh.n_edges(); ++e)
      layout.dofs.push_back({DofKind::EdgeMidpoint, e, -1, mesh.edge_midpoint(e)});
    layout.n_global = nv + mesh.n_edges();
    layout.elements.resize(mesh.n_triangles());
    for (int k = 0; k < mesh.n_triangles(); ++k) {
      auto& el = layout.elements[k];
      const auto& t = mesh.triangles[k];
      el.dofs = {t[0],
                 t[1],
                 t[2],
                 nv + mesh.tri_edges[k][0],
                 nv + mesh.tri_edges[k][1],
                 nv + mesh.tri_edges[k][2]};
      el.coeff_map = Eigen::MatrixXd::Identity(6, 6);
    }
  }

  layout.constrained.assign(layout.n_global, 0);
  for (int i = 0; i < nv; ++i) layout.constrained[i] = mesh.vertex_constrained[i] ? 1 : 0;
  if (method.family == Family::DpvC0) {
    for (int e = 0; e < mesh.n_edges(); ++e) {
      const auto tag = mesh.edges[e].tag;
      if (tag == BoundaryTag::Clamped || tag == BoundaryTag::SimplySupported)
        layout.constrained[nv + e] = 1;
    }
  }

  layout.constrained_value.assign(layout.n_global, 0.0);
  if (essential_value) {
    for (int i = 0; i < layout.n_global; ++i)
      if (layout.constrained[i]) layout.constrained_value[i] = (*essential_value)(layout.dofs[i].pos);
  }

  layout.free_index.assign(layout.n_global, -1);
  for (int i = 0; i < layout.n_global; ++i) {
    if (!layout.constrained[i]) {
      layout.free_index[i] = layout.n_free++;
      layout.free_dofs.push_back(i);
    }
  }
  return layout;
}

namespace {

using Triplet = Eigen::Triplet<double>;

/// Scatter a local block, eliminating constrained dofs into the lift.
void scatter_dense(const Eigen::MatrixXd& local, const std::vector<int>& dofs,
                   const DofLayout& layout, std::vector<Triplet>& triplets,
                   Eigen::VectorXd& lift) {
  const int n = static_cast<int>(dofs.size());
  for (int i = 0; i < n; ++i) {
    const int fi = layout.free_index[dofs[i]];
    if (fi < 0) continue;
    for (int j = 0; j < n; ++j) {
      if (local(i, j) == 0.0) continue;
      const int fj = layout.free_index[dofs[j]];
      if (fj >= 0)
        triplets.emplace_back(fi, fj, local(i, j));
      else
        lift(fi) += local(i, j) * layout.constrained_value[dofs[j]];
    }
  }
}

}  // namespace

SparseSystem assemble(const Mesh& mesh, MethodSpec method, const MaterialParams& material,
                      const DgConfig& config, const ReconstructionSet* recon,
                      const ScalarField* essential_value) {
  if (config.beta <= 0.0) throw ConfigError("assemble: beta must be positive");

  SparseSystem system;
  system.method = method;
  system.config = config;
  system.h = mesh.h;
  system.layout = make_dof_layout(mesh, method, recon, essential_value);
  const DofLayout& layout = system.layout;

  std::vector<Triplet> triplets;
  system.rhs_lift = Eigen::VectorXd::Zero(layout.n_free);
  std::vector<P2Basis> bases;
  bases.reserve(mesh.n_triangles());
  for (int k = 0; k < mesh.n_triangles(); ++k) bases.emplace_back(mesh, k);

  // Volume terms (sigma(v), kappa(w))_K, conjugated by the coefficient maps.
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const auto s = element_stiffness(bases[k], material);
    Eigen::MatrixXd S(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) S(i, j) = s[i][j];
    const auto& el = layout.elements[k];
    Eigen::MatrixXd local = el.coeff_map.transpose() * S * el.coeff_map;
    scatter_dense(local, el.dofs, layout, triplets, system.rhs_lift);
  }

  // Edge terms on E outside the simply supported and free sets.
  const EdgeRule erule = edge_rule(2);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Edge& edge = mesh.edges[e];
    if (edge.tag == BoundaryTag::SimplySupported || edge.tag == BoundaryTag::Free) continue;

    const Vec2 p0 = mesh.vertices[edge.v[0]];
    const Vec2 p1 = mesh.vertices[edge.v[1]];
    const double len = mesh.edge_length(e);
    const bool interior = !edge.is_boundary();

    std::vector<int> all_dofs;
    Eigen::RowVectorXd m_avg;      // <M_nn(.)> as a row over all_dofs
    Eigen::RowVectorXd j_int;      // integral of [._n] over E
    std::vector<Eigen::RowVectorXd> j_pts(erule.points.size());

    const int sides = interior ? 2 : 1;
    for (int s = 0; s < sides; ++s) {
      const int k = edge.owners[s];
      const auto& el = layout.elements[k];
      const int n = static_cast<int>(el.dofs.size());
      const int offset = static_cast<int>(all_dofs.size());
      all_dofs.insert(all_dofs.end(), el.dofs.begin(), el.dofs.end());
      const int total = static_cast<int>(all_dofs.size());

      auto grow = [&](Eigen::RowVectorXd& r) {
        Eigen::RowVectorXd next = Eigen::RowVectorXd::Zero(total);
        if (r.size() > 0) next.head(r.size()) = r;
        r.swap(next);
      };
      grow(m_avg);
      grow(j_int);
      for (auto& jp : j_pts) grow(jp);

      const double avg_w = interior ? 0.5 : 1.0;
      const double jump_sign = (s == 0) ? 1.0 : -1.0;

      Eigen::RowVectorXd mloc(6);
      const auto& hess = bases[k].hessians();
      for (int i = 0; i < 6; ++i)
        mloc(i) = quad_form(constitutive(hess[i], material), edge.normal, edge.normal);
      m_avg.segment(offset, n) += avg_w * (mloc * el.coeff_map);

      for (std::size_t g = 0; g < erule.points.size(); ++g) {
        const Vec2 x = p0 + (p1 - p0) * erule.points[g].t;
        const auto grads = bases[k].gradients(x);
        Eigen::RowVectorXd jloc(6);
        for (int i = 0; i < 6; ++i) jloc(i) = dot(grads[i], edge.normal);
        Eigen::RowVectorXd row = jump_sign * (jloc * el.coeff_map);
        j_pts[g].segment(offset, n) += row;
        j_int.segment(offset, n) += (erule.points[g].w * len) * row;
      }
    }

    Eigen::MatrixXd local = -(m_avg.transpose() * j_int + j_int.transpose() * m_avg);
    if (config.penalty_projection == PenaltyProjection::P0) {
      local += (config.beta / (system.h * len)) * (j_int.transpose() * j_int);
    } else {
      for (std::size_t g = 0; g < erule.points.size(); ++g)
        local += (config.beta / system.h) * (erule.points[g].w * len) *
                 (j_pts[g].transpose() * j_pts[g]);
    }
    scatter_dense(local, all_dofs, layout, triplets, system.rhs_lift);
  }

  system.matrix.resize(layout.n_free, layout.n_free);
  system.matrix.setFromTriplets(triplets.begin(), triplets.end());
  system.rhs = -system.rhs_lift;

  const double nrm = system.matrix.norm();
  const Eigen::SparseMatrix<double> diff =
      Eigen::SparseMatrix<double>(system.matrix.transpose()) - system.matrix;
  if (nrm > 0.0 && diff.norm() > 1e-12 * nrm)
    throw std::logic_error("assemble: accumulated matrix is not symmetric");

  return system;
}

void assemble_load(SparseSystem& system, const Mesh& mesh, const ScalarField& f) {
  const DofLayout& layout = system.layout;
  Eigen::VectorXd full = Eigen::VectorXd::Zero(layout.n_global);
  const TriangleRule& rule = triangle_rule(system.config.quadrature_degree);

  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const P2Basis basis(mesh, k);
    const auto& el = layout.elements[k];
    if (system.method.load_mode == LoadMode::Reconstructed) {
      Eigen::VectorXd local = Eigen::VectorXd::Zero(6);
      for (const auto& q : rule.points) {
        const Vec2 x = basis.vertex(0) * q.l0 + basis.vertex(1) * q.l1 + basis.vertex(2) * q.l2;
        const double w = q.w * basis.area() * f(x);
        const auto phi = basis.values(x);
        for (int i = 0; i < 6; ++i) local(i) += w * phi[i];
      }
      Eigen::VectorXd global = el.coeff_map.transpose() * local;
      for (std::size_t i = 0; i < el.dofs.size(); ++i) full(el.dofs[i]) += global(i);
    } else {
      const auto& t = mesh.triangles[k];
      for (const auto& q : rule.points) {
        const Vec2 x = basis.vertex(0) * q.l0 + basis.vertex(1) * q.l1 + basis.vertex(2) * q.l2;
        const double w = q.w * basis.area() * f(x);
        const double l[3] = {q.l0, q.l1, q.l2};
        for (int i = 0; i < 3; ++i) full(t[i]) += w * l[i];
      }
    }
  }

  system.rhs = Eigen::VectorXd::Zero(layout.n_free);
  for (int i = 0; i < layout.n_free; ++i) system.rhs(i) = full(layout.free_dofs[i]);
  system.rhs -= system.rhs_lift;
}

Solution solve(const SparseSystem& system, const Mesh& mesh) {
  const DofLayout& layout = system.layout;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(system.matrix);
  if (ldlt.info() != Eigen::Success)
    throw SolveError("solve: sparse factorization failed (structurally or numerically singular)");

  const Eigen::VectorXd d = ldlt.vectorD();
  const double dmin = d.minCoeff();
  const double dmax = d.maxCoeff();
  if (!(dmin > 0.0) || dmin <= 1e-14 * dmax) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.3e", dmin);
    throw SolveError(std::string("solve: system is singular or indefinite; smallest pivot = ") +
                     buf);
  }

  Eigen::VectorXd u = ldlt.solve(system.rhs);
  u += ldlt.solve(system.rhs - system.matrix * u);  // one refinement step
  const double scale = system.matrix.norm() * u.norm() + system.rhs.norm();
  const double residual =
      scale > 0.0 ? (system.matrix * u - system.rhs).norm() / scale : 0.0;
  if (!u.allFinite() || residual > 1e-10) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.3e", residual);
    throw SolveError(std::string("solve: backward error too large: ") + buf);
  }

  Solution sol;
  sol.method = system.method;
  sol.n_free = layout.n_free;
  sol.nodal = Eigen::VectorXd::Zero(layout.n_global);
  for (int i = 0; i < layout.n_global; ++i)
    sol.nodal(i) = layout.constrained[i] ? layout.constrained_value[i] : u(layout.free_index[i]);

  sol.reconstructed.resize(mesh.n_triangles());
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const auto& el = layout.elements[k];
    Eigen::VectorXd local(el.dofs.size());
    for (std::size_t i = 0; i < el.dofs.size(); ++i) local(i) = sol.nodal(el.dofs[i]);
    Eigen::VectorXd coeffs = el.coeff_map * local;
    sol.reconstructed[k].element = k;
    for (int i = 0; i < 6; ++i) sol.reconstructed[k].coeffs[i] = coeffs(i);
  }
  return sol;
}

void write_matrix_market(const SparseSystem& system, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  std::vector<std::array<double, 3>> entries;
  for (int k = 0; k < system.matrix.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(system.matrix, k); it; ++it)
      if (it.row() >= it.col())
        entries.push_back({static_cast<double>(it.row()), static_cast<double>(it.col()), it.value()});
  out << system.matrix.rows() << " " << system.matrix.cols() << " " << entries.size() << "\n";
  char buf[96];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%d %d %.17g\n", static_cast<int>(e[0]) + 1,
                  static_cast<int>(e[1]) + 1, e[2]);
    out << buf;
  }
}

}  // namespace platekit
