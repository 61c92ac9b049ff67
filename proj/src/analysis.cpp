#include "platekit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "platekit/errors.hpp"
#include "platekit/quadrature.hpp"

namespace platekit {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double ExactP1::value(const Vec2& x) const { return std::sin(kPi * x.x) * std::sin(2.0 * kPi * x.y); }

Vec2 ExactP1::gradient(const Vec2& x) const {
  const double a = kPi, b = 2.0 * kPi;
  return {a * std::cos(a * x.x) * std::sin(b * x.y), b * std::sin(a * x.x) * std::cos(b * x.y)};
}

Sym2 ExactP1::hessian(const Vec2& x) const {
  const double a = kPi, b = 2.0 * kPi;
  const double sx = std::sin(a * x.x), cx = std::cos(a * x.x);
  const double sy = std::sin(b * x.y), cy = std::cos(b * x.y);
  return {-a * a * sx * sy, a * b * cx * cy, -b * b * sx * sy};
}

SmoothField::Third ExactP1::third(const Vec2& x) const {
  const double a = kPi, b = 2.0 * kPi;
  const double sx = std::sin(a * x.x), cx = std::cos(a * x.x);
  const double sy = std::sin(b * x.y), cy = std::cos(b * x.y);
  Third t;
  t.xxx = -a * a * a * cx * sy;
  t.xxy = -a * a * b * sx * cy;
  t.xyy = -a * b * b * cx * sy;
  t.yyy = -b * b * b * sx * cy;
  return t;
}

double ExactP1::load(const Vec2& x) {
  return 25.0 * kPi * kPi * kPi * kPi * std::sin(kPi * x.x) * std::sin(2.0 * kPi * x.y);
}

ModelProblem ModelProblem::p1() {
  ModelProblem p;
  p.id = "p1";
  p.material = MaterialParams::from_stiffness(1.0, 0.0);
  p.layout = BcLayout::all_simply_supported();
  p.load = [](const Vec2& x) { return ExactP1::load(x); };
  p.exact = std::make_shared<ExactP1>();
  return p;
}

ModelProblem ModelProblem::p2() {
  ModelProblem p;
  p.id = "p2";
  p.material = MaterialParams::from_elastic(1.0e6, 0.3, 0.01);
  p.layout = BcLayout::mixed_sscf();
  p.load = [](const Vec2&) { return 1.0; };
  return p;
}

// --- reference field ---------------------------------------------------------

StructuredP2Field::StructuredP2Field(int n, Mesh mesh, std::vector<LocalQuadratic> coeffs)
    : n_(n), mesh_(std::move(mesh)), coeffs_(std::move(coeffs)) {
  bases_.reserve(mesh_.n_triangles());
  for (int k = 0; k < mesh_.n_triangles(); ++k) bases_.emplace_back(mesh_, k);

  // Vertex-averaged Hessian recovery; per-element gradients give constant
  // third derivatives.
  std::vector<Sym2> vertex_hess(mesh_.n_vertices());
  std::vector<double> weight(mesh_.n_vertices(), 0.0);
  for (int k = 0; k < mesh_.n_triangles(); ++k) {
    const Sym2 h = coeffs_[k].hessian(bases_[k]);
    const double a = bases_[k].area();
    for (int i : mesh_.triangles[k]) {
      vertex_hess[i] = vertex_hess[i] + h * a;
      weight[i] += a;
    }
  }
  for (int i = 0; i < mesh_.n_vertices(); ++i)
    if (weight[i] > 0.0) vertex_hess[i] = vertex_hess[i] * (1.0 / weight[i]);

  thirds_.resize(mesh_.n_triangles());
  for (int k = 0; k < mesh_.n_triangles(); ++k) {
    const auto& t = mesh_.triangles[k];
    const Vec2 a = mesh_.vertices[t[0]], b = mesh_.vertices[t[1]], c = mesh_.vertices[t[2]];
    const double inv2A = 1.0 / (2.0 * signed_area(a, b, c));
    const Vec2 g[3] = {perp(c - b) * inv2A, perp(a - c) * inv2A, perp(b - a) * inv2A};
    Vec2 d11, d12, d22;
    for (int i = 0; i < 3; ++i) {
      const Sym2& h = vertex_hess[t[i]];
      d11 += g[i] * h.a11;
      d12 += g[i] * h.a12;
      d22 += g[i] * h.a22;
    }
    Third& th = thirds_[k];
    th.xxx = d11.x;
    th.xxy = 0.5 * (d11.y + d12.x);
    th.xyy = 0.5 * (d12.y + d22.x);
    th.yyy = d22.y;
  }
}

int StructuredP2Field::locate(const Vec2& x) const {
  const double fx = std::clamp(x.x, 0.0, 1.0) * n_;
  const double fy = std::clamp(x.y, 0.0, 1.0) * n_;
  int i = std::min(n_ - 1, static_cast<int>(fx));
  int j = std::min(n_ - 1, static_cast<int>(fy));
  const bool lower = (fx - i) + (fy - j) <= 1.0;
  return 2 * (j * n_ + i) + (lower ? 0 : 1);
}

double StructuredP2Field::value(const Vec2& x) const {
  const int k = locate(x);
  return coeffs_[k].value(bases_[k], x);
}

Vec2 StructuredP2Field::gradient(const Vec2& x) const {
  const int k = locate(x);
  return coeffs_[k].gradient(bases_[k], x);
}

Sym2 StructuredP2Field::hessian(const Vec2& x) const {
  const int k = locate(x);
  return coeffs_[k].hessian(bases_[k]);
}

SmoothField::Third StructuredP2Field::third(const Vec2& x) const { return thirds_[locate(x)]; }

std::string reference_cache_dir() {
  if (const char* env = std::getenv("PLATEKIT_CACHE")) return env;
  return "platekit_cache";
}

namespace {

std::shared_ptr<StructuredP2Field> solve_p2_structured(int n) {
  Mesh mesh = build_structured_mesh(n);
  ModelProblem p2 = ModelProblem::p2();
  tag_boundary(mesh, p2.layout);
  const MethodSpec method = MethodSpec::make(Family::DpvC0);
  SparseSystem system = assemble(mesh, method, p2.material, DgConfig{}, nullptr);
  assemble_load(system, mesh, p2.load);
  Solution sol = solve(system, mesh);
  return std::make_shared<StructuredP2Field>(n, std::move(mesh), std::move(sol.reconstructed));
}

std::string reference_path(const std::string& dir, int n) {
  return dir + "/p2_reference_dpvc0_n" + std::to_string(n) + ".dat";
}

std::shared_ptr<StructuredP2Field> load_or_build_reference(const std::string& dir, int n) {
  const std::string path = reference_path(dir, n);
  {
    std::ifstream in(path);
    if (in) {
      std::string word;
      int version = 0, file_n = 0;
      long count = 0;
      in >> word >> version >> file_n >> count;
      if (word == "p2ref" && version == 1 && file_n == n && count > 0) {
        std::vector<double> values(count);
        bool ok = true;
        for (long i = 0; i < count && ok; ++i) ok = static_cast<bool>(in >> values[i]);
        if (ok && count == 6L * 2 * n * n) {
          Mesh mesh = build_structured_mesh(n);
          tag_boundary(mesh, BcLayout::mixed_sscf());
          std::vector<LocalQuadratic> coeffs(2 * n * n);
          for (int k = 0; k < 2 * n * n; ++k) {
            coeffs[k].element = k;
            for (int i = 0; i < 6; ++i) coeffs[k].coeffs[i] = values[6L * k + i];
          }
          return std::make_shared<StructuredP2Field>(n, std::move(mesh), std::move(coeffs));
        }
      }
    }
  }

  auto field = solve_p2_structured(n);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) return field;  // cache is best-effort
    const auto& coeffs = field->coeffs();
    out << "p2ref 1 " << n << " " << 6 * coeffs.size() << "\n";
    char buf[32];
    for (const auto& c : coeffs) {
      for (int i = 0; i < 6; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g\n", c.coeffs[i]);
        out << buf;
      }
    }
  }
  std::filesystem::rename(tmp, path, ec);
  return field;
}

}  // namespace

std::shared_ptr<const StructuredP2Field> reference_p2(const std::string& cache_dir, int resolution) {
  auto coarse = load_or_build_reference(cache_dir, resolution / 2);
  auto fine = load_or_build_reference(cache_dir, resolution);

  // Richardson consistency: relative L2 disagreement below 1%.
  const TriangleRule& rule = triangle_rule(4);
  double diff2 = 0.0, norm2 = 0.0;
  const Mesh& cm = coarse->mesh();
  for (int k = 0; k < cm.n_triangles(); ++k) {
    const P2Basis basis(cm, k);
    for (const auto& q : rule.points) {
      const Vec2 x = basis.vertex(0) * q.l0 + basis.vertex(1) * q.l1 + basis.vertex(2) * q.l2;
      const double uc = coarse->coeffs()[k].value(basis, x);
      const double uf = fine->value(x);
      const double w = q.w * basis.area();
      diff2 += w * (uf - uc) * (uf - uc);
      norm2 += w * uf * uf;
    }
  }
  const double rel = std::sqrt(diff2 / norm2);
  if (!(rel < 1e-2))
    throw SolveError("reference_p2: Richardson check failed, relative L2 difference " +
                     std::to_string(rel));
  return fine;
}

void attach_p2_reference(ModelProblem& problem, int resolution) {
  if (problem.id != "p2" || problem.exact) return;
  problem.exact = reference_p2(reference_cache_dir(), resolution);
}

// --- error norms --------------------------------------------------------------

double l2_error(const Mesh& mesh, const std::vector<LocalQuadratic>& discrete,
                const SmoothField& u, int degree) {
  const TriangleRule& rule = triangle_rule(degree);
  double acc = 0.0;
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const P2Basis basis(mesh, k);
    for (const auto& q : rule.points) {
      const Vec2 x = basis.vertex(0) * q.l0 + basis.vertex(1) * q.l1 + basis.vertex(2) * q.l2;
      const double e = u.value(x) - discrete[k].value(basis, x);
      acc += q.w * basis.area() * e * e;
    }
  }
  return std::sqrt(acc);
}

double l2_error_nodal_linear(const Mesh& mesh, const Solution& solution, const SmoothField& u,
                             int degree) {
  if (!solution.method.uses_reconstruction())
    throw std::logic_error("l2_error_nodal_linear: only defined for reconstruction families");
  const TriangleRule& rule = triangle_rule(degree);
  double acc = 0.0;
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const auto& t = mesh.triangles[k];
    const P2Basis basis(mesh, k);
    for (const auto& q : rule.points) {
      const Vec2 x = basis.vertex(0) * q.l0 + basis.vertex(1) * q.l1 + basis.vertex(2) * q.l2;
      const double lin = q.l0 * solution.nodal(t[0]) + q.l1 * solution.nodal(t[1]) +
                         q.l2 * solution.nodal(t[2]);
      const double e = u.value(x) - lin;
      acc += q.w * basis.area() * e * e;
    }
  }
  return std::sqrt(acc);
}

double EnergyBreakdown::total() const { return std::sqrt(squared()); }

namespace {

double transversal_force(const SmoothField& u, const Vec2& x, const Vec2& n, const Vec2& t,
                         const MaterialParams& m) {
  const auto d3 = u.third(x);
  const double dxlap = d3.xxx + d3.xyy;
  const double dylap = d3.xxy + d3.yyy;
  const Sym2 hx{d3.xxx, d3.xxy, d3.xyy};
  const Sym2 hy{d3.xxy, d3.xyy, d3.yyy};
  const double div_sigma_n = (m.lambda + m.mu) * (n.x * dxlap + n.y * dylap);
  const double mnt_t = m.mu * (t.x * quad_form(hx, n, t) + t.y * quad_form(hy, n, t));
  return div_sigma_n + mnt_t;
}

}  // namespace

EnergyBreakdown energy_error(const Mesh& mesh, const std::vector<LocalQuadratic>& discrete,
                             const SmoothField& u, const MaterialParams& material) {
  EnergyBreakdown out;
  const double h = mesh.h;
  const TriangleRule& vol_rule = triangle_rule(6);
  const EdgeRule erule = edge_rule(5);

  std::vector<P2Basis> bases;
  bases.reserve(mesh.n_triangles());
  for (int k = 0; k < mesh.n_triangles(); ++k) bases.emplace_back(mesh, k);

  // Discrete per-element moments are constant.
  std::vector<Sym2> sigma_h(mesh.n_triangles());
  std::vector<Sym2> kappa_h(mesh.n_triangles());
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    kappa_h[k] = discrete[k].hessian(bases[k]);
    sigma_h[k] = constitutive(kappa_h[k], material);
  }

  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const P2Basis& basis = bases[k];
    for (const auto& q : vol_rule.points) {
      const Vec2 x = basis.vertex(0) * q.l0 + basis.vertex(1) * q.l1 + basis.vertex(2) * q.l2;
      const Sym2 ke = u.hessian(x) - kappa_h[k];
      out.volume += q.w * basis.area() * contract(constitutive(ke, material), ke);
    }
  }

  for (int k = 0; k < mesh.n_triangles(); ++k) {
    for (int le = 0; le < 3; ++le) {
      const int e = mesh.tri_edges[k][le];
      const Edge& edge = mesh.edges[e];
      const bool skip_fs =
          edge.tag == BoundaryTag::Free || edge.tag == BoundaryTag::SimplySupported;
      const bool skip_f = edge.tag == BoundaryTag::Free;
      if (skip_fs && skip_f) continue;

      const Vec2 p0 = mesh.vertices[edge.v[0]];
      const Vec2 p1 = mesh.vertices[edge.v[1]];
      const double len = mesh.edge_length(e);
      const Vec2 n = edge.normal;

      double avg_mnn_h = quad_form(sigma_h[edge.owners[0]], n, n);
      if (!edge.is_boundary())
        avg_mnn_h = 0.5 * (avg_mnn_h + quad_form(sigma_h[edge.owners[1]], n, n));

      double mnn_acc = 0.0, t_acc = 0.0, jump_acc = 0.0;
      for (const auto& g : erule.points) {
        const Vec2 x = p0 + (p1 - p0) * g.t;
        const double w = g.w * len;
        if (!skip_fs) {
          const double mnn_e = quad_form(constitutive(u.hessian(x), material), n, n) - avg_mnn_h;
          mnn_acc += w * mnn_e * mnn_e;

          double jump_h;
          if (edge.is_boundary()) {
            jump_h = dot(u.gradient(x) - discrete[edge.owners[0]].gradient(bases[edge.owners[0]], x), n);
          } else {
            jump_h = -dot(discrete[edge.owners[0]].gradient(bases[edge.owners[0]], x) -
                              discrete[edge.owners[1]].gradient(bases[edge.owners[1]], x),
                          n);
          }
          jump_acc += w * jump_h;
        }
        if (!skip_f) {
          const double te = transversal_force(u, x, n, edge.tangent, material);
          t_acc += w * te * te;
        }
      }
      if (!skip_fs) {
        out.mnn += h * mnn_acc;
        const double p0_jump = jump_acc / len;  // mean of [e_n]
        out.jump += (1.0 / h) * len * p0_jump * p0_jump;
      }
      if (!skip_f) out.t += h * h * h * t_acc;
    }
  }
  return out;
}

// --- convergence studies -------------------------------------------------------

std::optional<double> fit_slope(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 3) return std::nullopt;
  const std::size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = n - 3; i < n; ++i) {
    if (!(h[i] > 0.0) || !(err[i] > 0.0)) return std::nullopt;
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = 3.0 * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return (3.0 * sxy - sx * sy) / denom;
}

MeshProvider default_mesh_provider(const std::string& mesh_type, std::uint64_t seed,
                                   double jitter, const BcLayout& layout) {
  auto cache = std::make_shared<std::map<int, Mesh>>();
  const bool structured = mesh_type == "structured";
  if (!structured && mesh_type != "unstructured")
    throw ConfigError("mesh_type must be 'structured' or 'unstructured'");
  return [cache, structured, seed, jitter, layout](int n) -> const Mesh& {
    auto it = cache->find(n);
    if (it == cache->end()) {
      Mesh mesh = structured ? build_structured_mesh(n) : build_unstructured_mesh(n, seed, jitter);
      tag_boundary(mesh, layout);
      it = cache->emplace(n, std::move(mesh)).first;
    }
    return it->second;
  };
}

ErrorReport convergence_study(const ModelProblem& problem, MethodSpec method,
                              const std::string& mesh_type, const std::vector<int>& levels,
                              const DgConfig& config, const MeshProvider& provider) {
  if (levels.empty()) throw ConfigError("convergence_study: empty level list");
  if (!problem.exact) throw ConfigError("convergence_study: problem has no exact/reference field");

  ErrorReport report;
  report.method = method.name();
  report.problem = problem.id;
  report.mesh_type = mesh_type;
  report.beta = config.beta;

  for (int n : levels) {
    try {
      const Mesh& mesh = provider(n);
      ReconstructionSet recon;
      const ReconstructionSet* recon_ptr = nullptr;
      if (method.uses_reconstruction()) {
        recon = build_method_reconstruction(mesh, method);
        recon_ptr = &recon;
      }
      SparseSystem system = assemble(mesh, method, problem.material, config, recon_ptr);
      assemble_load(system, mesh, problem.load);
      Solution sol = solve(system, mesh);

      ErrorRow row;
      row.n = n;
      row.h = mesh.h;
      row.ndof = sol.n_free;
      row.err_l2 = l2_error(mesh, sol.reconstructed, *problem.exact);
      row.err_energy =
          energy_error(mesh, sol.reconstructed, *problem.exact, problem.material).total();
      if (method.uses_reconstruction())
        row.err_l2_nodal = l2_error_nodal_linear(mesh, sol, *problem.exact);
      if (!report.rows.empty() && !(row.h < report.rows.back().h))
        throw std::logic_error("convergence_study: levels must refine the mesh");
      report.rows.push_back(row);
    } catch (const std::exception& ex) {
      report.partial = true;
      report.note += std::string(report.note.empty() ? "" : "; ") + "n=" + std::to_string(n) +
                     " failed: " + ex.what();
    }
  }

  std::vector<double> hs, l2s, ens, nodal;
  for (const auto& r : report.rows) {
    hs.push_back(r.h);
    l2s.push_back(r.err_l2);
    ens.push_back(r.err_energy);
    nodal.push_back(r.err_l2_nodal);
  }
  report.slope_l2 = fit_slope(hs, l2s);
  report.slope_energy = fit_slope(hs, ens);
  if (method.uses_reconstruction()) report.slope_l2_nodal = fit_slope(hs, nodal);
  return report;
}

void write_report_csv(const ErrorReport& report, const std::string& path, bool nodal_l2_column) {
  std::ostringstream out;
  out << "method,problem,mesh_type,beta,n,h,ndof,err_l2,err_energy";
  if (nodal_l2_column) out << ",err_l2_nodal";
  out << "\n";
  char buf[256];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%.12g,%d,%.12g,%d,%.12g,%.12g",
                  report.method.c_str(), report.problem.c_str(), report.mesh_type.c_str(),
                  report.beta, r.n, r.h, r.ndof, r.err_l2, r.err_energy);
    out << buf;
    if (nodal_l2_column) {
      std::snprintf(buf, sizeof buf, ",%.12g", r.err_l2_nodal);
      out << buf;
    }
    out << "\n";
  }
  if (report.slope_l2 && report.slope_energy) {
    std::snprintf(buf, sizeof buf, "# slope_l2=%.6g  slope_energy=%.6g", *report.slope_l2,
                  *report.slope_energy);
    out << buf;
    if (nodal_l2_column && report.slope_l2_nodal) {
      std::snprintf(buf, sizeof buf, "  slope_l2_nodal=%.6g", *report.slope_l2_nodal);
      out << buf;
    }
    out << "\n";
  } else {
    out << "# slope fit requires at least 3 levels\n";
  }
  if (report.partial) out << "# partial: " << report.note << "\n";

  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw ParseError("cannot open '" + tmp + "' for writing");
    f << out.str();
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace platekit
