#include "platekit/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "platekit/errors.hpp"

namespace platekit {

namespace {

using json = nlohmann::json;

std::string beta_label(double beta) {
  if (beta == std::floor(beta) && beta < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", beta);
    return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", beta);
  return buf;
}

}  // namespace

StudyConfig StudyConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("study config: invalid JSON: ") + ex.what());
  }
  if (!j.is_object()) throw ConfigError("study config: top level must be an object");

  static const std::set<std::string> known = {"problem", "methods",  "mesh_type", "seed",
                                              "betas",   "levels",   "output_dir"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("study config: unknown key '" + key + "'");

  StudyConfig c;
  try {
    c.problem = j.at("problem").get<std::string>();
    c.methods = j.at("methods").get<std::vector<std::string>>();
    c.levels = j.at("levels").get<std::vector<int>>();
    if (j.contains("mesh_type")) c.mesh_type = j["mesh_type"].get<std::string>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("betas")) c.betas = j["betas"].get<std::vector<double>>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("study config: ") + ex.what());
  }
  c.validate();
  return c;
}

StudyConfig StudyConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open study config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

void StudyConfig::validate() const {
  if (problem != "p1" && problem != "p2")
    throw ConfigError("study config: problem must be 'p1' or 'p2'");
  if (mesh_type != "structured" && mesh_type != "unstructured")
    throw ConfigError("study config: mesh_type must be 'structured' or 'unstructured'");
  if (methods.empty()) throw ConfigError("study config: methods must be nonempty");
  for (const auto& m : methods) MethodSpec::parse(m);  // throws with the valid list
  if (levels.empty()) throw ConfigError("study config: levels must be nonempty");
  for (int n : levels)
    if (n < 1) throw ConfigError("study config: levels must be positive");
  for (double b : betas)
    if (!(b > 0.0)) throw ConfigError("study config: betas must be positive");
}

namespace {

struct FigureSpec {
  std::string file;
  std::string problem;
  std::string mesh_type;
  std::vector<std::string> required;
  bool exact_methods = false;  // restrict rows to the required methods
  bool all_betas = false;      // beta study; otherwise only the first beta
  bool nodal_l2 = false;       // the BPT comparison plots e = u - U
};

void write_figure(const std::string& dir, const FigureSpec& fig,
                  const std::vector<ErrorReport>& reports, double base_beta,
                  std::vector<std::string>& files) {
  std::vector<const ErrorReport*> picked;
  for (const auto& r : reports) {
    if (r.problem != fig.problem || r.mesh_type != fig.mesh_type) continue;
    if (!fig.all_betas && r.beta != base_beta) continue;
    if (fig.exact_methods &&
        std::find(fig.required.begin(), fig.required.end(), r.method) == fig.required.end())
      continue;
    picked.push_back(&r);
  }
  std::set<std::string> methods_present;
  for (const auto* r : picked) methods_present.insert(r->method);
  for (const auto& m : fig.required)
    if (!methods_present.count(m)) return;
  if (fig.all_betas) {
    std::set<double> betas;
    for (const auto* r : picked) betas.insert(r->beta);
    if (betas.size() < 2) return;
  }

  std::ostringstream out;
  out << "method,problem,mesh_type,beta,n,h,ndof,err_l2,err_energy\n";
  char buf[256];
  for (const auto* r : picked) {
    for (const auto& row : r->rows) {
      const double l2 = fig.nodal_l2 ? row.err_l2_nodal : row.err_l2;
      std::snprintf(buf, sizeof buf, "%s,%s,%s,%.12g,%d,%.12g,%d,%.12g,%.12g\n",
                    r->method.c_str(), r->problem.c_str(), r->mesh_type.c_str(), r->beta, row.n,
                    row.h, row.ndof, l2, row.err_energy);
      out << buf;
    }
  }
  if (fig.nodal_l2) out << "# err_l2 column holds the nodal error u - U\n";

  const std::string path = dir + "/" + fig.file;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw ParseError("cannot open '" + tmp + "' for writing");
    f << out.str();
  }
  std::filesystem::rename(tmp, path);
  files.push_back(path);
}

}  // namespace

StudyResult run_study(const StudyConfig& config) {
  std::filesystem::create_directories(config.output_dir);

  ModelProblem problem = config.problem == "p1" ? ModelProblem::p1() : ModelProblem::p2();
  if (problem.id == "p2") attach_p2_reference(problem);

  const MeshProvider provider =
      default_mesh_provider(config.mesh_type, config.seed, 0.2, problem.layout);
  // Meshes are immutable once built; prebuild them before the pool starts.
  for (int n : config.levels) provider(n);

  struct Combo {
    std::string method;
    double beta;
  };
  std::vector<Combo> combos;
  for (const auto& m : config.methods)
    for (double b : config.betas) combos.push_back({m, b});

  std::vector<ErrorReport> reports(combos.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::string first_error;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= combos.size()) return;
      try {
        DgConfig dg;
        dg.beta = combos[i].beta;
        reports[i] = convergence_study(problem, MethodSpec::parse(combos[i].method),
                                       config.mesh_type, config.levels, dg, provider);
      } catch (const std::exception& ex) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty()) first_error = ex.what();
      }
    }
  };

  const unsigned n_threads =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(combos.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!first_error.empty()) throw SolveError("study failed: " + first_error);

  StudyResult result;
  result.reports = std::move(reports);
  for (std::size_t i = 0; i < combos.size(); ++i) {
    const std::string path = config.output_dir + "/" + config.problem + "_" + config.mesh_type +
                             "_" + combos[i].method + "_beta" + beta_label(combos[i].beta) +
                             ".csv";
    write_report_csv(result.reports[i], path);
    result.files.push_back(path);
  }

  const std::string fig_dir = config.output_dir + "/figures";
  std::filesystem::create_directories(fig_dir);
  const double base_beta = config.betas.front();
  const std::vector<FigureSpec> figures = {
      {"fig_bpt_vs_morley.csv", "p1", "structured", {"bpt", "morley"}, true, false, true},
      {"fig_p1_structured_energy.csv", "p1", "structured", {"morley", "fq"}, false, false, false},
      {"fig_p1_structured_l2.csv", "p1", "structured", {"morley", "fq"}, false, false, false},
      {"fig_p1_unstructured_energy.csv", "p1", "unstructured", {"morley", "fq"}, false, false,
       false},
      {"fig_p1_unstructured_l2.csv", "p1", "unstructured", {"morley", "fq"}, false, false, false},
      {"fig_p2_unstructured_energy.csv", "p2", "unstructured", {"morley", "fq"}, false, false,
       false},
      {"fig_p2_unstructured_l2.csv", "p2", "unstructured", {"morley", "fq"}, false, false, false},
      {"fig_p2_unstructured_energy_ndof.csv", "p2", "unstructured", {"morley", "fq"}, false, false,
       false},
      {"fig_p1_beta_study.csv", "p1", "unstructured", {"fq", "dpvc0"}, true, true, false},
  };
  for (const auto& fig : figures)
    write_figure(fig_dir, fig, result.reports, base_beta, result.files);

  return result;
}

}  // namespace platekit
