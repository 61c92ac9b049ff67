// platekit command line: mesh generation, single solves, convergence studies.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "platekit/analysis.hpp"
#include "platekit/errors.hpp"
#include "platekit/mesh.hpp"
#include "platekit/study.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitConfig = 4;

using namespace platekit;

BcLayout layout_from_name(const std::string& name) {
  if (name == "all-s") return BcLayout::all_simply_supported();
  if (name == "all-c") return BcLayout::all_clamped();
  if (name == "all-f") return BcLayout::all_free();
  if (name == "p1") return BcLayout::all_simply_supported();
  if (name == "p2") return BcLayout::mixed_sscf();
  throw ConfigError("unknown boundary layout '" + name + "' (all-s, all-c, all-f, p1, p2)");
}

struct MeshArgs {
  bool structured = false;
  bool unstructured = false;
  bool degenerate_demo = false;
  bool demo_fixed = false;
  int n = 0;
  std::uint64_t seed = 1;
  double jitter = 0.2;
  std::string bc = "all-s";
  std::string mesh_file;

  Mesh build() const {
    Mesh mesh;
    if (!mesh_file.empty()) {
      std::vector<std::string> warnings;
      mesh = read_mesh(mesh_file, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      return mesh;  // tags come from the file
    }
    if (degenerate_demo || demo_fixed) {
      mesh = build_degenerate_demo_mesh(!demo_fixed);
    } else if (structured) {
      mesh = build_structured_mesh(n);
    } else if (unstructured) {
      mesh = build_unstructured_mesh(n, seed, jitter);
    } else {
      throw ConfigError("choose --structured, --unstructured, --degenerate-demo or --mesh FILE");
    }
    tag_boundary(mesh, layout_from_name(bc));
    return mesh;
  }
};

void add_mesh_source_flags(CLI::App* cmd, MeshArgs& args, bool allow_file) {
  cmd->add_flag("--structured", args.structured, "structured right-triangle grid");
  cmd->add_flag("--unstructured", args.unstructured, "jittered Delaunay grid");
  cmd->add_flag("--degenerate-demo", args.degenerate_demo,
                "hand-built mesh with a degenerate patch");
  cmd->add_flag("--degenerate-demo-fixed", args.demo_fixed,
                "variant of the demo mesh with the degeneracy removed");
  cmd->add_option("--n", args.n, "subdivisions per side")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", args.seed, "RNG seed for jittered meshes");
  cmd->add_option("--jitter", args.jitter, "jitter as a fraction of h (0..0.3)");
  cmd->add_option("--bc", args.bc, "boundary layout: all-s, all-c, all-f, p1, p2");
  if (allow_file) cmd->add_option("--mesh", args.mesh_file, "read mesh from file");
}

int run(int argc, char** argv) {
  CLI::App app{"platekit: thin-plate bending with reconstructed quadratic deflections"};
  app.require_subcommand(1);

  // --- mesh ---
  MeshArgs mesh_args;
  std::string mesh_out = "mesh.txt";
  CLI::App* cmd_mesh = app.add_subcommand("mesh", "generate and write a mesh");
  add_mesh_source_flags(cmd_mesh, mesh_args, false);
  cmd_mesh->add_option("-o,--output", mesh_out, "output file");

  // --- solve ---
  MeshArgs solve_mesh;
  std::string method_name = "fq", problem_name = "p1", penalty_proj = "p0";
  double beta = 100.0;
  int quad_degree = 4;
  std::string dump_field, dump_patches, dump_recon, dump_matrix;
  bool nodal_l2 = false;
  CLI::App* cmd_solve = app.add_subcommand("solve", "solve one problem on one mesh");
  add_mesh_source_flags(cmd_solve, solve_mesh, true);
  cmd_solve->add_option("--method", method_name, "fq, lsfq, morley, bpt, dpv, dpvc0");
  cmd_solve->add_option("--problem", problem_name, "p1 or p2")
      ->check(CLI::IsMember({"p1", "p2"}));
  cmd_solve->add_option("--beta", beta, "penalty parameter");
  cmd_solve->add_option("--penalty-proj", penalty_proj, "p0 or p1")
      ->check(CLI::IsMember({"p0", "p1"}));
  cmd_solve->add_option("--quad-degree", quad_degree, "load quadrature degree");
  cmd_solve->add_option("--dump-field", dump_field, "write per-element quadratic coefficients");
  cmd_solve->add_option("--dump-patches", dump_patches, "write patch diagnostics CSV");
  cmd_solve->add_option("--dump-recon", dump_recon,
                        "write per-element reproduction residuals CSV (recon families)");
  cmd_solve->add_option("--dump-matrix", dump_matrix, "write the assembled matrix (MatrixMarket)");
  cmd_solve->add_flag("--nodal-l2", nodal_l2, "also print the u - U error (recon families)");

  // --- study ---
  std::string config_path;
  CLI::App* cmd_study = app.add_subcommand("study", "run a convergence study from a JSON config");
  cmd_study->add_option("config", config_path, "JSON config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      app.exit(e);
      return 0;
    }
    std::cerr << e.what() << "\n";
    std::cerr << app.help() << "\n";
    return kExitUsage;
  }

  if (cmd_mesh->parsed()) {
    Mesh mesh = mesh_args.build();
    validate_mesh(mesh);
    write_mesh(mesh, mesh_out);
    std::printf("wrote %s: %d vertices, %d triangles, h=%.6g\n", mesh_out.c_str(),
                mesh.n_vertices(), mesh.n_triangles(), mesh.h);
    return 0;
  }

  if (cmd_solve->parsed()) {
    Mesh mesh;
    ModelProblem problem = problem_name == "p1" ? ModelProblem::p1() : ModelProblem::p2();
    if (solve_mesh.mesh_file.empty() && solve_mesh.bc == "all-s" && problem.id == "p2")
      solve_mesh.bc = "p2";
    mesh = solve_mesh.build();
    if (problem.id == "p2") attach_p2_reference(problem);

    MethodSpec method = MethodSpec::parse(method_name);
    DgConfig config;
    config.beta = beta;
    config.penalty_projection =
        penalty_proj == "p1" ? PenaltyProjection::P1 : PenaltyProjection::P0;
    config.quadrature_degree = quad_degree;

    ReconstructionSet recon;
    const ReconstructionSet* recon_ptr = nullptr;
    if (method.uses_reconstruction()) {
      recon = build_method_reconstruction(mesh, method);
      recon_ptr = &recon;
      if (!dump_patches.empty()) write_patch_diagnostics(recon.patches, dump_patches);
      if (!dump_recon.empty()) write_reproduction_diagnostics(mesh, recon, dump_recon);
    }

    SparseSystem system = assemble(mesh, method, problem.material, config, recon_ptr);
    if (!dump_matrix.empty()) write_matrix_market(system, dump_matrix);
    assemble_load(system, mesh, problem.load);
    Solution sol = solve(system, mesh);

    const double err_l2 = l2_error(mesh, sol.reconstructed, *problem.exact);
    const double err_energy =
        energy_error(mesh, sol.reconstructed, *problem.exact, problem.material).total();
    std::printf("h=%.12g ndof=%d err_l2=%.12g err_energy=%.12g", mesh.h, sol.n_free, err_l2,
                err_energy);
    if (nodal_l2 && method.uses_reconstruction())
      std::printf(" err_l2_nodal=%.12g", l2_error_nodal_linear(mesh, sol, *problem.exact));
    std::printf("\n");

    if (!dump_field.empty()) {
      std::FILE* f = std::fopen(dump_field.c_str(), "w");
      if (!f) throw ConfigError("cannot open '" + dump_field + "' for writing");
      std::fprintf(f, "element,v0x,v0y,v1x,v1y,v2x,v2y,c0,c1,c2,c3,c4,c5\n");
      for (int k = 0; k < mesh.n_triangles(); ++k) {
        const auto& t = mesh.triangles[k];
        std::fprintf(f, "%d", k);
        for (int i = 0; i < 3; ++i)
          std::fprintf(f, ",%.12g,%.12g", mesh.vertices[t[i]].x, mesh.vertices[t[i]].y);
        for (int i = 0; i < 6; ++i) std::fprintf(f, ",%.12g", sol.reconstructed[k].coeffs[i]);
        std::fprintf(f, "\n");
      }
      std::fclose(f);
    }
    return 0;
  }

  if (cmd_study->parsed()) {
    StudyConfig config = StudyConfig::from_json_file(config_path);
    StudyResult result = run_study(config);
    for (const auto& f : result.files) std::printf("wrote %s\n", f.c_str());
    return 0;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const DegeneratePatchError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitNumerical;
  } catch (const UnrecoverablePatchError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitNumerical;
  } catch (const SolveError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitNumerical;
  } catch (const ConfigError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& ex) {
    std::cerr << "internal error: " << ex.what() << "\n";
    return 1;
  }
}
