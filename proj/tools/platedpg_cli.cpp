// Command-line driver: convergence studies (solve), Fortin certification
// (fortin-verify) and log-log slope fitting of study CSVs (slopes).

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "platedpg/fortin.hpp"
#include "platedpg/study.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace platedpg;

namespace {

int cmd_solve(const std::string& scheme, const std::string& refine, const std::string& problem,
              int levels, long budget, double theta_mark, int plain_deg, const std::string& out,
              uint64_t seed, int threads, const std::string& dump_mesh) {
  RunConfig cfg;
  cfg.scheme = (scheme == "plain") ? SchemeKind::Plain : SchemeKind::Theta;
  cfg.refine = (refine == "adaptive") ? RefineMode::Adaptive : RefineMode::Uniform;
  cfg.problem = (problem == "smooth") ? ProblemKind::Smooth : ProblemKind::Singular;
  cfg.levels = levels;
  cfg.budget_dofs = budget;
  cfg.theta_mark = theta_mark;
  cfg.plain_tensor_degree = plain_deg;
  cfg.seed = seed;
  cfg.parallel = threads != 1;
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif
  try {
    const auto recs = run_study(cfg);
    if (out.empty() || out == "-") {
      write_csv(std::cout, recs, cfg.scheme);
    } else {
      std::ofstream os(out);
      if (!os) {
        std::cerr << "error: cannot open output file " << out << "\n";
        return 2;
      }
      write_csv(os, recs, cfg.scheme);
    }
    if (!dump_mesh.empty()) {
      // re-run the mesh hierarchy to dump the final mesh
      Mesh mesh = (cfg.problem == ProblemKind::Singular) ? make_singular_domain_mesh()
                                                         : make_unit_square_mesh();
      for (size_t i = 0; i + 1 < recs.size(); ++i) {
        if (cfg.refine == RefineMode::Uniform)
          mesh = mesh.refine_uniform();
        else
          mesh = mesh.refine(recs[i].marked);
      }
      std::ofstream ms(dump_mesh);
      if (!ms) {
        std::cerr << "error: cannot open mesh dump file " << dump_mesh << "\n";
        return 2;
      }
      mesh.dump(ms);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_fortin_verify(double tol, int samples, uint64_t seed) {
  try {
    FortinOperators fortin;
    const auto cert = fortin.certify();
    const auto orth = fortin.verify_orthogonality(samples, seed);
    const auto bnd = fortin.verify_boundedness(std::max(10, samples / 4), seed);
    std::printf("fortin certification report\n");
    std::printf("  dual basis: |det A| = %.6e  |det A3| = %.6e\n", std::abs(cert.det_A),
                std::abs(cert.det_A3));
    std::printf("  dual basis structure: A1 below-diag %.2e, lower-left block %.2e\n",
                cert.A1_subdiag_max, cert.A_lower_left_max);
    std::printf("  constraint block Div,div: %dx%d  sigma_min = %.6e\n",
                cert.divdiv_vector.rows, cert.divdiv_vector.cols, cert.divdiv_vector.sigma_min);
    std::printf("  constraint block div div: %dx%d  sigma_min = %.6e\n", cert.ddiv.rows,
                cert.ddiv.cols, cert.ddiv.sigma_min);
    for (const auto& [name, v] : orth.residuals)
      std::printf("  orthogonality %-12s max residual = %.3e\n", name.c_str(), v);
    std::printf("  boundedness max ratio = %.4f (per h:", bnd.max_ratio);
    for (double v : bnd.max_ratio_per_h) std::printf(" %.4f", v);
    std::printf("), variation %.1f%%\n", 100.0 * bnd.ratio_variation);
    std::printf("  discrete-input reproduction deviation = %.3e\n", bnd.discrete_identity_dev);
    std::printf("  transform equivariance drift across h = %.3e\n", bnd.equivariance_dev);
    bool ok = cert.pass(1e-8);
    if (!ok) std::printf("FAILED blocks: %s\n", cert.failed_blocks(1e-8).c_str());
    if (orth.max_all() > tol) {
      std::printf("FAILED orthogonality: max residual %.3e > %.3e\n", orth.max_all(), tol);
      ok = false;
    }
    std::printf(ok ? "PASS\n" : "FAIL\n");
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_slopes(const std::string& path, const std::string& column, int window) {
  try {
    const double s = fit_slope_csv(path, column, window);
    std::printf("%.10f\n", s);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ultraweak DPG solver for the clamped Kirchhoff-Love plate"};
  app.require_subcommand(1);

  std::string scheme = "theta", refine = "uniform", problem = "singular", out, dump_mesh;
  int levels = 6, threads = 0, plain_deg = 4, window = 4, samples = 100;
  long budget = 0;
  double theta_mark = 0.7, tol = 1e-10;
  uint64_t seed = 12345;
  std::string csv_path, column = "eta";

  auto* solve = app.add_subcommand("solve", "run a refinement study, emit CSV");
  solve->add_option("--scheme", scheme, "theta|plain")->check(CLI::IsMember({"theta", "plain"}));
  solve->add_option("--refine", refine, "uniform|adaptive")
      ->check(CLI::IsMember({"uniform", "adaptive"}));
  solve->add_option("--problem", problem, "singular|smooth")
      ->check(CLI::IsMember({"singular", "smooth"}));
  solve->add_option("--levels", levels, "number of levels (cap when budget set)");
  solve->add_option("--budget-dofs", budget, "stop once ndof reaches this");
  solve->add_option("--theta-mark", theta_mark, "bulk marking parameter")
      ->check(CLI::Range(1e-9, 1.0));
  solve->add_option("--plain-tensor-degree", plain_deg, "tensor test degree for plain scheme")
      ->check(CLI::IsMember({2, 4}));
  solve->add_option("--out", out, "CSV output path (default stdout)");
  solve->add_option("--seed", seed, "seed recorded for property suites");
  solve->add_option("--threads", threads, "0 = default, 1 = serial reference path");
  solve->add_option("--dump-mesh", dump_mesh, "write the final mesh (plain text)");

  auto* fv = app.add_subcommand("fortin-verify", "certify the Fortin constructions");
  fv->add_option("--tol", tol, "orthogonality residual tolerance");
  fv->add_option("--samples", samples, "random surrogate count");
  fv->add_option("--seed", seed, "rng seed");

  auto* sl = app.add_subcommand("slopes", "least-squares log-log slope of a CSV column");
  sl->add_option("csv", csv_path, "CSV file from solve")->required();
  sl->add_option("--column", column, "column name (default eta)");
  sl->add_option("--window", window, "fit over the last N rows (0 = all)");

  CLI11_PARSE(app, argc, argv);

  if (budget > 0 && !solve->count("--levels")) levels = 1000;
  if (solve->parsed())
    return cmd_solve(scheme, refine, problem, levels, budget, theta_mark, plain_deg, out, seed,
                     threads, dump_mesh);
  if (fv->parsed()) return cmd_fortin_verify(tol, samples, seed);
  if (sl->parsed()) return cmd_slopes(csv_path, column, window);
  return 2;
}
