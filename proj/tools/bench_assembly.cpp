// Benchmark: serial reference vs OpenMP element loops (local DPG systems and
// error indicators), with a bitwise cross-check of the two paths.

#include <chrono>
#include <cstdio>

#include "platedpg/estimator.hpp"
#include "platedpg/problems.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace platedpg;
using Clock = std::chrono::steady_clock;

namespace {
double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}
} // namespace

int main(int argc, char** argv) {
  int levels = (argc > 1) ? std::atoi(argv[1]) : 4;
  Mesh mesh = make_singular_domain_mesh();
  for (int i = 0; i < levels; ++i) mesh = mesh.refine_uniform();
  const auto exact = singular_solution(solve_corner_exponent(5.0 * M_PI / 4.0));
  const ProblemFns fns = exact.problem_fns();
  const SchemeConfig scheme{SchemeKind::Theta, 4, {}};
  const ElementKernel kernel(scheme);
  std::printf("mesh: %d triangles, scheme: theta (test dim %d)\n", mesh.num_triangles(),
              kernel.test_dim());
#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp: not enabled\n");
#endif

  auto t0 = Clock::now();
  const auto serial = element_contributions(mesh, kernel, fns.f, /*parallel=*/false);
  const double t_serial = ms_since(t0);

  t0 = Clock::now();
  const auto parallel = element_contributions(mesh, kernel, fns.f, /*parallel=*/true);
  const double t_parallel = ms_since(t0);

  double max_diff = 0.0;
  for (size_t t = 0; t < serial.size(); ++t) {
    max_diff = std::max(max_diff, (serial[t].K - parallel[t].K).cwiseAbs().maxCoeff());
    max_diff = std::max(max_diff, (serial[t].r - parallel[t].r).cwiseAbs().maxCoeff());
  }
  std::printf("local systems:  serial %8.1f ms | parallel %8.1f ms | speedup %.2fx\n", t_serial,
              t_parallel, t_serial / t_parallel);
  std::printf("cross-check max |serial - parallel| = %.3g (expect exactly 0)\n", max_diff);

  DpgSystem sys(mesh, scheme, fns);
  const auto sol = sys.solve();
  t0 = Clock::now();
  const auto ind_s = estimate(sys, sol.x, false);
  const double e_serial = ms_since(t0);
  t0 = Clock::now();
  const auto ind_p = estimate(sys, sol.x, true);
  const double e_parallel = ms_since(t0);
  std::printf("estimator:      serial %8.1f ms | parallel %8.1f ms | speedup %.2fx\n", e_serial,
              e_parallel, e_serial / e_parallel);
  std::printf("estimator cross-check: %.3g\n",
              (ind_s.eta2 - ind_p.eta2).cwiseAbs().maxCoeff());
  return max_diff == 0.0 ? 0 : 1;
}
