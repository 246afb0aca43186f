#include "platedpg/estimator.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace platedpg {

ErrorIndicators estimate(const DpgSystem& sys, const Eigen::VectorXd& x, bool parallel) {
  const int nT = sys.mesh().num_triangles();
  ErrorIndicators ind;
  ind.eta2.resize(nT);
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int t = 0; t < nT; ++t) ind.eta2[t] = sys.element_eta2(t, x);
  } else {
    for (int t = 0; t < nT; ++t) ind.eta2[t] = sys.element_eta2(t, x);
  }
  return ind;
}

std::vector<int> mark(const ErrorIndicators& ind, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("mark: theta must be in (0,1]");
  const int nT = int(ind.eta2.size());
  std::vector<int> order(nT);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return ind.eta2[a] > ind.eta2[b]; });
  const double target = theta * ind.eta2.sum();
  std::vector<int> out;
  double acc = 0.0;
  for (int t : order) {
    if (acc >= target || ind.eta2[t] <= 0.0) break;
    out.push_back(t);
    acc += ind.eta2[t];
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace platedpg
