#ifndef PLATEDPG_ESTIMATOR_HPP
#define PLATEDPG_ESTIMATOR_HPP

#include <vector>

#include "platedpg/dpg_core.hpp"

namespace platedpg {

/// Elementwise DPG energy-residual indicators eta(T)^2 = r_T^T G_T^{-1} r_T.
struct ErrorIndicators {
  Eigen::VectorXd eta2;
  double total() const { return std::sqrt(eta2.sum()); }
};

ErrorIndicators estimate(const DpgSystem& sys, const Eigen::VectorXd& x, bool parallel = true);

/// Greedy minimal bulk (Doerfler) marking: smallest set with
/// sum of marked eta(T)^2 >= theta * eta^2; ties broken by element id.
std::vector<int> mark(const ErrorIndicators& ind, double theta);

} // namespace platedpg

#endif
