#ifndef PLATEDPG_STUDY_HPP
#define PLATEDPG_STUDY_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "platedpg/dpg_core.hpp"
#include "platedpg/estimator.hpp"
#include "platedpg/problems.hpp"

namespace platedpg {

enum class RefineMode { Uniform, Adaptive };
enum class ProblemKind { Singular, Smooth };

struct RunConfig {
  SchemeKind scheme = SchemeKind::Theta;
  RefineMode refine = RefineMode::Uniform;
  ProblemKind problem = ProblemKind::Singular;
  int levels = 6;
  long budget_dofs = 0; ///< 0: no budget, stop by levels
  double theta_mark = 0.7;
  int plain_tensor_degree = 4;
  bool parallel = true;
  uint64_t seed = 0; ///< used by property suites only; recorded for provenance
};

struct LevelRecord {
  int level = 0;
  int ndof = 0;
  int ntri = 0;
  double h_max = 0.0;
  double eta = 0.0;
  double err_u = 0.0;
  double err_theta = 0.0;
  double err_M = 0.0;
  double wall_ms = 0.0;
  std::vector<int> marked; ///< adaptive runs: the marked set of this level
};

/// SOLVE -> ESTIMATE -> (MARK -> REFINE) loop; one record per level. Stops
/// after `levels` solves or when ndof exceeds the budget (that level is
/// still recorded).
std::vector<LevelRecord> run_study(const RunConfig& cfg);

/// CSV schema: level,ndof,h_max,eta,err_u,err_theta,err_M,wall_ms with
/// err_theta empty for the plain scheme.
void write_csv(std::ostream& os, const std::vector<LevelRecord>& recs, SchemeKind scheme);

/// Least-squares slope of log(column) vs log(ndof) over the last
/// `window` records (window <= 0 or > size: all records).
double fit_slope(const std::vector<double>& ndof, const std::vector<double>& value, int window);
double fit_slope_records(const std::vector<LevelRecord>& recs, const std::string& column,
                         int window);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows; ///< empty cells parse as NaN
};
CsvTable read_csv(const std::string& path);
/// Slope of log(column) vs log(ndof) from a written CSV file.
double fit_slope_csv(const std::string& path, const std::string& column, int window);

} // namespace platedpg

#endif
