#include "platedpg/study.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace platedpg {

std::vector<LevelRecord> run_study(const RunConfig& cfg) {
  ManufacturedSolution exact = (cfg.problem == ProblemKind::Singular)
                                   ? singular_solution(solve_corner_exponent(5.0 * M_PI / 4.0))
                                   : smooth_solution();
  Mesh mesh = (cfg.problem == ProblemKind::Singular) ? make_singular_domain_mesh()
                                                     : make_unit_square_mesh();
  SchemeConfig scheme;
  scheme.kind = cfg.scheme;
  scheme.plain_tensor_degree = cfg.plain_tensor_degree;
  const ProblemFns fns = exact.problem_fns();

  std::vector<LevelRecord> out;
  for (int level = 0;; ++level) {
    const auto t0 = std::chrono::steady_clock::now();
    DpgSystem sys(mesh, scheme, fns, cfg.parallel);
    const SolveReport sol = sys.solve();
    const ErrorIndicators ind = estimate(sys, sol.x, cfg.parallel);
    const FieldErrors errs = measure_errors(sys, sol.x, exact);
    LevelRecord rec;
    rec.level = level;
    rec.ndof = sys.n_free();
    rec.ntri = mesh.num_triangles();
    rec.h_max = mesh.max_diameter();
    rec.eta = ind.total();
    rec.err_u = errs.u;
    rec.err_theta = errs.theta;
    rec.err_M = errs.M;
    if (cfg.refine == RefineMode::Adaptive) rec.marked = mark(ind, cfg.theta_mark);
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(rec);
    const bool stop = (cfg.budget_dofs > 0 && rec.ndof >= cfg.budget_dofs) ||
                      (level + 1 >= cfg.levels);
    if (stop) break;
    if (cfg.refine == RefineMode::Uniform)
      mesh = mesh.refine_uniform();
    else if (!rec.marked.empty())
      mesh = mesh.refine(rec.marked);
    else
      break; // estimator vanished: nothing to refine
  }
  return out;
}

namespace {
std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}
} // namespace

void write_csv(std::ostream& os, const std::vector<LevelRecord>& recs, SchemeKind scheme) {
  os << "level,ndof,h_max,eta,err_u,err_theta,err_M,wall_ms\n";
  for (const auto& r : recs) {
    os << r.level << ',' << r.ndof << ',' << fmt_g(r.h_max) << ',' << fmt_g(r.eta) << ','
       << fmt_g(r.err_u) << ',';
    if (scheme == SchemeKind::Theta) os << fmt_g(r.err_theta);
    os << ',' << fmt_g(r.err_M) << ',' << fmt_g(r.wall_ms) << '\n';
  }
}

double fit_slope(const std::vector<double>& ndof, const std::vector<double>& value, int window) {
  const int n = int(ndof.size());
  if (n != int(value.size()) || n < 2) throw std::invalid_argument("fit_slope: need >= 2 rows");
  int start = 0;
  if (window > 0 && window < n) start = n - window;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int i = start; i < n; ++i) {
    if (!(ndof[i] > 0.0) || !(value[i] > 0.0))
      throw std::invalid_argument("fit_slope: nonpositive data");
    const double x = std::log(ndof[i]), y = std::log(value[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) throw std::invalid_argument("fit_slope: window too small");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double fit_slope_records(const std::vector<LevelRecord>& recs, const std::string& column,
                         int window) {
  std::vector<double> nd, val;
  for (const auto& r : recs) {
    nd.push_back(double(r.ndof));
    if (column == "eta") val.push_back(r.eta);
    else if (column == "err_u") val.push_back(r.err_u);
    else if (column == "err_theta") val.push_back(r.err_theta);
    else if (column == "err_M") val.push_back(r.err_M);
    else if (column == "h_max") val.push_back(r.h_max);
    else throw std::invalid_argument("fit_slope_records: unknown column " + column);
  }
  return fit_slope(nd, val, window);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  CsvTable tab;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV file: " + path);
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) tab.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    while (std::getline(ls, cell, ','))
      row.push_back(cell.empty() ? std::nan("") : std::stod(cell));
    while (row.size() < tab.header.size()) row.push_back(std::nan(""));
    if (row.size() != tab.header.size())
      throw std::runtime_error("malformed CSV row in " + path);
    tab.rows.push_back(row);
  }
  return tab;
}

double fit_slope_csv(const std::string& path, const std::string& column, int window) {
  const CsvTable tab = read_csv(path);
  int ci = -1, ni = -1;
  for (int i = 0; i < int(tab.header.size()); ++i) {
    if (tab.header[i] == column) ci = i;
    if (tab.header[i] == "ndof") ni = i;
  }
  if (ci < 0 || ni < 0)
    throw std::runtime_error("CSV column not found: " + column);
  std::vector<double> nd, val;
  for (const auto& r : tab.rows) {
    nd.push_back(r[ni]);
    val.push_back(r[ci]);
  }
  return fit_slope(nd, val, window);
}

} // namespace platedpg
