#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "conescale/solver.hpp"

namespace conescale::cli {

using nlohmann::json;

struct RhsSpec {
  // gaussian, shifted_gaussian, one_sided_exp, bump or sampled.
  std::string kind = "gaussian";
  double scale = 1.0;
  double amplitude = 1.0;
  double center = 0.0;
  // Cross-section vector for the Gaussian kinds; empty means the first unit vector.
  Vec vector;
  double rate = 1.0;
  // one_sided_exp: "backward" is theta(-t) e^{rate t}, "forward" theta(t) e^{-rate t}.
  std::string side = "backward";
  double a = -1.0;
  double b = 1.0;
  Mat values;
};

struct PerturbationSpec {
  // rational_decay or none.
  std::string kind = "none";
  double epsilon = 0.0;
  double pole_scale = 10.0;
  int index = 0;
  double sector_vertex = 1.0;
  double sector_angle = kPi / 4;
  std::optional<cplx> eta;
};

struct SolverSpec {
  double res_tol = 1e-6;
  double scale_tol = 1e-6;
  int max_iter = 50;
  std::vector<double> phi;
};

struct ProblemFile {
  int schema_version = 1;
  int degree = 0;
  long dim = 0;
  std::vector<Mat> coefficients;
  std::vector<Mat> norm_forms;
  double cone_angle = kPi / 8;
  cplx cone_vertex = 0.0;
  int cone_orientation = 1;
  cplx weight = 0.0;
  double half_width = 20.0;
  long count = 4096;
  RhsSpec rhs;
  PerturbationSpec perturbation;
  SolverSpec solver;
};

// Strict schema v1 reader; unknown fields and malformed values raise
// ValidationError naming the offending field.
ProblemFile parse_problem(const json& j);
ProblemFile parse_problem_text(const std::string& text);
ProblemFile load_problem(const std::string& path);
// Canonical form with every field spelled out.
json to_json(const ProblemFile& p);

MatrixPencil build_pencil(const ProblemFile& p);
Grid build_grid(const ProblemFile& p);
Cone build_cone(const ProblemFile& p);
// Throws ValidationError for sampled right-hand sides, which only live on R.
Evaluator build_rhs_evaluator(const ProblemFile& p);
bool rhs_is_analytic(const ProblemFile& p);
ConstantProblem build_problem(const ProblemFile& p);
VariableProblem build_variable_problem(const ProblemFile& p);
bool has_perturbation(const ProblemFile& p);

std::string format_double(double v);

// CSV report: "# key=value" metadata, then one or more tables separated by a
// blank line, each introduced by "# table=<name>".
class Report {
 public:
  void meta(const std::string& key, const std::string& value);
  void meta(const std::string& key, double value);
  void begin_table(const std::string& name, std::vector<std::string> header);
  void row(std::vector<std::string> cells);
  void row(const std::vector<double>& cells);
  std::string render() const;

 private:
  struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
  };
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<Table> tables_;
};

struct Options {
  std::string command;
  std::string problem_path;
  std::string out;
  std::optional<double> radius;
  std::optional<double> scaled;
  std::string suite = "parseval";
  std::string support = "backward";
  int n = 16;
  double phi = kPi / 16;
  std::string problem_out;
  std::string solution_out;
};

// Runs one subcommand; the report goes to `out`, diagnostics to `err`.
// Returns the process exit code.
int run(const Options& options, std::ostream& out, std::ostream& err);

// Cylinder demo problem: A(lambda) = L_h + lambda^2 I with the Dirichlet
// second-difference matrix on n interior points of (0, 1).
ProblemFile cylinder_problem(int n, double phi);

}  // namespace conescale::cli
