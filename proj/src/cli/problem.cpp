#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "conescale/cli.hpp"
#include "conescale/error.hpp"

namespace conescale::cli {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

// Object view that remembers which keys were read and rejects the rest.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& get(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(join(path_, key), "missing required field");
    return j_.at(key);
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(join(path_, it.key()), "unknown field");
  }

  void allow(const std::string& key) { seen_.insert(key); }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

long integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

cplx complex_pair(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(path, "expected a [re, im] pair of numbers");
  const cplx z(j[0].get<double>(), j[1].get<double>());
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) fail(path, "expected finite values");
  return z;
}

Mat complex_matrix(const json& j, const std::string& path, long rows, long cols) {
  if (!j.is_array()) fail(path, "expected an array of rows");
  if (rows >= 0 && static_cast<long>(j.size()) != rows)
    fail(path, "expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()));
  if (j.empty()) fail(path, "matrix has no rows");
  long width = -1;
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array()) fail(index(path, r), "expected a row array");
    const long w = static_cast<long>(j[r].size());
    if (width < 0) width = w;
    if (w != width) fail(index(path, r), "rows have different lengths (array is not rectangular)");
  }
  if (cols >= 0 && width != cols)
    fail(path, "expected " + std::to_string(cols) + " columns, got " + std::to_string(width));
  Mat M(static_cast<long>(j.size()), width);
  for (std::size_t r = 0; r < j.size(); ++r)
    for (long c = 0; c < width; ++c)
      M(static_cast<long>(r), c) = complex_pair(j[r][c], index(index(path, r), c));
  return M;
}

Vec complex_vector(const json& j, const std::string& path, long size) {
  if (!j.is_array()) fail(path, "expected an array");
  if (static_cast<long>(j.size()) != size)
    fail(path, "expected " + std::to_string(size) + " entries, got " + std::to_string(j.size()));
  Vec v(size);
  for (long i = 0; i < size; ++i) v(i) = complex_pair(j[i], index(path, i));
  return v;
}

json pair(cplx z) { return json::array({z.real(), z.imag()}); }

json matrix(const Mat& M) {
  json rows = json::array();
  for (long r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (long c = 0; c < M.cols(); ++c) row.push_back(pair(M(r, c)));
    rows.push_back(row);
  }
  return rows;
}

void parse_pencil(Node n, ProblemFile& p) {
  p.degree = static_cast<int>(integer(n.get("degree"), n.path("degree")));
  if (p.degree < 1) fail(n.path("degree"), "must be at least 1");
  p.dim = integer(n.get("dim"), n.path("dim"));
  if (p.dim < 1) fail(n.path("dim"), "must be at least 1");
  const json& cs = n.get("coefficients");
  if (!cs.is_array() || static_cast<int>(cs.size()) != p.degree + 1)
    fail(n.path("coefficients"), "expected degree + 1 = " + std::to_string(p.degree + 1) + " matrices");
  for (std::size_t j = 0; j < cs.size(); ++j)
    p.coefficients.push_back(complex_matrix(cs[j], index(n.path("coefficients"), j), p.dim, p.dim));
  if (n.has("norm_forms")) {
    const json& hs = n.get("norm_forms");
    if (!hs.is_array() || static_cast<int>(hs.size()) != p.degree + 1)
      fail(n.path("norm_forms"), "expected degree + 1 = " + std::to_string(p.degree + 1) + " matrices");
    for (std::size_t j = 0; j < hs.size(); ++j)
      p.norm_forms.push_back(complex_matrix(hs[j], index(n.path("norm_forms"), j), p.dim, p.dim));
  }
  n.finish();
}

void parse_geometry(Node n, ProblemFile& p) {
  Node c(n.get("cone"), n.path("cone"));
  p.cone_angle = number(c.get("angle"), c.path("angle"));
  if (!(p.cone_angle > 0.0 && p.cone_angle < kPi / 2)) fail(c.path("angle"), "must lie in (0, pi/2)");
  p.cone_vertex = complex_pair(c.get("vertex"), c.path("vertex"));
  p.cone_orientation = static_cast<int>(integer(c.get("orientation"), c.path("orientation")));
  if (p.cone_orientation != 1 && p.cone_orientation != -1) fail(c.path("orientation"), "must be 1 or -1");
  c.finish();
  p.weight = complex_pair(n.get("weight"), n.path("weight"));
  n.finish();
}

void parse_grid(Node n, ProblemFile& p) {
  p.half_width = number(n.get("half_width"), n.path("half_width"));
  if (!(p.half_width > 0.0)) fail(n.path("half_width"), "must be positive");
  p.count = integer(n.get("count"), n.path("count"));
  if (p.count < 2) fail(n.path("count"), "must be at least 2");
  n.finish();
}

void parse_rhs(Node n, ProblemFile& p) {
  RhsSpec& r = p.rhs;
  r.kind = text(n.get("kind"), n.path("kind"));
  auto opt = [&](const std::string& key, double& v) {
    if (n.has(key)) v = number(n.get(key), n.path(key));
  };
  if (r.kind == "gaussian" || r.kind == "shifted_gaussian") {
    opt("scale", r.scale);
    if (!(r.scale > 0.0)) fail(n.path("scale"), "must be positive");
    opt("amplitude", r.amplitude);
    if (r.kind == "shifted_gaussian") r.center = number(n.get("center"), n.path("center"));
    if (n.has("vector")) r.vector = complex_vector(n.get("vector"), n.path("vector"), p.dim);
  } else if (r.kind == "one_sided_exp") {
    opt("rate", r.rate);
    if (!(r.rate > 0.0)) fail(n.path("rate"), "must be positive");
    if (n.has("side")) r.side = text(n.get("side"), n.path("side"));
    if (r.side != "backward" && r.side != "forward") fail(n.path("side"), "must be backward or forward");
  } else if (r.kind == "bump") {
    opt("a", r.a);
    opt("b", r.b);
    if (!(r.a < r.b)) fail(n.path("b"), "must exceed a");
  } else if (r.kind == "sampled") {
    r.values = complex_matrix(n.get("values"), n.path("values"), p.count, p.dim);
  } else {
    fail(n.path("kind"), "unknown right-hand side kind '" + r.kind + "'");
  }
  n.finish();
}

void parse_perturbation(Node n, ProblemFile& p) {
  PerturbationSpec& q = p.perturbation;
  q.kind = text(n.get("kind"), n.path("kind"));
  if (q.kind == "rational_decay") {
    q.epsilon = number(n.get("epsilon"), n.path("epsilon"));
    q.pole_scale = number(n.get("pole_scale"), n.path("pole_scale"));
    if (!(q.pole_scale > 0.0)) fail(n.path("pole_scale"), "must be positive");
    if (n.has("index")) q.index = static_cast<int>(integer(n.get("index"), n.path("index")));
    if (q.index < 0 || q.index > p.degree) fail(n.path("index"), "must lie in [0, degree]");
    if (n.has("sector_vertex")) q.sector_vertex = number(n.get("sector_vertex"), n.path("sector_vertex"));
    if (n.has("sector_angle")) q.sector_angle = number(n.get("sector_angle"), n.path("sector_angle"));
    if (!(q.sector_angle > 0.0 && q.sector_angle < kPi / 2))
      fail(n.path("sector_angle"), "must lie in (0, pi/2)");
    if (n.has("eta")) q.eta = complex_pair(n.get("eta"), n.path("eta"));
  } else if (q.kind != "none") {
    fail(n.path("kind"), "unknown perturbation kind '" + q.kind + "'");
  }
  n.finish();
}

void parse_solver(Node n, ProblemFile& p) {
  SolverSpec& s = p.solver;
  if (n.has("res_tol")) s.res_tol = number(n.get("res_tol"), n.path("res_tol"));
  if (n.has("scale_tol")) s.scale_tol = number(n.get("scale_tol"), n.path("scale_tol"));
  if (n.has("max_iter")) s.max_iter = static_cast<int>(integer(n.get("max_iter"), n.path("max_iter")));
  if (!(s.res_tol > 0.0)) fail(n.path("res_tol"), "must be positive");
  if (!(s.scale_tol > 0.0)) fail(n.path("scale_tol"), "must be positive");
  if (s.max_iter < 1) fail(n.path("max_iter"), "must be at least 1");
  if (n.has("phi")) {
    const json& a = n.get("phi");
    if (!a.is_array()) fail(n.path("phi"), "expected an array of angles");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double phi = number(a[i], index(n.path("phi"), i));
      if (!(phi >= 0.0 && phi < kPi / 2)) fail(index(n.path("phi"), i), "must lie in [0, pi/2)");
      s.phi.push_back(phi);
    }
  }
  n.finish();
}

}  // namespace

ProblemFile parse_problem(const json& j) {
  Node root(j, "");
  ProblemFile p;
  const long version = integer(root.get("schema_version"), "schema_version");
  if (version != 1) fail("schema_version", "unsupported version " + std::to_string(version) + " (expected 1)");
  parse_pencil(Node(root.get("pencil"), "pencil"), p);
  parse_geometry(Node(root.get("geometry"), "geometry"), p);
  parse_grid(Node(root.get("grid"), "grid"), p);
  parse_rhs(Node(root.get("rhs"), "rhs"), p);
  if (root.has("perturbation")) parse_perturbation(Node(root.get("perturbation"), "perturbation"), p);
  if (root.has("solver")) parse_solver(Node(root.get("solver"), "solver"), p);
  root.finish();
  return p;
}

ProblemFile parse_problem_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
  return parse_problem(j);
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path + ": cannot open problem file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem_text(buf.str());
}

json to_json(const ProblemFile& p) {
  json j;
  j["schema_version"] = p.schema_version;
  json pencil;
  pencil["degree"] = p.degree;
  pencil["dim"] = p.dim;
  pencil["coefficients"] = json::array();
  for (const Mat& A : p.coefficients) pencil["coefficients"].push_back(matrix(A));
  if (!p.norm_forms.empty()) {
    pencil["norm_forms"] = json::array();
    for (const Mat& H : p.norm_forms) pencil["norm_forms"].push_back(matrix(H));
  }
  j["pencil"] = pencil;
  j["geometry"] = {{"cone", {{"angle", p.cone_angle}, {"vertex", pair(p.cone_vertex)},
                             {"orientation", p.cone_orientation}}},
                   {"weight", pair(p.weight)}};
  j["grid"] = {{"half_width", p.half_width}, {"count", p.count}};

  const RhsSpec& r = p.rhs;
  json rhs = {{"kind", r.kind}};
  if (r.kind == "gaussian" || r.kind == "shifted_gaussian") {
    rhs["scale"] = r.scale;
    rhs["amplitude"] = r.amplitude;
    if (r.kind == "shifted_gaussian") rhs["center"] = r.center;
    if (r.vector.size()) {
      rhs["vector"] = json::array();
      for (long i = 0; i < r.vector.size(); ++i) rhs["vector"].push_back(pair(r.vector(i)));
    }
  } else if (r.kind == "one_sided_exp") {
    rhs["rate"] = r.rate;
    rhs["side"] = r.side;
  } else if (r.kind == "bump") {
    rhs["a"] = r.a;
    rhs["b"] = r.b;
  } else if (r.kind == "sampled") {
    rhs["values"] = matrix(r.values);
  }
  j["rhs"] = rhs;

  const PerturbationSpec& q = p.perturbation;
  json pert = {{"kind", q.kind}};
  if (q.kind == "rational_decay") {
    pert["epsilon"] = q.epsilon;
    pert["pole_scale"] = q.pole_scale;
    pert["index"] = q.index;
    pert["sector_vertex"] = q.sector_vertex;
    pert["sector_angle"] = q.sector_angle;
    if (q.eta) pert["eta"] = pair(*q.eta);
  }
  j["perturbation"] = pert;
  j["solver"] = {{"res_tol", p.solver.res_tol},
                 {"scale_tol", p.solver.scale_tol},
                 {"max_iter", p.solver.max_iter},
                 {"phi", p.solver.phi}};
  return j;
}

MatrixPencil build_pencil(const ProblemFile& p) { return MatrixPencil(p.coefficients, p.norm_forms); }

Grid build_grid(const ProblemFile& p) { return Grid(p.half_width, p.count); }

Cone build_cone(const ProblemFile& p) {
  return Cone(p.cone_angle, p.cone_vertex, p.cone_orientation);
}

bool rhs_is_analytic(const ProblemFile& p) {
  return p.rhs.kind == "gaussian" || p.rhs.kind == "shifted_gaussian";
}

Evaluator build_rhs_evaluator(const ProblemFile& p) {
  const RhsSpec r = p.rhs;
  const long n = p.dim;
  if (r.kind == "gaussian" || r.kind == "shifted_gaussian") {
    Vec shape = r.vector.size() ? r.vector : Vec(Vec::Unit(n, 0));
    return [r, shape](cplx z) -> Vec {
      const cplx s = (z - r.center) / r.scale;
      return (r.amplitude * std::exp(-s * s)) * shape;
    };
  }
  if (r.kind == "one_sided_exp") {
    return [r, n](cplx z) -> Vec {
      if (std::abs(z.imag()) > 0.0)
        throw ValidationError("one_sided_exp right-hand side is only defined on the real line");
      const double t = z.real();
      Vec v = Vec::Zero(n);
      if (r.side == "backward" && t <= 0.0) v(0) = std::exp(r.rate * t);
      if (r.side == "forward" && t >= 0.0) v(0) = std::exp(-r.rate * t);
      return v;
    };
  }
  if (r.kind == "bump") {
    return [r, n](cplx z) -> Vec {
      if (std::abs(z.imag()) > 0.0)
        throw ValidationError("bump right-hand side is only defined on the real line");
      const double s = (2.0 * z.real() - r.a - r.b) / (r.b - r.a);
      Vec v = Vec::Zero(n);
      if (std::abs(s) < 1.0) v(0) = std::exp(-1.0 / (1.0 - s * s));
      return v;
    };
  }
  throw ValidationError("rhs.kind: sampled right-hand sides have no evaluator");
}

ConstantProblem build_problem(const ProblemFile& p) {
  const Ray ray(0.0, 0.0, Side::time);
  const Grid grid = build_grid(p);
  MatrixPencil pencil = build_pencil(p);
  if (p.rhs.kind == "sampled") {
    RayFunction F(ray, grid, p.rhs.values, 0.0, p.weight);
    return ConstantProblem{std::move(pencil), ray, p.weight, std::move(F), Evaluator(),
                           p.solver.res_tol};
  }
  ConstantProblem cp = ConstantProblem::from_evaluator(std::move(pencil), ray, p.weight, grid,
                                                       build_rhs_evaluator(p));
  if (!rhs_is_analytic(p)) cp.rhs_evaluator = Evaluator();
  cp.res_tol = p.solver.res_tol;
  return cp;
}

bool has_perturbation(const ProblemFile& p) { return p.perturbation.kind == "rational_decay"; }

VariableProblem build_variable_problem(const ProblemFile& p) {
  VariableProblem vp{.base = build_problem(p)};
  if (has_perturbation(p)) {
    const PerturbationSpec q = p.perturbation;
    const long n = p.dim;
    const int m = p.degree;
    vp.Q = [q, n, m](cplx z) {
      std::vector<Mat> out(m + 1, Mat::Zero(n, n));
      out[q.index] = Mat::Identity(n, n) * (q.epsilon / (z * z + q.pole_scale * q.pole_scale));
      return out;
    };
    vp.sector_vertex = q.sector_vertex;
    vp.sector_angle = q.sector_angle;
    vp.eta = q.eta;
  }
  vp.max_iter = p.solver.max_iter;
  return vp;
}

}  // namespace conescale::cli
