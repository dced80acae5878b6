#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>
#include <sstream>

#include "conescale/cli.hpp"
#include "conescale/error.hpp"
#include "conescale/parallel.hpp"
#include "conescale/transform.hpp"

namespace py = pybind11;
using namespace conescale;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MatrixPencil make_pencil(const std::vector<Mat>& coefficients, const std::vector<Mat>& norm_forms) {
  return MatrixPencil(coefficients, norm_forms);
}

// Columns of `values` are components, rows are grid nodes.
RayFunction on_time_ray(const TransformContext& ctx, const Mat& values) {
  return RayFunction(ctx.time_ray(), ctx.src_grid(), values);
}

py::dict spectrum_dict(const SpectrumReport& s) {
  py::dict d;
  d["eigenvalues"] = s.eigenvalues;
  d["multiplicities"] = s.multiplicities;
  d["residuals"] = s.residuals;
  d["possibly_defective"] = s.possibly_defective;
  d["infinite_dropped"] = s.infinite_dropped;
  d["notes"] = s.notes;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cone-scaled transforms, pencil spectra and solvers";

  static py::exception<Error> base(m, "ConescaleError");
  static py::exception<ValidationError> validation(m, "ValidationError", base.ptr());
  static py::exception<NumericalError> numerical(m, "NumericalError", base.ptr());
  static py::exception<HypothesisError> hypothesis(m, "HypothesisError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.category()) {
        case ErrorCategory::validation:
          PyErr_SetString(validation.ptr(), e.what());
          break;
        case ErrorCategory::numerical:
          PyErr_SetString(numerical.ptr(), e.what());
          break;
        case ErrorCategory::hypothesis:
          PyErr_SetString(hypothesis.ptr(), e.what());
          break;
      }
    }
  });

  m.attr("__version__") = CONESCALE_VERSION;

  m.def("set_thread_count", &set_thread_count, py::arg("count"));

  m.def(
      "spectrum",
      [](const std::vector<Mat>& coefficients, double radius) {
        return spectrum_dict(spectrum(make_pencil(coefficients, {}), Disk{0.0, radius}));
      },
      py::arg("coefficients"), py::arg("radius") = kInf,
      "Finite eigenvalues of sum_j A_j lambda^(m-j) inside |lambda| <= radius.");

  m.def(
      "cone_clearance",
      [](const std::vector<Mat>& coefficients, double angle, cplx vertex, int orientation, double radius) {
        const ClearanceReport c = cone_clearance(make_pencil(coefficients, {}), Cone(angle, vertex, orientation), radius);
        return py::make_tuple(c.clear, c.violating);
      },
      py::arg("coefficients"), py::arg("angle"), py::arg("vertex") = cplx(0.0), py::arg("orientation") = 1,
      py::arg("radius") = kInf);

  m.def(
      "frequency_nodes",
      [](double half_width, long count, double psi, cplx zeta) {
        const auto ctx = TransformContext::conjugate(psi, zeta, 0.0, Grid(half_width, count));
        std::vector<cplx> out;
        for (long k = 0; k < count; ++k) out.push_back(ctx.frequency_point(k));
        return out;
      },
      py::arg("half_width"), py::arg("count"), py::arg("psi") = 0.0, py::arg("zeta") = cplx(0.0));

  m.def(
      "forward",
      [](const Mat& values, double half_width, double psi, cplx zeta, cplx w) {
        const auto ctx = TransformContext::conjugate(psi, zeta, w, Grid(half_width, values.rows()));
        return forward(ctx, on_time_ray(ctx, values)).values();
      },
      py::arg("values"), py::arg("half_width"), py::arg("psi") = 0.0, py::arg("zeta") = cplx(0.0),
      py::arg("w") = cplx(0.0), "Transform of samples on the time ray onto the conjugate frequency grid.");

  m.def(
      "inverse",
      [](const Mat& values, double half_width, double psi, cplx zeta, cplx w) {
        const auto ctx = TransformContext::conjugate(psi, zeta, w, Grid(half_width, values.rows()));
        return inverse(ctx, RayFunction(ctx.frequency_ray(), ctx.dst_grid(), values)).values();
      },
      py::arg("values"), py::arg("half_width"), py::arg("psi") = 0.0, py::arg("zeta") = cplx(0.0),
      py::arg("w") = cplx(0.0));

  m.def(
      "parseval",
      [](const Mat& values, double half_width, double psi, cplx zeta, cplx w) {
        const auto ctx = TransformContext::conjugate(psi, zeta, w, Grid(half_width, values.rows()));
        const ParsevalReport r = parseval_check(ctx, on_time_ray(ctx, values));
        return py::make_tuple(r.lhs, r.rhs, r.rel_err);
      },
      py::arg("values"), py::arg("half_width"), py::arg("psi") = 0.0, py::arg("zeta") = cplx(0.0),
      py::arg("w") = cplx(0.0));

  m.def(
      "solve",
      [](const std::vector<Mat>& coefficients, const Mat& rhs, double half_width, cplx zeta, double res_tol) {
        const Grid g(half_width, rhs.rows());
        const Ray ray(0.0, 0.0, Side::time);
        ConstantProblem p{make_pencil(coefficients, {}), ray, zeta, RayFunction(ray, g, rhs, 0.0, zeta), {}, res_tol};
        const Solution s = solve_const(p);
        return py::make_tuple(s.u.values(), s.residual);
      },
      py::arg("coefficients"), py::arg("rhs"), py::arg("half_width"), py::arg("zeta") = cplx(0.0),
      py::arg("res_tol") = 1e-6, "Solve A(D) u = F on the real line; rows of rhs are grid nodes.");

  m.def(
      "canonical_problem",
      [](const std::string& text) { return cli::to_json(cli::parse_problem_text(text)).dump(); },
      py::arg("text"), "Validate a problem document and return its canonical JSON form.");

  m.def(
      "run",
      [](const std::string& command, const std::string& problem, std::optional<double> scaled,
         const std::string& suite, const std::string& support, std::optional<double> radius, int n, double phi) {
        cli::Options o;
        o.command = command;
        o.problem_path = problem;
        o.scaled = scaled;
        o.suite = suite;
        o.support = support;
        o.radius = radius;
        o.n = n;
        o.phi = phi;
        std::ostringstream out, err;
        const int code = cli::run(o, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("command"), py::arg("problem") = "", py::arg("scaled") = py::none(), py::arg("suite") = "parseval",
      py::arg("support") = "backward", py::arg("radius") = py::none(), py::arg("n") = 16, py::arg("phi") = kPi / 16,
      "Run a command-line subcommand in process; returns (exit_code, report, diagnostics).");
}
