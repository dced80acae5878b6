#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "conescale/cli.hpp"
#include "conescale/error.hpp"
#include "conescale/hardy.hpp"
#include "conescale/pencil.hpp"
#include "conescale/transform.hpp"

namespace conescale::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string complex_text(cplx z) { return format_double(z.real()) + " " + format_double(z.imag()); }

void header(Report& r, const std::string& command, const json& problem) {
  r.meta("tool", "conescale");
  r.meta("version", CONESCALE_VERSION);
  r.meta("command", command);
  r.meta("problem", problem.dump());
}

void spectrum_table(Report& r, const SpectrumReport& s) {
  r.begin_table("spectrum", {"re", "im", "multiplicity", "residual"});
  for (std::size_t k = 0; k < s.eigenvalues.size(); ++k)
    r.row({format_double(s.eigenvalues[k].real()), format_double(s.eigenvalues[k].imag()),
           std::to_string(s.multiplicities[k]), format_double(s.residuals[k])});
}

void solution_table(Report& r, const RayFunction& u) {
  std::vector<std::string> head{"t"};
  for (long c = 0; c < u.dim(); ++c) {
    head.push_back("re_" + std::to_string(c));
    head.push_back("im_" + std::to_string(c));
  }
  r.begin_table("solution", head);
  std::vector<double> cells(1 + 2 * u.dim());
  for (long k = 0; k < u.grid().count(); ++k) {
    cells[0] = u.grid().node(k);
    for (long c = 0; c < u.dim(); ++c) {
      cells[1 + 2 * c] = u.values()(k, c).real();
      cells[2 + 2 * c] = u.values()(k, c).imag();
    }
    r.row(cells);
  }
}

// phi = 0 is the identity scaling and needs no cone.
Cone scaling_cone(const ProblemFile& p, double phi) {
  return phi > 0.0 ? Cone(phi, p.weight, 1) : build_cone(p);
}

std::vector<double> scaling_angles(const ProblemFile& p, const Options& o) {
  if (o.scaled) return {*o.scaled};
  return p.solver.phi;
}

// Shared by `solve` and the demo so the two produce identical bytes.
Report solve_report(const ProblemFile& pf, const Options& o) {
  Report r;
  header(r, "solve", to_json(pf));
  if (has_perturbation(pf)) {
    VariableProblem vp = build_variable_problem(pf);
    const VariableSolution s = solve_variable(vp);
    r.meta("solver", "neumann");
    r.meta("iterations", std::to_string(s.residuals.size()));
    r.meta("contraction_ratio", s.q);
    r.meta("iteration_residual", s.residuals.empty() ? 0.0 : s.residuals.back());
    r.meta("residual", s.fd_residual);
    solution_table(r, s.u);
    r.begin_table("iterations", {"k", "residual"});
    for (std::size_t k = 0; k < s.residuals.size(); ++k)
      r.row({std::to_string(k + 1), format_double(s.residuals[k])});
    return r;
  }
  const ConstantProblem cp = build_problem(pf);
  const std::vector<double> phis = scaling_angles(pf, o);
  const Solution u = solve_const(cp);
  r.meta("solver", "constant");
  r.meta("residual", u.residual);
  for (double phi : phis) {
    const ScaledSolution s = solve_scaled(cp, phi, scaling_cone(pf, phi));
    const std::string tag = "[" + format_double(phi) + "]";
    r.meta("residual_scaled" + tag, s.report.residual_scaled);
    r.meta("deviation" + tag, s.report.deviation);
    if (s.report.deviation > pf.solver.scale_tol) {
      std::ostringstream msg;
      msg << "scaled and rotated solves differ by " << format_double(s.report.deviation)
          << " at phi=" << format_double(phi) << " (scale_tol " << format_double(pf.solver.scale_tol) << ")";
      throw NumericalError(msg.str());
    }
  }
  solution_table(r, u.u);
  return r;
}

Report cmd_spectrum(const ProblemFile& pf, const Options& o) {
  Report r;
  header(r, "spectrum", to_json(pf));
  const double radius = o.radius.value_or(kInf);
  r.meta("radius", radius);
  const SpectrumReport s = spectrum(build_pencil(pf), Disk{0.0, radius});
  r.meta("infinite_dropped", std::to_string(s.infinite_dropped));
  for (std::size_t i = 0; i < s.notes.size(); ++i) r.meta("note" + std::to_string(i), s.notes[i]);
  spectrum_table(r, s);
  return r;
}

Report cmd_clearance(const ProblemFile& pf, const Options& o, bool& violated) {
  Report r;
  header(r, "clearance", to_json(pf));
  const double radius = o.radius.value_or(kInf);
  r.meta("radius", radius);
  const ClearanceReport c = cone_clearance(build_pencil(pf), build_cone(pf), radius);
  r.meta("verdict", c.clear ? "clear" : "violated");
  r.begin_table("violating", {"re", "im"});
  for (cplx l : c.violating) r.row(std::vector<double>{l.real(), l.imag()});
  violated = !c.clear;
  return r;
}

Report verify_parseval(const ProblemFile& pf, const Options& o) {
  Report r;
  header(r, "verify", to_json(pf));
  r.meta("suite", "parseval");
  const ConstantProblem cp = build_problem(pf);
  std::vector<double> psis{0.0};
  for (double phi : scaling_angles(pf, o))
    if (phi > 0.0) psis.push_back(phi);
  r.begin_table("parseval", {"psi", "lhs", "rhs", "rel_err"});
  double worst = 0.0;
  for (double psi : psis) {
    const auto ctx = TransformContext::conjugate(psi, pf.weight, 0.0, cp.rhs.grid());
    RayFunction F = cp.rhs;
    if (psi > 0.0) {
      if (!cp.rhs_evaluator) throw ValidationError("rhs.kind: rotated rays need an analytic right-hand side");
      F = RayFunction::sample(ctx.time_ray(), cp.rhs.grid(), cp.rhs_evaluator, 0.0, pf.weight);
    }
    const ParsevalReport pr = parseval_check(ctx, F);
    worst = std::max(worst, pr.rel_err);
    r.row(std::vector<double>{psi, pr.lhs, pr.rhs, pr.rel_err});
  }
  r.meta("max_rel_err", worst);
  return r;
}

Report verify_hardy(const ProblemFile& pf) {
  Report r;
  header(r, "verify", to_json(pf));
  r.meta("suite", "hardy");
  const ConstantProblem cp = build_problem(pf);
  if (!cp.rhs_evaluator) throw ValidationError("rhs.kind: the hardy suite needs an analytic right-hand side");
  const Cone cone(pf.cone_angle, pf.weight, 1);
  const std::vector<double> angles = ConeFunction::uniform_angles(pf.cone_angle, 9);
  std::vector<RayFunction> rays;
  for (double psi : angles) {
    const auto ctx = TransformContext::conjugate(psi, pf.weight, 0.0, cp.rhs.grid());
    const RayFunction F = RayFunction::sample(ctx.time_ray(), cp.rhs.grid(), cp.rhs_evaluator, 0.0, pf.weight);
    rays.push_back(forward(ctx, F));
  }
  const ConeFunction f(cone, angles, std::move(rays));
  const MembershipReport m = membership_scan(f);
  const DecayProfile d = decay_profile(f, 0.0);
  r.meta("verdict", m.verdict);
  r.meta("sup_norm", m.sup_norm);
  r.meta("boundary_norm_sum", m.boundary_norm_sum);
  r.meta("ratio", m.ratio);
  r.meta("tail_decreasing", d.tail_decreasing ? "true" : "false");
  for (std::size_t i = 0; i < m.diagnostics.size(); ++i) r.meta("diagnostic" + std::to_string(i), m.diagnostics[i]);
  r.begin_table("membership", {"psi", "norm"});
  for (std::size_t i = 0; i < m.angles.size(); ++i) r.row(std::vector<double>{m.angles[i], m.per_angle_norms[i]});
  return r;
}

Report verify_paley_wiener(const ProblemFile& pf, const Options& o) {
  Report r;
  header(r, "verify", to_json(pf));
  r.meta("suite", "paley-wiener");
  if (o.support != "backward" && o.support != "forward")
    throw ValidationError("--support must be backward or forward");
  r.meta("support", o.support);
  const ConstantProblem cp = build_problem(pf);
  const PaleyWienerReport pw =
      paley_wiener_check(cp.rhs, o.support == "backward" ? Support::backward : Support::forward);
  r.meta("support_leakage", pw.support_leakage);
  r.meta("predicted_ratio", pw.predicted_ratio);
  r.meta("verdict", pw.verdict);
  r.meta("opposite_verdict", pw.opposite_verdict);
  r.begin_table("sweep", {"half_plane", "offset", "norm", "ratio", "overflow"});
  auto rows = [&](const char* name, const std::vector<SweepRow>& v) {
    for (const SweepRow& s : v)
      r.row({name, format_double(s.offset), format_double(s.norm), format_double(s.ratio),
             s.overflow ? "1" : "0"});
  };
  rows("predicted", pw.predicted);
  rows("opposite", pw.opposite);
  return r;
}

Report verify_continuation(const ProblemFile& pf, const Options& o) {
  Report r;
  header(r, "verify", to_json(pf));
  r.meta("suite", "continuation");
  const std::vector<double> phis = scaling_angles(pf, o);
  double phi = pf.cone_angle;
  if (!phis.empty()) phi = *std::max_element(phis.begin(), phis.end());
  r.meta("phi", phi);
  const VariableProblem vp = build_variable_problem(pf);
  const CertificateReport c = continuation_certificate(vp, phi);
  r.meta("sweep_max", c.sweep_max);
  r.meta("ratio", c.ratio);
  r.meta("verdict", c.verdict);
  r.begin_table("certificate", {"psi", "energy"});
  for (const CertificateRow& row : c.rows) r.row(std::vector<double>{row.psi, row.value});
  return r;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError(path + ": cannot open for writing");
  f << bytes;
}

Report cmd_demo(const Options& o, bool& violated) {
  if (o.n < 1) throw ValidationError("--n must be at least 1");
  if (!(o.phi >= 0.0 && o.phi < kPi / 2)) throw ValidationError("--phi must lie in [0, pi/2)");
  const ProblemFile pf = cylinder_problem(o.n, o.phi);
  const json pj = to_json(pf);
  if (!o.problem_out.empty()) write_file(o.problem_out, pj.dump(2) + "\n");

  Report r;
  header(r, "demo-cylinder", pj);
  r.meta("n", std::to_string(o.n));
  r.meta("phi", o.phi);
  const MatrixPencil pencil = build_pencil(pf);
  const SpectrumReport s = spectrum(pencil);
  std::vector<cplx> eig = s.eigenvalues;
  std::vector<int> mult = s.multiplicities;
  std::vector<cplx> flat;
  for (std::size_t k = 0; k < eig.size(); ++k)
    for (int c = 0; c < mult[k]; ++c) flat.push_back(eig[k]);
  std::sort(flat.begin(), flat.end(), [](cplx a, cplx b) { return a.imag() < b.imag(); });
  const double h = 1.0 / (o.n + 1);
  std::vector<std::pair<int, double>> closed;
  for (int k = o.n; k >= 1; --k) closed.emplace_back(-k, -(2.0 / h) * std::sin(k * kPi * h / 2.0));
  for (int k = 1; k <= o.n; ++k) closed.emplace_back(k, (2.0 / h) * std::sin(k * kPi * h / 2.0));
  if (flat.size() != closed.size()) {
    std::ostringstream msg;
    msg << "expected " << closed.size() << " finite eigenvalues, found " << flat.size();
    throw NumericalError(msg.str());
  }
  double worst_rel = 0.0;
  r.begin_table("eigenvalues", {"mode", "re", "im", "closed_im", "abs_err", "rel_err"});
  std::vector<std::vector<std::string>> eig_rows;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const cplx exact(0.0, closed[i].second);
    const double err = std::abs(flat[i] - exact);
    const double rel = err / std::abs(exact);
    worst_rel = std::max(worst_rel, rel);
    r.row({std::to_string(closed[i].first), format_double(flat[i].real()), format_double(flat[i].imag()),
           format_double(exact.imag()), format_double(err), format_double(rel)});
  }
  r.meta("eigen_max_rel_err", worst_rel);

  const ClearanceReport c = cone_clearance(pencil, build_cone(pf), kInf);
  r.meta("clearance", c.clear ? "clear" : "violated");
  if (!c.clear) {
    violated = true;
    return r;
  }
  Options so;
  so.command = "solve";
  const Report solved = solve_report(pf, so);
  if (!o.solution_out.empty()) write_file(o.solution_out, solved.render());

  const ConstantProblem cp = build_problem(pf);
  const ScaledSolution sc = solve_scaled(cp, o.phi, scaling_cone(pf, o.phi));
  r.meta("residual", sc.u.residual);
  r.meta("residual_scaled", sc.report.residual_scaled);
  r.meta("deviation", sc.report.deviation);
  r.begin_table("ray_energy", {"psi", "value"});
  for (const RayEnergy& e : sc.report.norm_along_rays) r.row(std::vector<double>{e.psi, e.value});
  return r;
}

}  // namespace

ProblemFile cylinder_problem(int n, double phi) {
  ProblemFile p;
  p.degree = 2;
  p.dim = n;
  const double h = 1.0 / (n + 1);
  Mat L = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    L(i, i) = 2.0 / (h * h);
    if (i > 0) L(i, i - 1) = -1.0 / (h * h);
    if (i + 1 < n) L(i, i + 1) = -1.0 / (h * h);
  }
  const Mat I = Mat::Identity(n, n);
  p.coefficients = {I, Mat::Zero(n, n), L};
  const Mat G = I + L;
  p.norm_forms = {I, G, G * G};
  p.cone_angle = phi > 0.0 ? phi : kPi / 16;
  p.cone_vertex = 0.0;
  p.cone_orientation = 1;
  p.weight = 0.0;
  p.half_width = 20.0;
  p.count = 4096;
  p.rhs.kind = "gaussian";
  p.rhs.vector = Vec(n);
  for (int i = 0; i < n; ++i) p.rhs.vector(i) = std::sin(kPi * (i + 1) * h);
  p.solver.scale_tol = 1e-5;
  p.solver.phi = {phi};
  return p;
}

int run(const Options& o, std::ostream& out, std::ostream& err) {
  try {
    Report r;
    bool violated = false;
    if (o.command == "demo-cylinder") {
      r = cmd_demo(o, violated);
    } else {
      const ProblemFile pf = load_problem(o.problem_path);
      if (o.command == "spectrum") {
        r = cmd_spectrum(pf, o);
      } else if (o.command == "clearance") {
        r = cmd_clearance(pf, o, violated);
      } else if (o.command == "solve") {
        r = solve_report(pf, o);
      } else if (o.command == "verify") {
        if (o.suite == "parseval")
          r = verify_parseval(pf, o);
        else if (o.suite == "hardy")
          r = verify_hardy(pf);
        else if (o.suite == "paley-wiener")
          r = verify_paley_wiener(pf, o);
        else if (o.suite == "continuation")
          r = verify_continuation(pf, o);
        else
          throw ValidationError("--suite must be parseval, hardy, paley-wiener or continuation");
      } else {
        throw ValidationError("unknown command '" + o.command + "'");
      }
    }
    const std::string bytes = r.render();
    if (o.out.empty()) {
      out << bytes;
    } else {
      write_file(o.out, bytes);
    }
    if (violated) {
      err << "error: cone clearance violated\n";
      return exit_code(ErrorCategory::hypothesis);
    }
    return 0;
  } catch (const SpectralObstructionError& e) {
    err << "error: " << e.what() << "\n";
    for (cplx l : e.eigenvalues()) err << "  eigenvalue " << complex_text(l) << "\n";
    return exit_code(e.category());
  } catch (const ContractionFailure& e) {
    err << "error: " << e.what() << "\n";
    for (std::size_t k = 0; k < e.residuals().size(); ++k)
      err << "  residual " << k + 1 << " " << format_double(e.residuals()[k]) << "\n";
    return exit_code(e.category());
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.category());
  }
}

}  // namespace conescale::cli
