#include "conescale/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "conescale/hardy.hpp"

namespace conescale {

namespace {

const cplx I(0.0, 1.0);
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_problem(const ConstantProblem& p) {
  if (p.ray.side() != Side::time) throw ValidationError("problem ray must be a time-side ray");
  const Ray& r = p.rhs.ray();
  if (r.side() != Side::time || std::abs(r.direction() - p.ray.direction()) > 1e-12 ||
      std::abs(r.offset() - p.ray.offset()) > 1e-12)
    throw ValidationError("right-hand side is not sampled on the problem ray");
  if (p.rhs.dim() != p.pencil.dim())
    throw ValidationError("right-hand side dimension differs from the pencil dimension");
}

void check_clear_line(const ConstantProblem& p) {
  const auto bad = line_obstructions(p.pencil, p.ray.angle(), p.zeta);
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "spectral obstruction: eigenvalue(s) on the line e^{i psi}R + zeta:";
    for (cplx l : bad) msg << ' ' << l;
    throw SpectralObstructionError(msg.str(), bad);
  }
}

// u = T A(lambda)^{-1} T^{-1} F on the conjugate grid.
Solution resolve(const MatrixPencil& pencil, const TransformContext& ctx, const RayFunction& F) {
  RayFunction Fhat = forward(ctx, F);
  Mat uh(Fhat.values().rows(), Fhat.values().cols());
  const bool scalar = pencil.dim() == 1;
  for (long k = 0; k < uh.rows(); ++k) {
    const cplx lambda = ctx.frequency_point(k);
    if (scalar) {
      const cplx a = evaluate(pencil, lambda)(0, 0);
      if (a == cplx(0.0)) throw NearEigenvalueError("pencil vanishes on the frequency grid", lambda);
      uh(k, 0) = Fhat.values()(k, 0) / a;
    } else {
      uh.row(k) = resolvent_apply(pencil, lambda, Fhat.values().row(k).transpose()).transpose();
    }
  }
  RayFunction uhat = Fhat.with_values(std::move(uh));
  RayFunction u = inverse(ctx, uhat);
  return {std::move(u), std::move(uhat), 0.0};
}

std::vector<Mat> spectral_derivatives(const TransformContext& ctx, const RayFunction& uhat, int m) {
  std::vector<Mat> out;
  for (int j = 0; j <= m; ++j) {
    Mat v = uhat.values();
    for (long k = 0; k < v.rows(); ++k) v.row(k) *= std::pow(ctx.frequency_point(k), j);
    out.push_back(inverse(ctx, uhat.with_values(std::move(v))).values());
  }
  return out;
}

// sum_j integral |e^{-i zeta (z - offset)}|^2 <H_{m-j} D^j u, D^j u> over t >= t_min.
double ray_energy(const MatrixPencil& pencil, const TransformContext& ctx, const RayFunction& uhat,
                  double t_min) {
  const int m = pencil.degree();
  const auto d = spectral_derivatives(ctx, uhat, m);
  const Grid& g = ctx.src_grid();
  const double h = g.spacing();
  double sum = 0.0;
  for (long n = 0; n < g.count(); ++n) {
    const double t = g.node(n);
    if (t < t_min) continue;
    const double lw = 2.0 * log_exp_weight(ctx.time_point(n) - ctx.w(), ctx.zeta());
    if (lw > kLogOverflow) return kInf;
    const double wt = std::exp(lw) * h;
    for (int j = 0; j <= m; ++j) {
      const Vec x = d[j].row(n).transpose();
      sum += wt * std::real(x.dot(pencil.norm_forms()[m - j] * x));
    }
  }
  return std::isfinite(sum) ? sum : kInf;
}

RayFunction sample_rhs(const ConstantProblem& p, const Ray& ray, double weight_order) {
  if (!p.rhs_evaluator)
    throw ValidationError("rotated-ray work needs an analytic right-hand side evaluator");
  return RayFunction::sample(ray, p.rhs.grid(), p.rhs_evaluator, weight_order, p.zeta);
}

}  // namespace

ConstantProblem ConstantProblem::from_evaluator(MatrixPencil pencil, Ray ray, cplx zeta,
                                                const Grid& grid, Evaluator rhs) {
  RayFunction F = RayFunction::sample(ray, grid, rhs, 0.0, zeta);
  return ConstantProblem{std::move(pencil), ray, zeta, std::move(F), std::move(rhs)};
}

double pencil_residual(const MatrixPencil& p, const RayFunction& u, const RayFunction& F, long margin) {
  const int m = p.degree();
  if (margin < 0) margin = 4 * m + 1;
  Mat acc = Mat::Zero(u.values().rows(), u.values().cols());
  for (int j = 0; j <= m; ++j) {
    const Mat d = ray_derivative(u, m - j);
    acc += d * p.coefficients()[j].transpose();
  }
  acc -= F.values();
  double worst = 0.0;
  for (long n = margin; n < acc.rows() - margin; ++n) worst = std::max(worst, acc.row(n).cwiseAbs().maxCoeff());
  return worst;
}

Solution solve_const(const ConstantProblem& p) {
  check_problem(p);
  check_clear_line(p);
  const auto ctx = TransformContext::conjugate(p.ray.angle(), p.zeta, p.ray.offset(), p.rhs.grid());
  Solution s = resolve(p.pencil, ctx, p.rhs);
  s.residual = pencil_residual(p.pencil, s.u, p.rhs);
  if (!(s.residual <= p.res_tol)) {
    std::ostringstream msg;
    msg << "solution residual " << s.residual << " exceeds tolerance " << p.res_tol;
    throw NumericalError(msg.str());
  }
  return s;
}

ScaledSolution solve_scaled(const ConstantProblem& p, double phi, const Cone& cone) {
  check_problem(p);
  if (std::abs(p.ray.angle()) > 1e-15) throw ValidationError("scaled solve expects the problem on the real line");
  if (phi < 0.0 || phi >= kPi / 2) throw ValidationError("scaling angle must lie in [0, pi/2)");
  if (phi > 0.0) {
    const auto clr = cone_clearance(p.pencil, cone, kInf);
    if (!clr.clear) {
      std::ostringstream msg;
      msg << "spectral obstruction: eigenvalue(s) in the closed cone:";
      for (cplx l : clr.violating) msg << ' ' << l;
      throw SpectralObstructionError(msg.str(), clr.violating);
    }
  }
  Solution u = solve_const(p);
  const cplx w = p.ray.offset();
  const cplx rot = std::polar(1.0, -phi);

  // v(t) = u(e^{-i phi} t + w) solves A(e^{i phi} D_t) v = F(e^{-i phi} t + w).
  ConstantProblem scaled{p.pencil.scaled(phi), Ray(0.0, 0.0, Side::time), rot * p.zeta,
                         RayFunction::zeros(Ray(0.0, 0.0, Side::time), p.rhs.grid(), p.pencil.dim()),
                         {}, p.res_tol};
  if (phi == 0.0) {
    scaled.rhs = RayFunction(scaled.ray, p.rhs.grid(), p.rhs.values(), 0.0, scaled.zeta);
  } else {
    if (!p.rhs_evaluator)
      throw ValidationError("scaled solve needs an analytic right-hand side evaluator");
    const Evaluator& f = p.rhs_evaluator;
    scaled.rhs = RayFunction::sample(scaled.ray, p.rhs.grid(),
                                     [&](cplx t) { return f(rot * t + w); }, 0.0, scaled.zeta);
  }
  Solution v = solve_const(scaled);

  ConstantProblem rotated{p.pencil, Ray(phi, w, Side::time), p.zeta, p.rhs, p.rhs_evaluator, p.res_tol};
  rotated.rhs = phi == 0.0 ? p.rhs : sample_rhs(p, rotated.ray, 0.0);
  ScaledSolution out{std::move(u), std::move(v), solve_const(rotated), {}};

  ScalingReport& r = out.report;
  r.phi = phi;
  r.residual_unscaled = out.u.residual;
  r.residual_scaled = out.v.residual;
  r.deviation = (out.v.u.values() - out.rotated.u.values()).cwiseAbs().maxCoeff();
  const auto ctx0 = TransformContext::conjugate(0.0, p.zeta, w, p.rhs.grid());
  const auto ctx1 = TransformContext::conjugate(phi, p.zeta, w, p.rhs.grid());
  const double tmin = -p.rhs.grid().half_width();
  r.norm_along_rays.push_back({0.0, std::sqrt(ray_energy(p.pencil, ctx0, out.u.uhat, tmin))});
  r.norm_along_rays.push_back({phi, std::sqrt(ray_energy(p.pencil, ctx1, out.rotated.uhat, tmin))});
  return out;
}

ProjectionSetup projection_setup(const VariableProblem& p) {
  const int m = p.base.pencil.degree();
  ProjectionSetup s;
  s.eta = p.eta.value_or(p.base.zeta + 2.0 * I * std::polar(1.0, p.base.ray.angle()));
  if (p.projection_point) {
    s.point = *p.projection_point;
  } else {
    // Point of the ray nearest to the sector vertex.
    s.point = p.base.ray.point(p.base.ray.parameter(p.sector_vertex));
  }
  s.orders = p.orders;
  if (s.orders.empty())
    for (int j = 0; j <= m; ++j) s.orders.push_back(m - j);
  if (static_cast<int>(s.orders.size()) != m + 1)
    throw ValidationError("projection order list needs one entry per coefficient");
  return s;
}

Mat apply_perturbation(const VariableProblem& p, const ProjectionSetup& setup, const RayFunction& u) {
  const int m = p.base.pencil.degree();
  const long n = u.grid().count();
  Mat out = Mat::Zero(n, u.dim());
  if (!p.Q) return out;
  const double tv = u.ray().parameter(setup.point);
  const double h = u.grid().spacing();
  std::vector<Mat> terms;
  for (int j = 0; j <= m; ++j) {
    const RayFunction proj = causal_projection(u, setup.orders[j], setup.eta, setup.point);
    terms.push_back(causal_power(proj, 0.0, m - j));
  }
  for (long i = 0; i < n; ++i) {
    if (u.grid().node(i) < tv - 1e-9 * h) continue;
    const cplx z = u.point(i);
    const double arg = std::arg(z - p.sector_vertex);
    if (std::abs(z - p.sector_vertex) > 1e-12 && (arg < -p.sector_angle - 1e-12 || arg > 1e-12))
      throw ValidationError("perturbation evaluated outside its analyticity sector");
    const std::vector<Mat> Q = p.Q(z);
    if (static_cast<int>(Q.size()) != m + 1) throw ValidationError("perturbation must return m+1 matrices");
    for (int j = 0; j <= m; ++j) {
      if (Q[j].rows() != u.dim() || Q[j].cols() != u.dim() || !Q[j].allFinite())
        throw ValidationError("perturbation matrices must be finite and match the pencil dimension");
      out.row(i) += (Q[j] * terms[j].row(i).transpose()).transpose();
    }
  }
  return out;
}

VariableSolution solve_variable(const VariableProblem& p) {
  check_problem(p.base);
  check_clear_line(p.base);
  if (!(p.sector_angle > 0.0 && p.sector_angle < kPi / 2))
    throw ValidationError("sector angle must lie in (0, pi/2)");
  if (p.max_iter < 1) throw ValidationError("max_iter must be positive");
  const ProjectionSetup setup = projection_setup(p);
  const auto ctx = TransformContext::conjugate(p.base.ray.angle(), p.base.zeta, p.base.ray.offset(),
                                               p.base.rhs.grid());
  const Mat& F = p.base.rhs.values();

  Solution cur = resolve(p.base.pencil, ctx, p.base.rhs);
  Mat qprev = apply_perturbation(p, setup, cur.u);
  VariableSolution out{cur.u, {}, 0.0, 0.0};
  // A(D) u_k = F + Q u_{k-1}, so the residual of u_k is Q u_{k-1} - Q u_k.
  out.residuals.push_back(qprev.cwiseAbs().maxCoeff());
  int rising = 0;
  while (out.residuals.back() > p.iter_tol) {
    if (static_cast<int>(out.residuals.size()) >= p.max_iter) {
      std::ostringstream msg;
      msg << "Neumann iteration did not converge in " << p.max_iter
          << " iterations; the perturbation is not a contraction (the hypothesis needs the "
             "projection point far enough out)";
      throw ContractionFailure(msg.str(), out.residuals);
    }
    cur = resolve(p.base.pencil, ctx, p.base.rhs.with_values(F + qprev));
    Mat q = apply_perturbation(p, setup, cur.u);
    const double r = (q - qprev).cwiseAbs().maxCoeff();
    const double last = out.residuals.back();
    out.residuals.push_back(r);
    if (out.residuals.size() >= 3) out.q = std::max(out.q, r / last);
    qprev = std::move(q);
    rising = r >= last ? rising + 1 : 0;
    if (rising >= 2 || !std::isfinite(r)) {
      std::ostringstream msg;
      msg << "Neumann iteration is not contracting: residuals increase (last ratio " << r / last
          << "); the perturbation is too large relative to the resolvent (the hypothesis needs "
             "the projection point far enough out)";
      throw ContractionFailure(msg.str(), out.residuals);
    }
  }
  out.u = cur.u;

  // Independent check with finite differences, skipping nodes near the grid
  // ends and near the projection point where the solution has a kink.
  const int m = p.base.pencil.degree();
  Mat acc = Mat::Zero(F.rows(), F.cols());
  for (int j = 0; j <= m; ++j) acc += ray_derivative(out.u, m - j) * p.base.pencil.coefficients()[j].transpose();
  acc -= apply_perturbation(p, setup, out.u) + F;
  const long margin = 4 * m + 1;
  const double tv = out.u.ray().parameter(setup.point);
  const double h = out.u.grid().spacing();
  const long window = 8 * (m + 1) * 4;
  for (long n = margin; n < acc.rows() - margin; ++n) {
    if (std::abs(out.u.grid().node(n) - tv) < static_cast<double>(window) * h) continue;
    out.fd_residual = std::max(out.fd_residual, acc.row(n).cwiseAbs().maxCoeff());
  }
  if (!(out.fd_residual <= p.base.res_tol)) {
    std::ostringstream msg;
    msg << "finite-difference residual " << out.fd_residual << " exceeds tolerance " << p.base.res_tol;
    throw NumericalError(msg.str());
  }
  return out;
}

Vec LocalizedTraces::operator()(cplx z) const { return derivative(z, 0); }

Vec LocalizedTraces::derivative(cplx z, int j) const {
  // d^j/dz^j of e^{gamma z} p(z) = e^{gamma z} sum_k C(j,k) gamma^{j-k} p^{(k)}(z).
  const long dim = coefficients.empty() ? 0 : coefficients.front().size();
  Vec acc = Vec::Zero(dim);
  double binom = 1.0;
  for (int k = 0; k <= j; ++k) {
    if (k > 0) binom = binom * (j - k + 1) / k;
    Vec pk = Vec::Zero(dim);
    for (std::size_t a = static_cast<std::size_t>(k); a < coefficients.size(); ++a) {
      double falling = 1.0;
      for (int q = 0; q < k; ++q) falling *= static_cast<double>(a) - q;
      pk += falling * std::pow(z, static_cast<int>(a) - k) * coefficients[a];
    }
    acc += binom * std::pow(gamma, j - k) * pk;
  }
  return std::pow(cplx(0.0, -1.0), j) * std::exp(gamma * z) * acc;
}

bool localization_admissible(cplx gamma, const Cone& cone, cplx zeta) {
  constexpr int kSweep = 65;
  for (int i = 0; i < kSweep; ++i) {
    const double psi = cone.angle() * i / (kSweep - 1);
    const cplx dir = cone.ray(psi).direction();
    if (!(std::real((gamma - I * zeta) * dir) < -1e-3)) return false;
  }
  return true;
}

LocalizedTraces localize_traces(const std::vector<Vec>& traces, std::optional<cplx> gamma,
                                const Cone& cone, cplx zeta) {
  if (traces.empty()) throw ValidationError("localization needs at least one trace");
  const long dim = traces.front().size();
  for (const Vec& d : traces)
    if (d.size() != dim) throw ValidationError("traces must share a dimension");
  std::optional<cplx> chosen;
  if (gamma && localization_admissible(*gamma, cone, zeta)) chosen = gamma;
  const double fan[] = {0.0, kPi / 16, -kPi / 16, kPi / 8, -kPi / 8, kPi / 4, -kPi / 4};
  for (int k = 0; k <= 10 && !chosen; ++k)
    for (double theta : fan) {
      const cplx g = -std::pow(2.0, k) * std::polar(1.0, theta);
      if (localization_admissible(g, cone, zeta)) {
        chosen = g;
        break;
      }
    }
  if (!chosen) throw LocalizationFailure("no admissible exponent gamma found for trace localization");

  // d^k Phi(0) = i^k d_k = sum_{j<=k} C(k,j) gamma^{k-j} j! a_j.
  LocalizedTraces out{*chosen, {}};
  const int ell = static_cast<int>(traces.size());
  double kfact = 1.0;
  for (int k = 0; k < ell; ++k) {
    if (k > 0) kfact *= k;
    Vec rhs = std::pow(I, k) * traces[k];
    double binom = 1.0;
    double jfact = 1.0;
    for (int j = 0; j < k; ++j) {
      if (j > 0) {
        binom = binom * (k - j + 1) / j;
        jfact *= j;
      }
      rhs -= binom * std::pow(out.gamma, k - j) * jfact * out.coefficients[j];
    }
    out.coefficients.push_back(rhs / kfact);
  }
  return out;
}

CertificateReport continuation_certificate(const VariableProblem& p, double phi, int sweep_count,
                                           double cert_bound) {
  if (sweep_count < 2) throw ValidationError("certificate sweep needs at least two angles");
  if (!(phi > 0.0 && phi < kPi / 2)) throw ValidationError("certificate angle must lie in (0, pi/2)");
  if (!p.base.rhs_evaluator) throw ValidationError("certificate needs an analytic right-hand side evaluator");
  const double T = p.sector_vertex;
  CertificateReport rep;
  for (int i = 0; i < sweep_count; ++i) {
    const double psi = phi * i / (sweep_count - 1);
    CertificateRow row{psi, kInf};
    try {
      const Ray ray(psi, T, Side::time);
      ConstantProblem base{p.base.pencil, ray, p.base.zeta, sample_rhs(p.base, ray, 0.0),
                           p.base.rhs_evaluator, p.base.res_tol};
      const auto ctx = TransformContext::conjugate(psi, p.base.zeta, T, base.rhs.grid());
      RayFunction uhat = base.rhs;
      if (p.Q) {
        VariableProblem vp = p;
        vp.base = base;
        vp.projection_point = cplx(T);
        uhat = forward(ctx, solve_variable(vp).u);
      } else {
        uhat = solve_const(base).uhat;
      }
      row.value = std::sqrt(ray_energy(p.base.pencil, ctx, uhat, 0.0));
    } catch (const NumericalError&) {
      // Overflow or an unresolved solution on this line counts as blow-up.
      row.value = kInf;
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "continuation solve failed at psi=" << psi << ": " << e.what();
      throw Error(e.category(), msg.str());
    }
    rep.rows.push_back(row);
    rep.sweep_max = std::max(rep.sweep_max, row.value);
  }
  const double base = rep.rows.front().value;
  if (rep.sweep_max == 0.0)
    rep.ratio = 0.0;
  else
    rep.ratio = std::isfinite(base) && base > 0.0 ? rep.sweep_max / base : kInf;
  rep.holds = std::isfinite(rep.sweep_max) && rep.ratio < cert_bound;
  rep.verdict = rep.holds ? "holds" : "blow-up";
  return rep;
}

}  // namespace conescale
