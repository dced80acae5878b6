#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conescale/geometry.hpp"
#include "conescale/pencil.hpp"
#include "conescale/transform.hpp"

namespace conescale {

// A(D) u = F on a time-side ray, with D = -i d/dz along the ray and the
// frequency line e^{i psi} R + zeta.
struct ConstantProblem {
  MatrixPencil pencil;
  Ray ray;
  cplx zeta;
  RayFunction rhs;
  // Analytic continuation of the right-hand side; required for rotated-ray work.
  Evaluator rhs_evaluator;
  double res_tol = 1e-6;

  static ConstantProblem from_evaluator(MatrixPencil pencil, Ray ray, cplx zeta, const Grid& grid,
                                        Evaluator rhs);
};

struct Solution {
  RayFunction u;
  // Transform of u on the frequency line of the problem.
  RayFunction uhat;
  double residual = 0.0;
};

// Max-abs of sum_j A_j D^{m-j} u - F over nodes at least `margin` nodes from the
// grid ends, with eighth-order central differences along the ray.
double pencil_residual(const MatrixPencil& p, const RayFunction& u, const RayFunction& F,
                       long margin = -1);

Solution solve_const(const ConstantProblem& p);

struct RayEnergy {
  double psi = 0.0;
  double value = 0.0;
};

struct ScalingReport {
  double phi = 0.0;
  double residual_scaled = 0.0;
  double residual_unscaled = 0.0;
  // Max-abs difference between the scaled solve and the solve on the rotated ray.
  double deviation = 0.0;
  std::vector<RayEnergy> norm_along_rays;
};

struct ScaledSolution {
  Solution u;
  Solution v;
  Solution rotated;
  ScalingReport report;
};

ScaledSolution solve_scaled(const ConstantProblem& p, double phi, const Cone& cone);

// Q_0(z) .. Q_m(z); Q_j multiplies D^{m-j}.
using Perturbation = std::function<std::vector<Mat>(cplx)>;

struct VariableProblem {
  ConstantProblem base;
  Perturbation Q{};
  double sector_vertex = 1.0;
  double sector_angle = kPi / 4;
  std::optional<cplx> eta{};
  std::optional<cplx> projection_point{};
  // Projection orders per j; defaults to m - j.
  std::vector<int> orders{};
  int max_iter = 50;
  double iter_tol = 1e-10;
};

class ContractionFailure : public HypothesisError {
 public:
  ContractionFailure(const std::string& what, std::vector<double> residuals)
      : HypothesisError(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

struct VariableSolution {
  RayFunction u;
  std::vector<double> residuals;
  // Largest observed residual ratio r_{k+1} / r_k for k >= 1.
  double q = 0.0;
  double fd_residual = 0.0;
};

// Resolved projection data for a variable problem.
struct ProjectionSetup {
  cplx eta;
  cplx point;
  std::vector<int> orders{};
};
ProjectionSetup projection_setup(const VariableProblem& p);

// sum_j Q_j(z) D^{m-j} P^{orders_j} u on the nodes past the projection point.
Mat apply_perturbation(const VariableProblem& p, const ProjectionSetup& setup, const RayFunction& u);

VariableSolution solve_variable(const VariableProblem& p);

class LocalizationFailure : public HypothesisError {
 public:
  using HypothesisError::HypothesisError;
};

// Phi(z) = e^{gamma z} sum_j a_j z^j.
struct LocalizedTraces {
  cplx gamma;
  std::vector<Vec> coefficients;
  Vec operator()(cplx z) const;
  // D_z^j Phi(z) with D_z = -i d/dz.
  Vec derivative(cplx z, int j) const;
};

// True when e^{-i zeta z} e^{gamma z} decays along every forward half-line of
// the cone.
bool localization_admissible(cplx gamma, const Cone& cone, cplx zeta);

// Matches D^j Phi(0) = traces[j]. When gamma is absent or inadmissible, the
// candidates -2^k e^{i theta} are tried in a fixed order.
LocalizedTraces localize_traces(const std::vector<Vec>& traces, std::optional<cplx> gamma,
                                const Cone& cone, cplx zeta);

struct CertificateRow {
  double psi = 0.0;
  double value = 0.0;
};

struct CertificateReport {
  std::vector<CertificateRow> rows;
  double sweep_max = 0.0;
  double ratio = 0.0;
  bool holds = false;
  std::string verdict;
};

// Solves along the lines e^{-i psi} R + T for psi in [0, phi] and integrates
// sum_j |e^{-i zeta (z - T)} D^j u|^2_{m-j} over the forward half-line.
CertificateReport continuation_certificate(const VariableProblem& p, double phi,
                                           int sweep_count = 33, double cert_bound = 10.0);

}  // namespace conescale
