#pragma once

#include <string>
#include <vector>

#include "conescale/geometry.hpp"

namespace conescale {

// Samples of a function on the lines of a cone, one RayFunction per angular
// position psi in [0, phi]. Line psi is cone.ray(psi) sampled on a common grid.
class ConeFunction {
 public:
  ConeFunction(Cone cone, std::vector<double> angles, std::vector<RayFunction> rays);

  static ConeFunction sample(const Cone& cone, std::vector<double> angles, const Grid& grid,
                             const Evaluator& f, double weight_order = 0.0,
                             cplx weight_number = 0.0);
  // count angles spread uniformly over [0, phi], endpoints included.
  static std::vector<double> uniform_angles(double phi, int count);

  const Cone& cone() const { return cone_; }
  const std::vector<double>& angles() const { return angles_; }
  const std::vector<RayFunction>& rays() const { return rays_; }
  const RayFunction& lower_boundary() const { return rays_.front(); }
  const RayFunction& upper_boundary() const { return rays_.back(); }
  double weight_order() const { return rays_.front().weight_order(); }
  cplx weight_number() const { return rays_.front().weight_number(); }

 private:
  Cone cone_;
  std::vector<double> angles_;
  std::vector<RayFunction> rays_;
};

struct MembershipReport {
  std::vector<double> angles;
  // +inf where the ray norm overflowed or the integrand did not decay.
  std::vector<double> per_angle_norms;
  double sup_norm = 0.0;
  double boundary_norm_sum = 0.0;
  double ratio = 0.0;
  bool member_consistent = true;
  std::string verdict;
  std::vector<std::string> diagnostics;
};

// tail_divergence: a ray whose weighted integrand at the grid ends is at least
// this fraction of its peak (in magnitude) is treated as divergent.
MembershipReport membership_scan(const ConeFunction& f, double ratio_bound = 10.0,
                                 double tail_divergence = 0.5);

struct CauchyResult {
  Vec value;
  // Magnitude of the truncated contour integrand at the grid ends, times the extent.
  double tail_estimate = 0.0;
};

// Rebuilds the function at an interior point of one nappe from its two boundary
// half-lines. dist_min <= 0 selects five node spacings. The grid must have an
// odd node count so that the vertex is a node.
CauchyResult cauchy_reconstruct(const ConeFunction& f, cplx lambda, int s, cplx eta, cplx w,
                                double dist_min = -1.0);

// Causal factors (D - eta)^k on a time ray for any integer k, discretized by the
// second-order backward difference with zero history. Negative k integrates.
Mat causal_power(const RayFunction& F, cplx eta, int k);

// (D - eta)^{-s} theta_v (D - eta)^{s} F for any integer s.
RayFunction causal_projection(const RayFunction& F, int s, cplx eta, cplx v);

// Half-line projection onto the part of the ray past v; s must be an integer <= 0.
RayFunction project_halfline(const RayFunction& F, int s, cplx eta, cplx v);

struct IdempotenceReport {
  double max_deviation = 0.0;
};

// Compares P^r (at the ray offset) after P^s (at v) against P^s alone.
IdempotenceReport projection_idempotence_check(const RayFunction& F, int s, int r, cplx eta,
                                               cplx v);

enum class Support { forward, backward };

struct SweepRow {
  double offset = 0.0;
  double norm = 0.0;
  double ratio = 0.0;
  bool overflow = false;
};

struct PaleyWienerReport {
  double support_leakage = 0.0;
  std::vector<SweepRow> predicted;
  std::vector<SweepRow> opposite;
  double predicted_ratio = 0.0;
  bool consistent = false;
  bool opposite_rejected = false;
  std::string verdict;
  std::string opposite_verdict;
};

PaleyWienerReport paley_wiener_check(const RayFunction& F, Support side, double pw_bound = 1.5,
                                     double max_offset = 2.0, int steps = 8);

struct WindowReport {
  double outside_magnitude = 0.0;
  bool support_ok = true;
  std::vector<SweepRow> upper;
  std::vector<SweepRow> lower;
  bool upper_bounded = true;
  bool lower_bounded = true;
  bool bounded = true;
};

// Support in [a, b] (ray parameters): transforms on lines shifted up carry the
// weight at b, lines shifted down the weight at a.
WindowReport entire_window_check(const RayFunction& F, double a, double b, double bound = 1.5,
                                 double max_offset = 4.0, int steps = 8);

struct DecayRow {
  double psi = 0.0;
  double t = 0.0;
  double modulus = 0.0;
  double value = 0.0;
};

struct DecayProfile {
  std::vector<DecayRow> rows;
  bool tail_decreasing = true;
};

DecayProfile decay_profile(const ConeFunction& f, double ell);

}  // namespace conescale
