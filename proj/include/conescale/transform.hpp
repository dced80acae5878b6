#pragma once

#include "conescale/geometry.hpp"

namespace conescale {

// Transform between the time ray e^{-i psi} R + w (sampled on src_grid) and the
// frequency ray e^{i psi} R + zeta (sampled on dst_grid).
class TransformContext {
 public:
  TransformContext(double psi, cplx zeta, cplx w, Grid src_grid, Grid dst_grid);

  // Destination grid with the same node count and spacing 2 pi / (N dt). With
  // it forward and inverse are exact discrete inverses of each other.
  static TransformContext conjugate(double psi, cplx zeta, cplx w, const Grid& src_grid);

  double psi() const { return psi_; }
  cplx zeta() const { return zeta_; }
  cplx w() const { return w_; }
  const Grid& src_grid() const { return src_; }
  const Grid& dst_grid() const { return dst_; }
  Ray time_ray() const { return Ray(psi_, w_, Side::time); }
  Ray frequency_ray() const { return Ray(psi_, zeta_, Side::frequency); }
  cplx frequency_point(long k) const { return frequency_ray().point(dst_.node(k)); }
  cplx time_point(long k) const { return time_ray().point(src_.node(k)); }

 private:
  double psi_;
  cplx zeta_;
  cplx w_;
  Grid src_;
  Grid dst_;
};

// Time side to frequency side.
RayFunction forward(const TransformContext& ctx, const RayFunction& F);
// Frequency side to time side.
RayFunction inverse(const TransformContext& ctx, const RayFunction& Fhat);

struct ParsevalReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_err = 0.0;
};

// Frequency-side norm with weight w against the time-side norm with weight -zeta.
ParsevalReport parseval_check(const TransformContext& ctx, const RayFunction& F);

// Inverse transform of lambda^j Fhat, i.e. D^j applied to the inverse of Fhat.
RayFunction apply_derivative_rule(const TransformContext& ctx, const RayFunction& Fhat, int j);

}  // namespace conescale
