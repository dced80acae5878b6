#include "conescale/hardy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "conescale/error.hpp"
#include "conescale/transform.hpp"

namespace conescale {

namespace {

const cplx I(0.0, 1.0);
constexpr double kInf = std::numeric_limits<double>::infinity();

bool on_or_past(double t, double tv, double h) { return t >= tv - 1e-9 * h; }

double safe_ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  if (den == 0.0 || !std::isfinite(num)) return kInf;
  return num / den;
}

}  // namespace

ConeFunction::ConeFunction(Cone cone, std::vector<double> angles, std::vector<RayFunction> rays)
    : cone_(cone), angles_(std::move(angles)), rays_(std::move(rays)) {
  if (angles_.size() < 2 || angles_.size() != rays_.size())
    throw ValidationError("cone function needs one ray per angle and at least two angles");
  if (!std::is_sorted(angles_.begin(), angles_.end()))
    throw ValidationError("cone function angles must be sorted");
  const double phi = cone_.angle();
  if (std::abs(angles_.front()) > 1e-14 || std::abs(angles_.back() - phi) > 1e-14)
    throw ValidationError("cone function angles must include 0 and the cone angle");
  for (std::size_t i = 0; i < rays_.size(); ++i) {
    const RayFunction& r = rays_[i];
    const Ray expected = cone_.ray(angles_[i]);
    if (r.ray().side() != Side::frequency || std::abs(r.ray().direction() - expected.direction()) > 1e-12 ||
        std::abs(r.ray().offset() - cone_.vertex()) > 1e-12)
      throw ValidationError("cone function ray does not match its angle");
    if (r.dim() != rays_.front().dim() || r.weight_order() != rays_.front().weight_order() ||
        r.weight_number() != rays_.front().weight_number() || !(r.grid() == rays_.front().grid()))
      throw ValidationError("cone function rays must share grid, dimension and weights");
  }
}

ConeFunction ConeFunction::sample(const Cone& cone, std::vector<double> angles, const Grid& grid,
                                  const Evaluator& f, double weight_order, cplx weight_number) {
  std::vector<RayFunction> rays;
  rays.reserve(angles.size());
  for (double psi : angles)
    rays.push_back(RayFunction::sample(cone.ray(psi), grid, f, weight_order, weight_number));
  return ConeFunction(cone, std::move(angles), std::move(rays));
}

std::vector<double> ConeFunction::uniform_angles(double phi, int count) {
  if (count < 2) throw ValidationError("need at least two angles");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[i] = phi * i / (count - 1);
  out.back() = phi;
  return out;
}

MembershipReport membership_scan(const ConeFunction& f, double ratio_bound, double tail_divergence) {
  if (f.angles().size() < 5) throw ValidationError("membership scan needs at least five angles");
  MembershipReport rep;
  rep.angles = f.angles();
  bool all_finite = true;
  for (std::size_t i = 0; i < f.rays().size(); ++i) {
    double value = kInf;
    try {
      const NormResult n = weighted_l2_norm(f.rays()[i]);
      if (n.tail >= tail_divergence) {
        std::ostringstream d;
        d << "psi=" << f.angles()[i] << ": integrand does not decay (tail " << n.tail << ")";
        rep.diagnostics.push_back(d.str());
      } else {
        value = n.value;
      }
    } catch (const OverflowError& e) {
      std::ostringstream d;
      d << "psi=" << f.angles()[i] << ": " << e.what();
      rep.diagnostics.push_back(d.str());
    }
    if (!std::isfinite(value)) all_finite = false;
    rep.per_angle_norms.push_back(value);
    rep.sup_norm = std::max(rep.sup_norm, value);
  }
  rep.boundary_norm_sum = rep.per_angle_norms.front() + rep.per_angle_norms.back();
  rep.ratio = all_finite ? safe_ratio(rep.sup_norm, rep.boundary_norm_sum) : kInf;
  rep.member_consistent = all_finite && rep.ratio <= ratio_bound;
  rep.verdict = rep.member_consistent ? "member-consistent" : "violated";
  return rep;
}

CauchyResult cauchy_reconstruct(const ConeFunction& f, cplx lambda, int s, cplx eta, cplx w,
                                double dist_min) {
  const Cone& cone = f.cone();
  const Grid& grid = f.lower_boundary().grid();
  if (grid.count() % 2 == 0) throw ValidationError("Cauchy reconstruction needs an odd node count");
  if (s > 0 && static_cast<double>(s) > f.weight_order())
    throw ValidationError("Cauchy exponent s must not exceed the weight order");
  const double h = grid.spacing();
  if (dist_min <= 0.0) dist_min = 5.0 * h;
  const cplx zeta = cone.vertex();
  const double phi = cone.angle();
  const int o = cone.orientation();

  // Nappe of lambda and its clockwise-most (da) and counterclockwise-most (db) edges.
  cplx d = lambda - zeta;
  if (o < 0) d = std::conj(d);
  const double a = std::arg(d);
  double sign;
  if (a > 0.0 && a < phi)
    sign = 1.0;
  else if (a > -kPi && a < -kPi + phi)
    sign = -1.0;
  else
    throw ValidationError("Cauchy reconstruction point is not inside the cone");
  const cplx e0(sign, 0.0);
  const cplx e1 = sign * std::polar(1.0, o * phi);
  const cplx da = o > 0 ? e0 : e1;
  const cplx db = o > 0 ? e1 : e0;
  // Boundary data for each edge: ray index (0 lower, 1 upper) and direction of travel in t.
  auto edge_source = [&](cplx dir) -> std::pair<const RayFunction*, double> {
    if (std::abs(dir - e0) < 1e-12) return {&f.lower_boundary(), sign};
    return {&f.upper_boundary(), sign};
  };

  auto edge_distance = [&](cplx dir) {
    const double t = std::real((lambda - zeta) * std::conj(dir));
    if (t <= 0.0) return std::abs(lambda - zeta);
    return std::abs(std::imag((lambda - zeta) * std::conj(dir)));
  };
  if (std::min(edge_distance(da), edge_distance(db)) < dist_min)
    throw ValidationError("Cauchy reconstruction point too close to the contour (ill-conditioned kernel)");
  if (s != 0) {
    cplx de = eta - zeta;
    if (o < 0) de = std::conj(de);
    const double ae = std::arg(de);
    const bool in_nappe = sign > 0 ? (ae >= -1e-12 && ae <= phi + 1e-12)
                                   : (ae <= -kPi + phi + 1e-12 || ae >= kPi - 1e-12);
    if (in_nappe || std::abs(eta - zeta) < 1e-12)
      throw ValidationError("Cauchy auxiliary point must lie outside the closed half-cone");
  }

  const long n = grid.count();
  const long mid = (n - 1) / 2;
  const cplx denom_pref = 1.0 / (2.0 * kPi * I * std::pow(lambda - eta, s));
  Vec total = Vec::Zero(f.lower_boundary().dim());
  double tail = 0.0;
  for (int edge = 0; edge < 2; ++edge) {
    const cplx dir = edge == 0 ? da : db;
    const double orient = edge == 0 ? 1.0 : -1.0;
    auto [src, tsign] = edge_source(dir);
    Vec acc = Vec::Zero(total.size());
    for (long j = 0; j <= mid; ++j) {
      const long node = tsign > 0 ? mid + j : mid - j;
      const double t = static_cast<double>(j) * h;
      const cplx mu = zeta + dir * t;
      const cplx kern = std::exp(I * w * (mu - lambda)) * std::pow(mu - eta, s) * denom_pref / (mu - lambda);
      const double wt = (j == 0 || j == mid) ? 0.5 * h : h;
      acc += (wt * kern) * src->values().row(node).transpose();
      if (j == mid) tail += std::abs(kern) * src->values().row(node).norm() * t;
    }
    total += orient * dir * acc;
  }
  return {total, tail};
}

Mat causal_power(const RayFunction& F, cplx eta, int k) {
  const long n = F.grid().count();
  const double h = F.grid().spacing();
  const cplx c = cplx(0.0, -1.0) / F.ray().direction();
  const cplx a0 = 3.0 * c / (2.0 * h);
  const cplx a1 = -4.0 * c / (2.0 * h);
  const cplx a2 = c / (2.0 * h);
  Mat u = F.values();
  for (int step = 0; step < std::abs(k); ++step) {
    Mat out(n, u.cols());
    if (k > 0) {
      for (long i = 0; i < n; ++i) {
        out.row(i) = (a0 - eta) * u.row(i);
        if (i >= 1) out.row(i) += a1 * u.row(i - 1);
        if (i >= 2) out.row(i) += a2 * u.row(i - 2);
      }
    } else {
      const cplx diag = a0 - eta;
      for (long i = 0; i < n; ++i) {
        out.row(i) = u.row(i);
        if (i >= 1) out.row(i) -= a1 * out.row(i - 1);
        if (i >= 2) out.row(i) -= a2 * out.row(i - 2);
        out.row(i) /= diag;
      }
    }
    u = std::move(out);
  }
  return u;
}

RayFunction causal_projection(const RayFunction& F, int s, cplx eta, cplx v) {
  if (F.ray().side() != Side::time) throw ValidationError("projections act on time-side rays");
  if (!F.ray().contains(v, 1e-9)) throw ValidationError("projection point is not on the ray");
  if (s != 0) {
    const cplx rel = (eta - F.weight_number()) * std::polar(1.0, -F.ray().angle());
    if (!(rel.imag() > 0.0))
      throw ValidationError("projection parameter eta must lie above the frequency line e^{i phi}R + zeta");
  }
  const double tv = F.ray().parameter(v);
  const double h = F.grid().spacing();
  Mat g = s == 0 ? F.values() : causal_power(F, eta, s);
  for (long i = 0; i < g.rows(); ++i)
    if (!on_or_past(F.grid().node(i), tv, h)) g.row(i).setZero();
  if (s == 0) return F.with_values(std::move(g));
  return F.with_values(causal_power(F.with_values(std::move(g)), eta, -s));
}

RayFunction project_halfline(const RayFunction& F, int s, cplx eta, cplx v) {
  if (s > 0) throw ValidationError("unsupported projection order: s must be an integer <= 0");
  return causal_projection(F, s, eta, v);
}

IdempotenceReport projection_idempotence_check(const RayFunction& F, int s, int r, cplx eta, cplx v) {
  if (r > s) throw ValidationError("idempotence check needs r <= s");
  if (s > 0) throw ValidationError("unsupported projection order: s must be an integer <= 0");
  if (F.ray().parameter(v) < 0.0)
    throw ValidationError("inner projection point must not lie behind the ray offset");
  const RayFunction inner = project_halfline(F, s, eta, v);
  const RayFunction outer = project_halfline(inner, r, eta, F.ray().offset());
  IdempotenceReport rep;
  rep.max_deviation = (outer.values() - inner.values()).cwiseAbs().maxCoeff();
  return rep;
}

namespace {

std::vector<SweepRow> sweep(const RayFunction& F, cplx weight, double direction, double max_offset,
                            int steps) {
  const Ray& ray = F.ray();
  const cplx up = I * std::polar(1.0, ray.angle());
  std::vector<SweepRow> rows;
  double base = 0.0;
  for (int k = 0; k <= steps; ++k) {
    SweepRow row;
    row.offset = direction * max_offset * k / steps;
    try {
      const auto ctx = TransformContext::conjugate(ray.angle(), F.weight_number() + up * row.offset,
                                                   ray.offset(), F.grid());
      const RayFunction Fhat = forward(ctx, F);
      row.norm = weighted_l2_norm(RayFunction(Fhat.ray(), Fhat.grid(), Fhat.values(), 0.0, weight)).value;
      if (!std::isfinite(row.norm)) throw OverflowError("non-finite sweep norm", -1);
    } catch (const OverflowError&) {
      row.overflow = true;
      row.norm = kInf;
    }
    if (k == 0) base = row.norm;
    row.ratio = safe_ratio(row.norm, base);
    rows.push_back(row);
  }
  return rows;
}

double max_ratio(const std::vector<SweepRow>& rows) {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.overflow ? kInf : r.ratio);
  return m;
}

}  // namespace

PaleyWienerReport paley_wiener_check(const RayFunction& F, Support side, double pw_bound,
                                     double max_offset, int steps) {
  if (F.ray().side() != Side::time) throw ValidationError("Paley-Wiener check needs a time-side ray");
  PaleyWienerReport rep;
  const double h = F.grid().spacing();
  double mass = 0.0;
  for (long i = 0; i < F.grid().count(); ++i) {
    const double t = F.grid().node(i);
    const bool wrong = side == Support::backward ? t > 1e-9 * h : t < -1e-9 * h;
    if (!wrong) continue;
    const double lw = 2.0 * log_exp_weight(F.point(i), F.weight_number());
    mass += h * std::exp(lw) * F.values().row(i).squaredNorm();
  }
  rep.support_leakage = std::sqrt(mass);
  // Backward support pairs with analyticity above the line, forward support below.
  const double dir = side == Support::backward ? 1.0 : -1.0;
  const cplx weight = F.ray().offset();
  rep.predicted = sweep(F, weight, dir, max_offset, steps);
  rep.opposite = sweep(F, weight, -dir, max_offset, steps);
  rep.predicted_ratio = max_ratio(rep.predicted);
  rep.consistent = rep.support_leakage < 1e-8 && rep.predicted_ratio <= pw_bound;
  rep.opposite_rejected = max_ratio(rep.opposite) > pw_bound;
  rep.verdict = rep.consistent ? "consistent" : "inconsistent";
  rep.opposite_verdict = rep.opposite_rejected ? "correctly-rejected" : "not-rejected";
  return rep;
}

WindowReport entire_window_check(const RayFunction& F, double a, double b, double bound,
                                 double max_offset, int steps) {
  if (F.ray().side() != Side::time) throw ValidationError("window check needs a time-side ray");
  if (!(a < b)) throw ValidationError("window check needs a < b");
  WindowReport rep;
  for (long i = 0; i < F.grid().count(); ++i) {
    const double t = F.grid().node(i);
    if (t < a || t > b) rep.outside_magnitude = std::max(rep.outside_magnitude, F.values().row(i).norm());
  }
  rep.support_ok = rep.outside_magnitude <= 1e-12;
  rep.upper = sweep(F, F.ray().point(b), 1.0, max_offset, steps);
  rep.lower = sweep(F, F.ray().point(a), -1.0, max_offset, steps);
  rep.upper_bounded = max_ratio(rep.upper) <= bound;
  rep.lower_bounded = max_ratio(rep.lower) <= bound;
  rep.bounded = rep.upper_bounded && rep.lower_bounded;
  return rep;
}

DecayProfile decay_profile(const ConeFunction& f, double ell) {
  DecayProfile out;
  const double phi = f.cone().angle();
  const cplx zeta = f.cone().vertex();
  const cplx w = f.weight_number();
  for (std::size_t i = 0; i < f.rays().size(); ++i) {
    const double psi = f.angles()[i];
    if (psi < phi / 10.0 - 1e-14 || psi > phi - phi / 10.0 + 1e-14) continue;
    const RayFunction& r = f.rays()[i];
    const Grid& g = r.grid();
    const long n = g.count();
    std::vector<double> value(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k) {
      const cplx lambda = r.point(k);
      const double v = std::exp(-std::imag(w * lambda)) * std::pow(1.0 + std::abs(lambda), ell) *
                       std::sqrt(std::abs(lambda - zeta)) * r.values().row(k).norm();
      value[static_cast<std::size_t>(k)] = v;
      out.rows.push_back({psi, g.node(k), std::abs(lambda), v});
    }
    // Suffix maxima over |t| >= L for L = T/2, 5T/8, ..., T, separately per nappe.
    for (int nappe = 0; nappe < 2; ++nappe) {
      double previous = -1.0;
      for (int q = 4; q <= 8; ++q) {
        const double L = g.half_width() * q / 8.0;
        double m = 0.0;
        for (long k = 0; k < n; ++k) {
          const double t = g.node(k);
          if ((nappe == 0 ? t : -t) >= L - 1e-12) m = std::max(m, value[static_cast<std::size_t>(k)]);
        }
        if (previous >= 0.0 && previous > 0.0 && !(m < previous)) out.tail_decreasing = false;
        previous = m;
      }
    }
  }
  return out;
}

}  // namespace conescale
