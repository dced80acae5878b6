#include "doctest.h"

#include "conescale/error.hpp"
#include "conescale/hardy.hpp"
#include "conescale/transform.hpp"
#include "support.hpp"

using namespace conescale;
using namespace testing;

namespace {

const cplx I(0.0, 1.0);

ConeFunction gaussian_cone(double phi, const Grid& g) {
  return ConeFunction::sample(Cone(phi, 0.0, 1), ConeFunction::uniform_angles(phi, 9), g, scalar(half_gaussian));
}

double cauchy_error(long n, const std::vector<cplx>& points) {
  const Grid g(10.0, n);
  const ConeFunction f = gaussian_cone(kPi / 6, g);
  double worst = 0.0;
  for (cplx l : points)
    worst = std::max(worst, std::abs(cauchy_reconstruct(f, l, 0, -I, 0.0).value(0) - half_gaussian(l)));
  return worst;
}

}  // namespace

TEST_SUITE("hardy") {

TEST_CASE("membership scan") {
  const Grid g(20.0, 2048);
  const Cone k(kPi / 6, 0.0, 1);
  const auto zero = ConeFunction::sample(k, ConeFunction::uniform_angles(kPi / 6, 5), g,
                                         [](cplx) { return Vec::Zero(2).eval(); });
  const MembershipReport z = membership_scan(zero);
  CHECK(z.member_consistent);
  CHECK(z.sup_norm == 0.0);

  const MembershipReport m = membership_scan(gaussian_cone(kPi / 6, g));
  CHECK(m.verdict == "member-consistent");
  // |e^{-l^2/2}| = e^{-cos(2 psi) t^2 / 2}: the ray norm is (pi / cos(2 psi))^{1/4}.
  for (std::size_t i = 0; i < m.angles.size(); ++i)
    CHECK(m.per_angle_norms[i] == doctest::Approx(std::pow(kPi / std::cos(2 * m.angles[i]), 0.25)).epsilon(1e-10));
  CHECK(m.sup_norm >= m.per_angle_norms.front());
  CHECK(m.sup_norm >= m.per_angle_norms.back());

  const MembershipReport wide = membership_scan(gaussian_cone(3 * kPi / 8, g));
  CHECK(wide.verdict == "violated");
  CHECK_FALSE(wide.diagnostics.empty());
  CHECK_THROWS_AS(membership_scan(ConeFunction::sample(k, ConeFunction::uniform_angles(kPi / 6, 3), g,
                                                       scalar(half_gaussian))),
                  ValidationError);
}

TEST_CASE("Cauchy reconstruction of the Gaussian") {
  const Grid g(10.0, 8193);
  const ConeFunction zero = ConeFunction::sample(Cone(kPi / 6, 0.0, 1), ConeFunction::uniform_angles(kPi / 6, 5), g,
                                                 [](cplx) { return Vec::Zero(1).eval(); });
  CHECK(std::abs(cauchy_reconstruct(zero, 0.5 * std::polar(1.0, kPi / 12), 0, -I, 0.0).value(0)) == 0.0);

  const ConeFunction f = gaussian_cone(kPi / 6, g);
  const cplx l = 0.5 * std::polar(1.0, kPi / 12);
  const CauchyResult r = cauchy_reconstruct(f, l, 0, -I, 0.0);
  CHECK(std::abs(r.value(0) - half_gaussian(l)) <= 1e-6);
  CHECK(r.tail_estimate < 1e-10);
  // Lower nappe, and a weighted kernel with s < 0.
  const cplx lo = -0.8 * std::polar(1.0, kPi / 12);
  CHECK(std::abs(cauchy_reconstruct(f, lo, 0, -I, 0.0).value(0) - half_gaussian(lo)) <= 1e-6);
  CHECK(std::abs(cauchy_reconstruct(f, l, -1, -I, 0.0).value(0) - half_gaussian(l)) <= 1e-6);
}

TEST_CASE("Cauchy reconstruction of a rational function") {
  // 1/(l + 2i)^2 decays only like 1/|l|^2; the weight w = 2i adds e^{-2 Re(mu - l)}
  // on the right-hand nappe so the truncated contour converges.
  const Grid g(10.0, 8193);
  auto f = scalar_fn([](cplx l) { return 1.0 / ((l + 2.0 * I) * (l + 2.0 * I)); });
  const ConeFunction c = ConeFunction::sample(Cone(kPi / 6, 0.0, 1), ConeFunction::uniform_angles(kPi / 6, 5), g, f);
  const cplx l = 0.3 * std::polar(1.0, kPi / 12);
  CHECK(std::abs(cauchy_reconstruct(c, l, 0, -I, 2.0 * I).value(0) - f(l)(0)) <= 1e-6);
}

TEST_CASE("Cauchy reconstruction converges at second order") {
  std::vector<cplx> points;
  for (int i = 0; i < 5; ++i) points.push_back((0.5 + 0.3 * i) * std::polar(1.0, kPi / 12 + (i - 2) * 0.05));
  const double coarse = cauchy_error(4097, points);
  const double fine = cauchy_error(8193, points);
  CHECK(fine <= 1e-6);
  CHECK(std::log2(coarse / fine) >= 1.8);
}

TEST_CASE("Cauchy reconstruction preconditions") {
  const Grid g(10.0, 4097);
  const ConeFunction f = gaussian_cone(kPi / 6, g);
  CHECK_THROWS_AS(cauchy_reconstruct(f, std::polar(1.0, kPi / 4), 0, -I, 0.0), ValidationError);
  CHECK_THROWS_AS(cauchy_reconstruct(f, std::polar(1.0, 1e-3), 0, -I, 0.0), ValidationError);
  CHECK_THROWS_AS(cauchy_reconstruct(f, 0.5 * std::polar(1.0, kPi / 12), -1, std::polar(2.0, kPi / 12), 0.0),
                  ValidationError);
  const ConeFunction even = gaussian_cone(kPi / 6, Grid(10.0, 4096));
  CHECK_THROWS_AS(cauchy_reconstruct(even, 0.5 * std::polar(1.0, kPi / 12), 0, -I, 0.0), ValidationError);
}

TEST_CASE("half-line projection with s = 0") {
  const Grid g(20.0, 4001);
  const Ray r(0.0, 0.0, Side::time);
  const cplx v = 0.0;
  const auto fwd = RayFunction::sample(r, g, scalar_fn([](cplx t) { return std::exp(-(t - 8.0) * (t - 8.0)); }));
  CHECK(max_abs(project_halfline(fwd, 0, 2.0 * I, v).values() - fwd.values()) <= 1e-12);
  const auto bwd = RayFunction::sample(r, g, scalar_fn([](cplx t) { return std::exp(-(t + 8.0) * (t + 8.0)); }));
  CHECK(max_abs(project_halfline(bwd, 0, 2.0 * I, v).values()) <= 1e-12);

  const cplx vc = r.point(g.node(2300));
  const auto gauss = RayFunction::sample(r, g, scalar_fn([vc](cplx t) { return std::exp(-(t - vc) * (t - vc)); }));
  const Mat p = project_halfline(gauss, 0, 2.0 * I, vc).values();
  for (long k = 0; k < g.count(); ++k) {
    const cplx expect = k >= 2300 ? gauss.values()(k, 0) : cplx(0.0);
    CHECK(p(k, 0) == expect);
  }
  CHECK_THROWS_AS(project_halfline(gauss, 1, 2.0 * I, vc), ValidationError);
  CHECK_THROWS_AS(project_halfline(gauss, 0, 2.0 * I, cplx(0.0, 1.0)), ValidationError);
  CHECK_THROWS_AS(project_halfline(gauss, -1, -2.0 * I, vc), ValidationError);
}

TEST_CASE("orthogonal mass split") {
  const Grid g(20.0, 4001);
  const Ray r(kPi / 12, 0.3, Side::time);
  const auto F = RayFunction::sample(r, g, scalar(unit_gaussian));
  const cplx v = r.point(0.37);
  const RayFunction P = project_halfline(F, 0, 2.0 * I, v);
  const RayFunction Q = F.with_values(F.values() - P.values());
  const double a = weighted_l2_norm(F).value;
  const double b = weighted_l2_norm(P).value;
  const double c = weighted_l2_norm(Q).value;
  CHECK(std::abs(a * a - b * b - c * c) <= 1e-14 * a * a);
  for (long k = 0; k < g.count(); ++k) CHECK(P.values()(k, 0) * Q.values()(k, 0) == cplx(0.0));
}

TEST_CASE("projection idempotence") {
  const Grid g(20.0, 4096);
  const Ray r(0.0, 0.0, Side::time);
  const cplx v = r.point(g.node(2200));
  const auto F = RayFunction::sample(r, g, scalar_fn([](cplx t) { return std::exp(-(t - 0.5) * (t - 0.5)); }));
  CHECK(projection_idempotence_check(F, 0, 0, 2.0 * I, v).max_deviation <= 1e-12);
  CHECK(projection_idempotence_check(F, 0, -1, 2.0 * I, v).max_deviation <= 1e-6);
  CHECK(projection_idempotence_check(F.with_values(Mat::Zero(g.count(), 1)), 0, -1, 2.0 * I, v).max_deviation == 0.0);
  CHECK_THROWS_AS(projection_idempotence_check(F, -1, 0, 2.0 * I, v), ValidationError);
}

TEST_CASE("causal powers invert each other") {
  const Grid g(10.0, 1001);
  const auto F = RayFunction::sample(Ray(0.0, 0.0, Side::time), g, scalar(unit_gaussian));
  const cplx eta(0.3, 1.5);
  const Mat back = causal_power(F.with_values(causal_power(F, eta, -2)), eta, 2);
  CHECK(max_abs(back - F.values()) <= 1e-11);
  // (D - eta)^{-1} of a function vanishing at the left end solves (D - eta) u = F to O(h^2).
  const Mat u = causal_power(F, eta, -1);
  const double h = g.spacing();
  double err = 0.0;
  for (long k = 1; k + 1 < g.count(); ++k) {
    const cplx du = -I * (u(k + 1, 0) - u(k - 1, 0)) / (2.0 * h);
    err = std::max(err, std::abs(du - eta * u(k, 0) - F.values()(k, 0)));
  }
  CHECK(err < 1e-3);
}

TEST_CASE("Paley-Wiener check") {
  const Grid g(20.0, 4096);
  const Ray r(0.0, 0.0, Side::time);
  const auto E = RayFunction::sample(r, g, scalar_fn([](cplx t) { return t.real() <= 0.0 ? std::exp(t) : 0.0; }));
  const PaleyWienerReport p = paley_wiener_check(E, Support::backward);
  CHECK(p.support_leakage < 1e-8);
  CHECK(p.predicted_ratio <= 1.5);
  CHECK(p.verdict == "consistent");
  CHECK(p.opposite_verdict == "correctly-rejected");

  const PaleyWienerReport wrong = paley_wiener_check(E, Support::forward);
  CHECK(wrong.verdict == "inconsistent");

  const PaleyWienerReport zero = paley_wiener_check(RayFunction::zeros(r, g, 1), Support::backward);
  CHECK(zero.support_leakage == 0.0);
  CHECK(zero.consistent);
}

TEST_CASE("entire window check") {
  const Grid g(20.0, 4096);
  const Ray r(0.0, 0.0, Side::time);
  const auto bump = RayFunction::sample(r, g, scalar_fn([](cplx t) {
                                          const double x = t.real();
                                          return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
                                        }));
  const WindowReport b = entire_window_check(bump, -1.0, 1.0);
  CHECK(b.support_ok);
  CHECK(b.bounded);

  const auto gauss = RayFunction::sample(r, g, scalar(unit_gaussian));
  // The shifted Gaussian transform grows like e^{o^2/4} against the e^{o} window weight.
  const WindowReport w = entire_window_check(gauss, -1.0, 1.0, 1.5, 8.0);
  CHECK_FALSE(w.support_ok);
  CHECK_FALSE(w.bounded);

  CHECK(entire_window_check(RayFunction::zeros(r, g, 1), -1.0, 1.0).bounded);
}

TEST_CASE("decay profile") {
  const Grid g(20.0, 2048);
  const Cone k(kPi / 6, 0.0, 1);
  const auto zero = ConeFunction::sample(k, ConeFunction::uniform_angles(kPi / 6, 11), g,
                                         [](cplx) { return Vec::Zero(1).eval(); });
  for (const DecayRow& row : decay_profile(zero, 0.0).rows) CHECK(row.value == 0.0);

  const DecayProfile gp = decay_profile(gaussian_cone(kPi / 6, g), 0.0);
  CHECK(gp.tail_decreasing);
  for (const DecayRow& row : gp.rows)
    CHECK(row.value == doctest::Approx(std::sqrt(row.modulus) * std::exp(-std::cos(2 * row.psi) * row.modulus * row.modulus / 2))
                           .epsilon(1e-12));

  // 1/(l + 2i) on the right-hand nappe: |l|^{1/2} / |l + 2i| ~ |l|^{-1/2}.
  const auto rat = ConeFunction::sample(k, ConeFunction::uniform_angles(kPi / 6, 11), g,
                                        scalar_fn([](cplx l) { return 1.0 / (l + 2.0 * I); }));
  const DecayProfile rp = decay_profile(rat, 0.0);
  CHECK(rp.tail_decreasing);
  for (const DecayRow& row : rp.rows)
    if (std::abs(row.t) > 15.0) {
      CHECK(row.value * std::sqrt(row.modulus) > 0.85);
      CHECK(row.value * std::sqrt(row.modulus) < 1.15);
    }
}

TEST_CASE("boundary samples have a stable modulus of continuity") {
  // Weight order above 1/2: |F(t_{k+1}) - F(t_k)| <= C dt^{1/2}, C stable under refinement.
  auto modulus = [](long n) {
    const Grid g(10.0, n);
    const ConeFunction f =
        ConeFunction::sample(Cone(kPi / 6, 0.0, 1), ConeFunction::uniform_angles(kPi / 6, 5), g, scalar(half_gaussian), 1.0);
    double c = 0.0;
    for (const RayFunction* r : {&f.lower_boundary(), &f.upper_boundary()})
      for (long k = 0; k + 1 < n; ++k)
        c = std::max(c, std::abs(r->values()(k + 1, 0) - r->values()(k, 0)) / std::sqrt(g.spacing()));
    return c;
  };
  const double c1 = modulus(1025);
  const double c2 = modulus(2049);
  CHECK(c2 <= c1);
}

}  // TEST_SUITE
