#include "doctest.h"

#include "conescale/error.hpp"
#include "conescale/transform.hpp"
#include "support.hpp"

using namespace conescale;
using namespace testing;

namespace {

const cplx I(0.0, 1.0);

// Direct quadrature of the forward transform, written out from its definition.
Mat direct_forward(double psi, cplx zeta, cplx w, const Grid& src, const Grid& dst, const Evaluator& f) {
  const cplx dir_t = std::polar(1.0, -psi);
  const cplx dir_f = std::polar(1.0, psi);
  Mat out = Mat::Zero(dst.count(), 1);
  for (long k = 0; k < dst.count(); ++k) {
    const cplx lambda = dir_f * dst.node(k) + zeta;
    cplx acc = 0.0;
    for (long n = 0; n < src.count(); ++n) {
      const cplx z = dir_t * src.node(n) + w;
      acc += std::exp(-I * lambda * z) * f(z)(0);
    }
    out(k, 0) = std::exp(-I * zeta * w) / std::sqrt(2.0 * kPi) * acc * src.spacing() * dir_t;
  }
  return out;
}

}  // namespace

TEST_SUITE("transform") {

TEST_CASE("zero in, zero out") {
  const Grid g(10.0, 256);
  const auto ctx = TransformContext::conjugate(kPi / 8, cplx(0, 0.3), 0.5, g);
  CHECK(max_abs(forward(ctx, RayFunction::zeros(ctx.time_ray(), g, 2)).values()) == 0.0);
  CHECK(max_abs(inverse(ctx, RayFunction::zeros(ctx.frequency_ray(), ctx.dst_grid(), 2)).values()) == 0.0);
  const ParsevalReport p = parseval_check(ctx, RayFunction::zeros(ctx.time_ray(), g, 1));
  CHECK(p.lhs == 0.0);
  CHECK(p.rhs == 0.0);
  CHECK(p.rel_err == 0.0);
}

TEST_CASE("Gaussian is self-dual on the real line") {
  const Grid g(20.0, 4096);
  const auto ctx = TransformContext::conjugate(0.0, 0.0, 0.0, g);
  const auto Fhat = forward(ctx, RayFunction::sample(ctx.time_ray(), g, scalar(half_gaussian)));
  double err = 0.0;
  for (long k = 0; k < g.count(); ++k)
    err = std::max(err, std::abs(Fhat.values()(k, 0) - half_gaussian(ctx.frequency_point(k))));
  CHECK(err <= 1e-8);
}

TEST_CASE("rotated Gaussian gives the entire continuation") {
  const Grid g(20.0, 4096);
  const auto ctx = TransformContext::conjugate(kPi / 8, 0.0, 0.0, g);
  const auto Fhat = forward(ctx, RayFunction::sample(ctx.time_ray(), g, scalar(half_gaussian)));
  double err = 0.0;
  for (long k = 0; k < g.count(); ++k)
    err = std::max(err, std::abs(Fhat.values()(k, 0) - half_gaussian(ctx.frequency_point(k))));
  CHECK(err <= 1e-7);
}

TEST_CASE("conjugate-grid transform matches direct quadrature") {
  const Grid g(8.0, 257);
  const double psi = kPi / 8;
  const cplx zeta(0.1, 0.3);
  const cplx w(0.5, -0.2);
  const auto ctx = TransformContext::conjugate(psi, zeta, w, g);
  auto f = scalar(half_gaussian);
  const Mat fast = forward(ctx, RayFunction::sample(ctx.time_ray(), g, f)).values();
  const Mat slow = direct_forward(psi, zeta, w, g, ctx.dst_grid(), f);
  CHECK(max_abs(fast - slow) <= 1e-12 * max_abs(slow));
}

TEST_CASE("general destination grids") {
  const Grid src(20.0, 2048);
  const Grid dst(6.0, 301);
  const TransformContext ctx(kPi / 16, 0.0, 0.0, src, dst);
  const auto Fhat = forward(ctx, RayFunction::sample(ctx.time_ray(), src, scalar(half_gaussian)));
  double err = 0.0;
  for (long k = 0; k < dst.count(); ++k)
    err = std::max(err, std::abs(Fhat.values()(k, 0) - half_gaussian(ctx.frequency_point(k))));
  CHECK(err <= 1e-8);
  CHECK(max_abs(Fhat.values() - direct_forward(kPi / 16, 0.0, 0.0, src, dst, scalar(half_gaussian))) < 1e-12);
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(TransformContext(0.0, 0.0, 0.0, Grid(20.0, 512), Grid(100.0, 512)), ValidationError);
  const Grid g(20.0, 512);
  const auto ctx = TransformContext::conjugate(0.0, 0.0, 0.0, g);
  const auto wrong = RayFunction::sample(Ray(0.1, 0.0, Side::time), g, scalar(half_gaussian));
  CHECK_THROWS_AS(forward(ctx, wrong), ValidationError);
  // Large weights push |Im(lambda z)| past the log bound.
  const auto big = TransformContext::conjugate(0.0, cplx(0.0, 40.0), 0.0, g);
  CHECK_THROWS_AS(forward(big, RayFunction::zeros(big.time_ray(), big.src_grid(), 1)), OverflowError);
}

TEST_CASE("round trip") {
  const Grid g(20.0, 4096);
  const auto ctx = TransformContext::conjugate(0.0, 0.0, 0.0, g);
  const auto F = RayFunction::sample(ctx.time_ray(), g, scalar(half_gaussian));
  CHECK(max_abs(inverse(ctx, forward(ctx, F)).values() - F.values()) <= 1e-8);

  const auto E = RayFunction::sample(ctx.time_ray(), g,
                                     scalar_fn([](cplx t) { return t.real() <= 0.0 ? std::exp(t) : 0.0; }));
  const Mat back = inverse(ctx, forward(ctx, E)).values();
  double err = 0.0;
  for (long k = 0; k < g.count(); ++k)
    if (std::abs(g.node(k)) > 1.5 * g.spacing()) err = std::max(err, std::abs(back(k, 0) - E.values()(k, 0)));
  CHECK(err <= 1e-6);

  const auto rot = TransformContext::conjugate(kPi / 8, cplx(0, 0.3), 0.5, g);
  const auto R = RayFunction::sample(rot.time_ray(), g, scalar(half_gaussian));
  CHECK(max_abs(inverse(rot, forward(rot, R)).values() - R.values()) <= 1e-8);
}

TEST_CASE("inverse of the sampled one-sided exponential transform") {
  // The sampled transform 1/(sqrt(2 pi)(1 - i xi)) decays only like 1/xi, so the
  // truncated inverse carries an error of about 1/(2 pi Xi |t|) at distance |t|
  // from the jump, Xi being the frequency half-width.
  const Grid g(20.0, 4096);
  const auto ctx = TransformContext::conjugate(0.0, 0.0, 0.0, g);
  const auto Fhat = RayFunction::sample(ctx.frequency_ray(), ctx.dst_grid(), scalar_fn([](cplx l) {
                                          return 1.0 / (std::sqrt(2.0 * kPi) * (1.0 - cplx(0, 1) * l));
                                        }));
  const RayFunction F = inverse(ctx, Fhat);
  const double Xi = ctx.dst_grid().half_width();
  for (double t : {-10.0, -3.0, -1.0, 1.0, 3.0, 10.0}) {
    const long k = std::lround((t + g.half_width()) / g.spacing());
    const double tk = g.node(k);
    const double exact = tk <= 0.0 ? std::exp(tk) : 0.0;
    const double err = std::abs(F.values()(k, 0) - exact);
    CHECK(err <= 1.0 / (2.0 * kPi * Xi * std::abs(tk)) + 1e-9);
  }
}

TEST_CASE("Parseval sweep") {
  const Grid g(20.0, 4096);
  double worst = 0.0;
  for (double psi : {0.0, kPi / 16, kPi / 8})
    for (cplx zeta : {cplx(0.0), cplx(0, 0.3), cplx(0, -0.3), cplx(0.2, 0.1)})
      for (cplx w : {cplx(0.0), cplx(0.5)}) {
        const auto ctx = TransformContext::conjugate(psi, zeta, w, g);
        const auto F = RayFunction::sample(ctx.time_ray(), g, scalar(half_gaussian));
        worst = std::max(worst, parseval_check(ctx, F).rel_err);
      }
  CHECK(worst <= 1e-6);
  const auto ctx = TransformContext::conjugate(0.0, 0.0, 0.0, g);
  const ParsevalReport p = parseval_check(ctx, RayFunction::sample(ctx.time_ray(), g, scalar(half_gaussian)));
  CHECK(p.lhs == doctest::Approx(std::pow(kPi, 0.25)).epsilon(1e-10));
  CHECK(p.rel_err <= 1e-8);
}

TEST_CASE("linearity") {
  const Grid g(20.0, 1024);
  const auto ctx = TransformContext::conjugate(kPi / 16, cplx(0, 0.3), 0.5, g);
  const auto F = RayFunction::sample(ctx.time_ray(), g, scalar(half_gaussian));
  const auto G = RayFunction::sample(ctx.time_ray(), g, scalar_fn([](cplx z) { return z * std::exp(-z * z); }));
  const cplx a(1.5, -0.5), b(-0.25, 2.0);
  const Mat lhs = forward(ctx, F.with_values(a * F.values() + b * G.values())).values();
  const Mat rhs = a * forward(ctx, F).values() + b * forward(ctx, G).values();
  // Round-off follows the largest phase factor, about e^{0.3 T} at the grid ends.
  CHECK(max_abs(lhs - rhs) <= 1e-12 * std::max(1.0, max_abs(rhs)));
}

TEST_CASE("derivative rule") {
  const Grid g(20.0, 4096);
  const auto ctx = TransformContext::conjugate(0.0, 0.0, 0.0, g);
  const auto Fhat = forward(ctx, RayFunction::sample(ctx.time_ray(), g, scalar(half_gaussian)));
  CHECK(max_abs(apply_derivative_rule(ctx, Fhat, 0).values() - inverse(ctx, Fhat).values()) == 0.0);
  const Mat d1 = apply_derivative_rule(ctx, Fhat, 1).values();
  const Mat d2 = apply_derivative_rule(ctx, Fhat, 2).values();
  double e1 = 0.0, e2 = 0.0;
  for (long k = 0; k < g.count(); ++k) {
    const double t = g.node(k);
    e1 = std::max(e1, std::abs(d1(k, 0) - I * t * std::exp(-t * t / 2)));
    e2 = std::max(e2, std::abs(d2(k, 0) - (1.0 - t * t) * std::exp(-t * t / 2)));
  }
  CHECK(e1 <= 1e-6);
  CHECK(e2 <= 1e-5);
  CHECK_THROWS_AS(apply_derivative_rule(ctx, Fhat, -1), ValidationError);
}

TEST_CASE("derivative rule against second-order differences converges at order two") {
  auto err_at = [](long n) {
    const Grid g(10.0, n);
    const auto ctx = TransformContext::conjugate(0.0, 0.0, 0.0, g);
    const auto Fhat = forward(ctx, RayFunction::sample(ctx.time_ray(), g, scalar(half_gaussian)));
    const Mat u = inverse(ctx, Fhat).values();
    const Mat d = apply_derivative_rule(ctx, Fhat, 1).values();
    const double h = g.spacing();
    double e = 0.0;
    for (long k = 1; k + 1 < n; ++k) {
      const cplx fd = -I * (u(k + 1, 0) - u(k - 1, 0)) / (2.0 * h);
      e = std::max(e, std::abs(fd - d(k, 0)));
    }
    return e;
  };
  const double coarse = err_at(257);
  const double fine = err_at(513);
  CHECK(std::log2(coarse / fine) >= 1.8);
}

}  // TEST_SUITE
