#include "conescale/transform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unsupported/Eigen/FFT>

#include "conescale/error.hpp"
#include "conescale/parallel.hpp"

namespace conescale {

namespace {

constexpr long kReanchor = 128;
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * kPi);

bool same_ray(const Ray& a, const Ray& b) {
  return a.side() == b.side() && std::abs(a.angle() - b.angle()) < 1e-14 &&
         std::abs(a.offset() - b.offset()) < 1e-14 * std::max(1.0, std::abs(a.offset()));
}

bool conjugate_grids(const Grid& a, const Grid& b);
Mat oscillatory_sum_fft(const Grid& outer, const Grid& inner, double sign, const Mat& in);

// out(k, c) = sum_n exp(sign i x_k y_n) in(n, c), x on `outer`, y on `inner`.
// The phase along n is advanced by a per-k recurrence that is re-anchored
// periodically; the loop runs over k innermost so it vectorizes.
Mat oscillatory_sum(const Grid& outer, const Grid& inner, double sign, const Mat& in) {
  if (conjugate_grids(outer, inner)) return oscillatory_sum_fft(outer, inner, sign, in);
  const long K = outer.count();
  const long N = inner.count();
  const long C = in.cols();
  Mat out(K, C);
  parallel_for(static_cast<std::size_t>(K), [&](std::size_t kb, std::size_t ke) {
    const long len = static_cast<long>(ke - kb);
    std::vector<double> pr(len), pi(len), sr(len), si(len);
    std::vector<double> ar(len * C, 0.0), ai(len * C, 0.0);
    for (long i = 0; i < len; ++i) {
      const double x = outer.node(static_cast<long>(kb) + i);
      const double step = sign * x * inner.spacing();
      sr[i] = std::cos(step);
      si[i] = std::sin(step);
    }
    for (long n = 0; n < N; ++n) {
      if (n % kReanchor == 0) {
        const double y = inner.node(n);
        for (long i = 0; i < len; ++i) {
          const double ph = sign * outer.node(static_cast<long>(kb) + i) * y;
          pr[i] = std::cos(ph);
          pi[i] = std::sin(ph);
        }
      }
      for (long c = 0; c < C; ++c) {
        const double gr = in(n, c).real();
        const double gi = in(n, c).imag();
        if (gr == 0.0 && gi == 0.0) continue;
        double* __restrict accr = ar.data() + c * len;
        double* __restrict acci = ai.data() + c * len;
        for (long i = 0; i < len; ++i) {
          accr[i] += pr[i] * gr - pi[i] * gi;
          acci[i] += pr[i] * gi + pi[i] * gr;
        }
      }
      for (long i = 0; i < len; ++i) {
        const double r = pr[i] * sr[i] - pi[i] * si[i];
        pi[i] = pr[i] * si[i] + pi[i] * sr[i];
        pr[i] = r;
      }
    }
    for (long c = 0; c < C; ++c)
      for (long i = 0; i < len; ++i)
        out(static_cast<long>(kb) + i, c) = cplx(ar[c * len + i], ai[c * len + i]);
  });
  return out;
}

bool conjugate_grids(const Grid& a, const Grid& b) {
  if (a.count() != b.count()) return false;
  const double target = 2.0 * kPi / static_cast<double>(a.count());
  return std::abs(a.spacing() * b.spacing() - target) <= 1e-13 * target;
}

// Same sum when x_k y_n = XY - X n dy - Y k dx + 2 pi k n / N, i.e. a DFT
// between diagonal phase factors.
Mat oscillatory_sum_fft(const Grid& outer, const Grid& inner, double sign, const Mat& in) {
  const long N = inner.count();
  const double X = outer.half_width();
  const double Y = inner.half_width();
  const double dx = outer.spacing();
  const double dy = inner.spacing();
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  Mat out(N, in.cols());
  std::vector<cplx> buf(N), res(N);
  const cplx base = std::polar(1.0, sign * X * Y);
  for (long c = 0; c < in.cols(); ++c) {
    for (long n = 0; n < N; ++n) buf[n] = std::polar(1.0, -sign * X * dy * n) * in(n, c);
    if (sign < 0.0)
      fft.fwd(res, buf);
    else
      fft.inv(res, buf);
    for (long k = 0; k < N; ++k) out(k, c) = base * std::polar(1.0, -sign * Y * dx * k) * res[k];
  }
  return out;
}

// Largest |Im(lambda z)| over the sampled rectangle; Im(lambda z) is affine in
// (xi, t), so the corners suffice.
double max_phase_growth(const TransformContext& ctx) {
  double worst = 0.0;
  const double xs[2] = {-ctx.dst_grid().half_width(), ctx.dst_grid().half_width()};
  const double ts[2] = {-ctx.src_grid().half_width(), ctx.src_grid().half_width()};
  for (double xi : xs)
    for (double t : ts) {
      const cplx lambda = ctx.frequency_ray().point(xi);
      const cplx z = ctx.time_ray().point(t);
      worst = std::max(worst, std::abs(std::imag(lambda * z)));
    }
  return worst;
}

void check_overflow(const TransformContext& ctx) {
  const double g = max_phase_growth(ctx);
  if (g > kLogOverflow) {
    std::ostringstream msg;
    msg << "transform kernel overflow: |Im(lambda z)| reaches " << g << " on the sampled grid";
    throw OverflowError(msg.str(), -1);
  }
}

cplx checked_exp(cplx arg, long node) {
  if (arg.real() > kLogOverflow) {
    std::ostringstream msg;
    msg << "exponential weight overflow at node " << node;
    throw OverflowError(msg.str(), node);
  }
  return std::exp(arg);
}

}  // namespace

TransformContext::TransformContext(double psi, cplx zeta, cplx w, Grid src_grid, Grid dst_grid)
    : psi_(psi), zeta_(zeta), w_(w), src_(src_grid), dst_(dst_grid) {
  const double slack = 1.0 + 1e-12;
  if (dst_.spacing() > slack * kPi / src_.half_width() ||
      src_.spacing() > slack * kPi / dst_.half_width())
    throw ValidationError("transform grids violate the Nyquist condition");
}

TransformContext TransformContext::conjugate(double psi, cplx zeta, cplx w, const Grid& src) {
  const double n = static_cast<double>(src.count());
  const double dxi = 2.0 * kPi / (n * src.spacing());
  return TransformContext(psi, zeta, w, src, Grid(0.5 * (n - 1.0) * dxi, src.count()));
}

RayFunction forward(const TransformContext& ctx, const RayFunction& F) {
  if (!same_ray(F.ray(), ctx.time_ray()))
    throw ValidationError("forward transform input is not sampled on the context's time ray");
  if (!(F.grid() == ctx.src_grid()))
    throw ValidationError("forward transform input grid differs from the context source grid");
  check_overflow(ctx);
  const cplx I(0.0, 1.0);
  const long N = F.grid().count();
  Mat g(N, F.dim());
  for (long n = 0; n < N; ++n)
    g.row(n) = checked_exp(-I * ctx.zeta() * ctx.time_point(n), n) * F.values().row(n);
  Mat s = oscillatory_sum(ctx.dst_grid(), ctx.src_grid(), -1.0, g);
  const cplx dir = std::polar(1.0, ctx.psi());
  const cplx pref = std::exp(-I * ctx.zeta() * ctx.w()) * std::conj(dir) *
                    ctx.src_grid().spacing() * kInvSqrt2Pi;
  for (long k = 0; k < s.rows(); ++k) {
    const double xi = ctx.dst_grid().node(k);
    s.row(k) *= pref * checked_exp(-I * xi * dir * ctx.w(), k);
  }
  return RayFunction(ctx.frequency_ray(), ctx.dst_grid(), std::move(s), F.weight_order(), ctx.w());
}

RayFunction inverse(const TransformContext& ctx, const RayFunction& Fhat) {
  if (!same_ray(Fhat.ray(), ctx.frequency_ray()))
    throw ValidationError("inverse transform input is not sampled on the context's frequency ray");
  if (!(Fhat.grid() == ctx.dst_grid()))
    throw ValidationError("inverse transform input grid differs from the context destination grid");
  check_overflow(ctx);
  const cplx I(0.0, 1.0);
  const cplx dir = std::polar(1.0, ctx.psi());
  const long K = Fhat.grid().count();
  Mat g(K, Fhat.dim());
  for (long k = 0; k < K; ++k) {
    const double xi = ctx.dst_grid().node(k);
    g.row(k) = checked_exp(I * xi * dir * ctx.w(), k) * Fhat.values().row(k);
  }
  Mat s = oscillatory_sum(ctx.src_grid(), ctx.dst_grid(), 1.0, g);
  const cplx pref =
      std::exp(I * ctx.zeta() * ctx.w()) * dir * ctx.dst_grid().spacing() * kInvSqrt2Pi;
  for (long n = 0; n < s.rows(); ++n)
    s.row(n) *= pref * checked_exp(I * ctx.zeta() * ctx.time_point(n), n);
  return RayFunction(ctx.time_ray(), ctx.src_grid(), std::move(s), Fhat.weight_order(),
                     ctx.zeta());
}

ParsevalReport parseval_check(const TransformContext& ctx, const RayFunction& F) {
  const RayFunction Fhat = forward(ctx, F);
  const RayFunction freq(Fhat.ray(), Fhat.grid(), Fhat.values(), 0.0, ctx.w());
  const RayFunction time(F.ray(), F.grid(), F.values(), 0.0, ctx.zeta());
  ParsevalReport r;
  r.lhs = weighted_l2_norm(freq).value;
  r.rhs = weighted_l2_norm(time).value;
  const double scale = std::max(r.lhs, r.rhs);
  r.rel_err = scale > 0.0 ? std::abs(r.lhs - r.rhs) / scale : 0.0;
  return r;
}

RayFunction apply_derivative_rule(const TransformContext& ctx, const RayFunction& Fhat, int j) {
  if (j < 0) throw ValidationError("derivative order must be nonnegative");
  Mat v = Fhat.values();
  double peak = 0.0;
  for (long k = 0; k < v.rows(); ++k) {
    v.row(k) *= std::pow(ctx.frequency_point(k), j);
    peak = std::max(peak, v.row(k).norm());
  }
  if (j > 0 && peak > 0.0) {
    const double ends = std::max(v.row(0).norm(), v.row(v.rows() - 1).norm());
    if (ends > 1e-8 * peak)
      throw ValidationError("lambda^j times the transform does not decay at the grid ends");
  }
  return inverse(ctx, Fhat.with_values(std::move(v)));
}

NormResult sobolev_norm_spectral(const RayFunction& f, double ell, const TransformContext& ctx,
                                 const Mat& H) {
  const RayFunction Fhat = forward(ctx, f);
  const cplx I(0.0, 1.0);
  Mat v = Fhat.values();
  for (long k = 0; k < v.rows(); ++k) {
    const double xi = ctx.dst_grid().node(k);
    const cplx lambda = ctx.frequency_point(k);
    v.row(k) *= std::pow(1.0 + xi * xi, 0.5 * ell) * std::exp(I * ctx.w() * lambda);
  }
  // Weight already folded in; integrate along the line with unit weight.
  const RayFunction g(Ray(0.0, 0.0, Side::frequency), Fhat.grid(), std::move(v), 0.0, 0.0);
  return weighted_l2_norm(g, H);
}

}  // namespace conescale
