#include "conescale/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "conescale/error.hpp"

namespace conescale {

namespace {

double normalize_angle(double a) {
  double r = std::fmod(a + kPi, 2.0 * kPi);
  if (r < 0) r += 2.0 * kPi;
  return r - kPi;
}

// log of the squared weight factor at x.
double weight_log(Side side, cplx number, cplx x) {
  if (side == Side::frequency) return -2.0 * std::imag(number * x);
  return 2.0 * std::imag(number * x);
}

double form_value(const Mat& H, const Eigen::Ref<const Vec>& v) {
  if (H.size() == 0) return v.squaredNorm();
  return std::real(v.dot(H * v));
}

void check_form(const Mat& H, long dim) {
  if (H.size() == 0) return;
  if (H.rows() != dim || H.cols() != dim)
    throw ValidationError("norm form dimension does not match function dimension");
}

double trapezoid_weight(long k, long n, double h) {
  return (k == 0 || k == n - 1) ? 0.5 * h : h;
}

}  // namespace

Ray::Ray(double angle, cplx offset, Side side)
    : angle_(normalize_angle(angle)), offset_(offset), side_(side) {
  if (!std::isfinite(angle) || !std::isfinite(offset.real()) || !std::isfinite(offset.imag()))
    throw ValidationError("ray angle and offset must be finite");
}

cplx Ray::direction() const {
  return std::polar(1.0, side_ == Side::frequency ? angle_ : -angle_);
}

double Ray::parameter(cplx z) const { return std::real((z - offset_) * std::conj(direction())); }

double Ray::distance(cplx z) const {
  return std::abs(std::imag((z - offset_) * std::conj(direction())));
}

bool Ray::contains(cplx z, double tol) const {
  return distance(z) <= tol * std::max(1.0, std::abs(z - offset_));
}

Cone::Cone(double angle, cplx vertex, int orientation)
    : angle_(angle), vertex_(vertex), orientation_(orientation) {
  if (!(angle > 0.0 && angle <= kPi))
    throw ValidationError("cone angle must lie in (0, pi]");
  if (orientation != 1 && orientation != -1)
    throw ValidationError("cone orientation must be +1 or -1");
}

Ray Cone::ray(double psi) const {
  return Ray(orientation_ * psi, vertex_, Side::frequency);
}

double Cone::reduced_angle(cplx lambda) const {
  cplx d = lambda - vertex_;
  if (d == cplx(0.0)) return 0.0;
  if (orientation_ < 0) d = std::conj(d);
  double a = std::fmod(std::arg(d), kPi);
  if (a < 0) a += kPi;
  return a;
}

bool Cone::contains(cplx lambda) const {
  if (lambda == vertex_) return false;
  const double a = reduced_angle(lambda);
  return a > 0.0 && a < angle_;
}

bool Cone::closed_contains(cplx lambda, double margin) const {
  if (std::abs(lambda - vertex_) <= margin) return true;
  const double a = reduced_angle(lambda);
  return a <= angle_ + margin || a >= kPi - margin;
}

double Cone::distance_to_boundary(cplx lambda) const {
  return std::min(ray(0.0).distance(lambda), ray(angle_).distance(lambda));
}

Grid::Grid(double half_width, long count) : half_width_(half_width), count_(count) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw ValidationError("grid half_width must be positive");
  if (count < 2) throw ValidationError("grid count must be at least 2");
}

std::vector<double> Grid::nodes() const {
  std::vector<double> out(static_cast<std::size_t>(count_));
  for (long k = 0; k < count_; ++k) out[static_cast<std::size_t>(k)] = node(k);
  return out;
}

RayFunction::RayFunction(Ray ray, Grid grid, Mat values, double weight_order,
                         cplx weight_number)
    : ray_(ray),
      grid_(grid),
      values_(std::move(values)),
      weight_order_(weight_order),
      weight_number_(weight_number) {
  if (values_.rows() != grid_.count())
    throw ValidationError("sample count does not match grid count");
  if (values_.cols() < 1) throw ValidationError("function dimension must be positive");
  for (long k = 0; k < values_.rows(); ++k)
    for (long c = 0; c < values_.cols(); ++c)
      if (!std::isfinite(values_(k, c).real()) || !std::isfinite(values_(k, c).imag())) {
        std::ostringstream msg;
        msg << "non-finite sample at node " << k;
        throw ValidationError(msg.str());
      }
}

RayFunction RayFunction::sample(const Ray& ray, const Grid& grid, const Evaluator& f,
                                double weight_order, cplx weight_number) {
  Vec first = f(ray.point(grid.node(0)));
  Mat values(grid.count(), first.size());
  values.row(0) = first.transpose();
  for (long k = 1; k < grid.count(); ++k) {
    Vec v = f(ray.point(grid.node(k)));
    if (v.size() != first.size())
      throw ValidationError("evaluator returned vectors of varying dimension");
    values.row(k) = v.transpose();
  }
  if (!values.allFinite()) {
    long bad = 0;
    while (values.row(bad).allFinite()) ++bad;
    std::ostringstream msg;
    msg << "evaluator is not finite at " << ray.point(grid.node(bad));
    throw NumericalError(msg.str());
  }
  return RayFunction(ray, grid, std::move(values), weight_order, weight_number);
}

RayFunction RayFunction::zeros(const Ray& ray, const Grid& grid, long dim,
                               double weight_order, cplx weight_number) {
  return RayFunction(ray, grid, Mat::Zero(grid.count(), dim), weight_order, weight_number);
}

RayFunction RayFunction::with_values(Mat values) const {
  return RayFunction(ray_, grid_, std::move(values), weight_order_, weight_number_);
}

NormResult weighted_l2_norm(const RayFunction& f, const Mat& H) {
  check_form(H, f.dim());
  const long n = f.grid().count();
  const double h = f.grid().spacing();
  const bool freq = f.ray().side() == Side::frequency;
  std::vector<double> integrand(static_cast<std::size_t>(n));
  double sum = 0.0;
  double peak = 0.0;
  for (long k = 0; k < n; ++k) {
    const cplx x = f.point(k);
    double logw = weight_log(f.ray().side(), f.weight_number(), x);
    if (freq && f.weight_order() != 0.0)
      logw += f.weight_order() * std::log1p(std::norm(x));
    if (logw > kLogOverflow) {
      std::ostringstream msg;
      msg << "weight overflow at node " << k << " (log-magnitude " << logw << ")";
      throw OverflowError(msg.str(), k);
    }
    const double q = form_value(H, f.values().row(k).transpose());
    const double v = q == 0.0 ? 0.0 : std::exp(logw) * q;
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "non-finite norm accumulation at node " << k;
      throw OverflowError(msg.str(), k);
    }
    integrand[static_cast<std::size_t>(k)] = v;
    peak = std::max(peak, v);
    sum += trapezoid_weight(k, n, h) * v;
  }
  NormResult out;
  out.value = std::sqrt(sum);
  if (peak > 0.0)
    out.tail = std::sqrt(std::max(integrand.front(), integrand.back()) / peak);
  return out;
}

NormResult sobolev_norm_derivative(const RayFunction& f, int ell, const Mat& H) {
  if (ell < 0) throw ValidationError("derivative norm order must be a nonnegative integer");
  if (f.grid().count() < 2 * ell + 2)
    throw ValidationError("grid too coarse for the requested derivative order");
  check_form(H, f.dim());
  const long n = f.grid().count();
  const double h = f.grid().spacing();
  double sum = 0.0;
  double tail = 0.0;
  Mat dj = f.values();
  const cplx scale = cplx(0.0, -1.0) / f.ray().direction();
  for (int j = 0; j <= ell; ++j) {
    if (j > 0) dj = scale * central_derivative(dj, h);
    double peak = 0.0;
    double ends = 0.0;
    for (long k = 0; k < n; ++k) {
      const double logw = weight_log(f.ray().side(), f.weight_number(), f.point(k));
      if (logw > kLogOverflow) {
        std::ostringstream msg;
        msg << "weight overflow at node " << k;
        throw OverflowError(msg.str(), k);
      }
      const double q = form_value(H, dj.row(k).transpose());
      const double v = q == 0.0 ? 0.0 : std::exp(logw) * q;
      peak = std::max(peak, v);
      if (k == 0 || k == n - 1) ends = std::max(ends, v);
      sum += trapezoid_weight(k, n, h) * v;
    }
    if (peak > 0.0) tail = std::max(tail, std::sqrt(ends / peak));
  }
  if (!std::isfinite(sum)) throw OverflowError("non-finite derivative norm", -1);
  return {std::sqrt(sum), tail};
}

cplx exp_weight(cplx z, cplx zeta) { return std::exp(cplx(0.0, -1.0) * zeta * z); }

double log_exp_weight(cplx z, cplx zeta) { return std::real(cplx(0.0, -1.0) * zeta * z); }

Mat central_derivative(const Mat& values, double spacing) {
  static constexpr double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  const long n = values.rows();
  Mat out = Mat::Zero(n, values.cols());
  for (long k = 0; k < n; ++k) {
    for (int s = 1; s <= 4; ++s) {
      if (k + s < n) out.row(k) += c[s - 1] * values.row(k + s);
      if (k - s >= 0) out.row(k) -= c[s - 1] * values.row(k - s);
    }
  }
  return out / spacing;
}

Mat ray_derivative(const RayFunction& f, int order) {
  if (order < 0) throw ValidationError("derivative order must be nonnegative");
  const cplx scale = cplx(0.0, -1.0) / f.ray().direction();
  Mat out = f.values();
  for (int j = 0; j < order; ++j) out = scale * central_derivative(out, f.grid().spacing());
  return out;
}

}  // namespace conescale
