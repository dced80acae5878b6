#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

namespace conescale {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLogOverflow = 700.0;
inline constexpr double kTailWarning = 1e-10;

// Frequency-side rays run counterclockwise, e^{i psi} R + zeta.
// Time-side rays run clockwise, e^{-i psi} R + w.
enum class Side { frequency, time };

class Ray {
 public:
  Ray(double angle, cplx offset, Side side);

  double angle() const { return angle_; }
  cplx offset() const { return offset_; }
  Side side() const { return side_; }

  // Unit vector along the ray: e^{i psi} or e^{-i psi}.
  cplx direction() const;
  cplx point(double t) const { return offset_ + direction() * t; }
  // Real parameter of the orthogonal projection of z onto the ray.
  double parameter(cplx z) const;
  double distance(cplx z) const;
  bool contains(cplx z, double tol = 1e-12) const;

 private:
  double angle_;
  cplx offset_;
  Side side_;
};

// Double-napped cone between the lines R + vertex and e^{i orientation phi} R + vertex.
class Cone {
 public:
  Cone(double angle, cplx vertex, int orientation = 1);

  double angle() const { return angle_; }
  cplx vertex() const { return vertex_; }
  int orientation() const { return orientation_; }

  // Line through the vertex at angular position psi in [0, phi].
  Ray ray(double psi) const;
  // Angular position of lambda reduced modulo pi into [0, pi); vertex maps to 0.
  double reduced_angle(cplx lambda) const;
  bool contains(cplx lambda) const;
  // Closed cone widened by an angular margin; the vertex is included.
  bool closed_contains(cplx lambda, double margin) const;
  double distance_to_boundary(cplx lambda) const;

 private:
  double angle_;
  cplx vertex_;
  int orientation_;
};

class Grid {
 public:
  Grid(double half_width, long count);

  double half_width() const { return half_width_; }
  long count() const { return count_; }
  double spacing() const { return 2.0 * half_width_ / static_cast<double>(count_ - 1); }
  double node(long k) const { return -half_width_ + static_cast<double>(k) * spacing(); }
  std::vector<double> nodes() const;

  bool operator==(const Grid& other) const {
    return half_width_ == other.half_width_ && count_ == other.count_;
  }

 private:
  double half_width_;
  long count_;
};

using Evaluator = std::function<Vec(cplx)>;

// Samples of a vector-valued function along a ray. Row k of values holds the
// vector at grid node k.
class RayFunction {
 public:
  RayFunction(Ray ray, Grid grid, Mat values, double weight_order = 0.0,
              cplx weight_number = 0.0);

  static RayFunction sample(const Ray& ray, const Grid& grid, const Evaluator& f,
                            double weight_order = 0.0, cplx weight_number = 0.0);
  static RayFunction zeros(const Ray& ray, const Grid& grid, long dim,
                           double weight_order = 0.0, cplx weight_number = 0.0);

  const Ray& ray() const { return ray_; }
  const Grid& grid() const { return grid_; }
  const Mat& values() const { return values_; }
  long dim() const { return values_.cols(); }
  double weight_order() const { return weight_order_; }
  cplx weight_number() const { return weight_number_; }
  cplx point(long k) const { return ray_.point(grid_.node(k)); }

  RayFunction with_values(Mat values) const;

 private:
  Ray ray_;
  Grid grid_;
  Mat values_;
  double weight_order_;
  cplx weight_number_;
};

struct NormResult {
  double value = 0.0;
  // Largest end-node magnitude of the weighted integrand relative to its maximum.
  double tail = 0.0;
  bool tail_warning() const { return tail > kTailWarning; }
};

// Frequency side: sqrt of the integral of |exp(2iw lambda)| (1+|lambda|^2)^l <H f, f>.
// Time side: the unweighted-order norm with the factor |exp(-i zeta z)|^2.
// An empty H means the identity.
NormResult weighted_l2_norm(const RayFunction& f, const Mat& H = Mat());

class TransformContext;

// (1 + xi^2)^l weighted norm of the transform of (e_zeta f) along the ray.
NormResult sobolev_norm_spectral(const RayFunction& f, double ell,
                                 const TransformContext& ctx, const Mat& H = Mat());

// Sum over j <= l of the weighted integrals of D^j f, D taken along the ray.
NormResult sobolev_norm_derivative(const RayFunction& f, int ell, const Mat& H = Mat());

cplx exp_weight(cplx z, cplx zeta);
// Real part of log exp(-i zeta z).
double log_exp_weight(cplx z, cplx zeta);

// D = -i d/dz along the ray, applied `order` times with an eighth-order central
// stencil (zero padding beyond the grid).
Mat ray_derivative(const RayFunction& f, int order);

// Central first-derivative stencil d/dt on uniformly spaced rows.
Mat central_derivative(const Mat& values, double spacing);

}  // namespace conescale
