#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "conescale/error.hpp"
#include "conescale/geometry.hpp"

namespace conescale {

inline constexpr double kTolCluster = 1e-7;
inline constexpr double kTolMargin = 1e-9;
inline constexpr double kTolInf = 1e-8;
inline constexpr double kTolVerify = 1e-8;

// A(lambda) = sum_j A_j lambda^(m-j), with nested norms |u|_j^2 = <H_j u, u>.
class MatrixPencil {
 public:
  // Empty norm_forms means H_j = I for every j.
  explicit MatrixPencil(std::vector<Mat> coefficients, std::vector<Mat> norm_forms = {});

  int degree() const { return static_cast<int>(coefficients_.size()) - 1; }
  long dim() const { return coefficients_.front().rows(); }
  const std::vector<Mat>& coefficients() const { return coefficients_; }
  const std::vector<Mat>& norm_forms() const { return norm_forms_; }
  // Sum of spectral norms of the coefficients weighted by max(1, |lambda|)^(m-j).
  double scale_at(cplx lambda) const;
  // Coefficients A_j e^{i phi (m-j)}, i.e. the pencil lambda -> A(e^{i phi} lambda).
  MatrixPencil scaled(double phi) const;

  static MatrixPencil identity(long n);

 private:
  std::vector<Mat> coefficients_;
  std::vector<Mat> norm_forms_;
};

class NearEigenvalueError : public NumericalError {
 public:
  NearEigenvalueError(const std::string& what, cplx lambda)
      : NumericalError(what), lambda_(lambda) {}
  cplx lambda() const { return lambda_; }

 private:
  cplx lambda_;
};

class SpectralObstructionError : public HypothesisError {
 public:
  SpectralObstructionError(const std::string& what, std::vector<cplx> eigenvalues)
      : HypothesisError(what), eigenvalues_(std::move(eigenvalues)) {}
  const std::vector<cplx>& eigenvalues() const { return eigenvalues_; }

 private:
  std::vector<cplx> eigenvalues_;
};

Mat evaluate(const MatrixPencil& p, cplx lambda);

Vec resolvent_apply(const MatrixPencil& p, cplx lambda, const Vec& f);

struct Disk {
  cplx center = 0.0;
  double radius = std::numeric_limits<double>::infinity();
};

using Region = std::variant<Disk, Cone>;

struct SpectrumReport {
  std::vector<cplx> eigenvalues;
  std::vector<int> multiplicities;
  // Smallest singular value of A(lambda_k) divided by scale_at(lambda_k).
  std::vector<double> residuals;
  // Cluster larger than the numerical null space of A(lambda_k).
  std::vector<bool> possibly_defective;
  // Distance to the region's boundary rays when the region is a cone, else NaN.
  std::vector<double> cone_distance;
  long infinite_dropped = 0;
  std::vector<std::string> notes;
};

SpectrumReport spectrum(const MatrixPencil& p, const Region& region = Disk{});

struct ClearanceReport {
  bool clear = true;
  std::vector<cplx> violating;
  SpectrumReport spectrum;
};

ClearanceReport cone_clearance(const MatrixPencil& p, const Cone& cone, double search_radius);

// Eigenvalues within `margin` of the line e^{i psi} R + zeta.
std::vector<cplx> line_obstructions(const MatrixPencil& p, double psi, cplx zeta,
                                    double margin = kTolMargin);

struct GrowthSample {
  cplx lambda;
  double ratio = 0.0;
  int band = 0;
};

struct GrowthReport {
  double max_ratio = 0.0;
  double band_max[3] = {0.0, 0.0, 0.0};
  std::vector<GrowthSample> samples;
  long skipped = 0;
  bool plausible = false;
  std::string verdict;
};

// Samples the cones |arg lambda| <= theta and |arg(-lambda)| <= theta in the
// bands [R, 2R], [2R, 4R], [4R, 8R].
GrowthReport verify_growth_condition(const MatrixPencil& p, double theta, double R,
                                     int sample_count, double growth_tol = 0.1);

}  // namespace conescale
