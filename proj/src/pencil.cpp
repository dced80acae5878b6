#include "conescale/pencil.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace conescale {

namespace {

bool is_hermitian(const Mat& H) {
  return (H - H.adjoint()).norm() <= 1e-12 * std::max(1.0, H.norm());
}

double min_eigenvalue(const Mat& H) {
  Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

const cplx kProbes[] = {{0.0, 0.0},   {1.0, 0.0},     {0.0, 1.0},   {0.37, 0.61},
                        {-0.83, 0.29}, {1.7, -1.3},   {-2.9, -0.4}, {4.1, 3.3}};

Mat companion(const std::vector<Mat>& a) {
  const int m = static_cast<int>(a.size()) - 1;
  const long n = a.front().rows();
  Eigen::PartialPivLU<Mat> lu(a.front());
  Mat C = Mat::Zero(m * n, m * n);
  for (int j = 1; j <= m; ++j) C.block(0, (j - 1) * n, n, n) = -lu.solve(a[j]);
  for (int j = 1; j < m; ++j) C.block(j * n, (j - 1) * n, n, n) = Mat::Identity(n, n);
  return C;
}

double rcond(const Mat& M) {
  Eigen::JacobiSVD<Mat> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

bool in_region(const Region& region, cplx lambda) {
  if (const Disk* d = std::get_if<Disk>(&region)) return std::abs(lambda - d->center) <= d->radius;
  return std::get<Cone>(region).closed_contains(lambda, kTolMargin);
}

}  // namespace

MatrixPencil::MatrixPencil(std::vector<Mat> coefficients, std::vector<Mat> norm_forms)
    : coefficients_(std::move(coefficients)), norm_forms_(std::move(norm_forms)) {
  if (coefficients_.size() < 2) throw ValidationError("pencil degree must be at least 1");
  const long n = coefficients_.front().rows();
  if (n < 1) throw ValidationError("pencil dimension must be positive");
  for (const Mat& A : coefficients_) {
    if (A.rows() != n || A.cols() != n)
      throw ValidationError("pencil coefficients must be square with a common dimension");
    if (!A.allFinite()) throw ValidationError("pencil coefficients must be finite");
  }
  if (norm_forms_.empty()) norm_forms_.assign(coefficients_.size(), Mat::Identity(n, n));
  if (norm_forms_.size() != coefficients_.size())
    throw ValidationError("pencil needs one norm form per coefficient");
  for (std::size_t j = 0; j < norm_forms_.size(); ++j) {
    const Mat& H = norm_forms_[j];
    if (H.rows() != n || H.cols() != n) throw ValidationError("norm form dimension mismatch");
    if (!is_hermitian(H)) throw ValidationError("norm forms must be Hermitian");
    if (min_eigenvalue(H) <= 0.0) throw ValidationError("norm forms must be positive definite");
    if (j > 0) {
      const Mat D = H - norm_forms_[j - 1];
      if (min_eigenvalue(0.5 * (D + D.adjoint())) < -1e-12 * std::max(1.0, H.norm()))
        throw ValidationError("norm forms must increase: H_{j+1} - H_j must be positive semidefinite");
    }
  }
  bool invertible = false;
  for (cplx probe : kProbes) {
    if (rcond(evaluate(*this, probe)) > 1e-13) {
      invertible = true;
      break;
    }
  }
  if (!invertible) throw ValidationError("pencil is singular at every probe point");
}

double MatrixPencil::scale_at(cplx lambda) const {
  const double r = std::max(1.0, std::abs(lambda));
  const int m = degree();
  double s = 0.0;
  for (int j = 0; j <= m; ++j) {
    Eigen::JacobiSVD<Mat> svd(coefficients_[j]);
    s += svd.singularValues()(0) * std::pow(r, m - j);
  }
  return s > 0.0 ? s : 1.0;
}

MatrixPencil MatrixPencil::scaled(double phi) const {
  std::vector<Mat> a = coefficients_;
  const int m = degree();
  for (int j = 0; j <= m; ++j) a[j] *= std::polar(1.0, phi * (m - j));
  return MatrixPencil(std::move(a), norm_forms_);
}

MatrixPencil MatrixPencil::identity(long n) {
  return MatrixPencil({Mat::Zero(n, n), Mat::Identity(n, n)});
}

Mat evaluate(const MatrixPencil& p, cplx lambda) {
  Mat M = p.coefficients().front();
  for (std::size_t j = 1; j < p.coefficients().size(); ++j) M = M * lambda + p.coefficients()[j];
  return M;
}

Vec resolvent_apply(const MatrixPencil& p, cplx lambda, const Vec& f) {
  if (f.size() != p.dim()) throw ValidationError("resolvent argument has the wrong dimension");
  const Mat M = evaluate(p, lambda);
  Eigen::PartialPivLU<Mat> lu(M);
  std::ostringstream msg;
  msg << "pencil is singular to tolerance at lambda = " << lambda;
  if (!(lu.rcond() > 1e-14)) throw NearEigenvalueError(msg.str(), lambda);
  Vec u = lu.solve(f);
  if (!u.allFinite() || (M * u - f).norm() > 1e-10 * f.norm()) throw NearEigenvalueError(msg.str(), lambda);
  return u;
}

SpectrumReport spectrum(const MatrixPencil& p, const Region& region) {
  SpectrumReport report;
  const int m = p.degree();
  const long n = p.dim();
  const auto& A = p.coefficients();

  std::vector<cplx> raw;
  if (rcond(A.front()) > 1e-10) {
    Eigen::ComplexEigenSolver<Mat> es(companion(A), false);
    if (es.info() != Eigen::Success) throw NumericalError("companion eigensolver failed");
    for (long i = 0; i < es.eigenvalues().size(); ++i) raw.push_back(es.eigenvalues()(i));
  } else {
    // Shift and reverse: mu^m A(sigma + 1/mu) has leading coefficient A(sigma).
    cplx sigma = kProbes[0];
    double best = -1.0;
    for (cplx probe : kProbes) {
      const double r = rcond(evaluate(p, probe));
      if (r > best) {
        best = r;
        sigma = probe;
      }
    }
    std::vector<Mat> b(m + 1, Mat::Zero(n, n));
    for (int power = 0; power <= m; ++power)
      for (int j = 0; j <= power; ++j)
        if (power - j <= m - j)
          b[m - power] += binomial(m - j, power - j) * std::pow(sigma, power - j) * A[j];
    Eigen::ComplexEigenSolver<Mat> es(companion(b), false);
    if (es.info() != Eigen::Success) throw NumericalError("companion eigensolver failed");
    for (long i = 0; i < es.eigenvalues().size(); ++i) {
      const cplx mu = es.eigenvalues()(i);
      if (std::abs(mu) * (1.0 / kTolInf) <= 1.0) {
        ++report.infinite_dropped;
        continue;
      }
      raw.push_back(sigma + 1.0 / mu);
    }
  }
  std::vector<cplx> finite;
  for (cplx l : raw) {
    if (!std::isfinite(l.real()) || !std::isfinite(l.imag()) || std::abs(l) > 1.0 / kTolInf)
      ++report.infinite_dropped;
    else
      finite.push_back(l);
  }
  if (report.infinite_dropped > 0) {
    std::ostringstream note;
    note << report.infinite_dropped << " eigenvalue(s) at infinity dropped";
    report.notes.push_back(note.str());
  }

  // Cluster within kTolCluster (transitively).
  std::vector<int> parent(finite.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> root = [&](int i) { return parent[i] == i ? i : parent[i] = root(parent[i]); };
  for (std::size_t i = 0; i < finite.size(); ++i)
    for (std::size_t j = i + 1; j < finite.size(); ++j)
      if (std::abs(finite[i] - finite[j]) <= kTolCluster) parent[root(i)] = root(j);
  std::vector<std::pair<cplx, int>> clusters;
  std::vector<int> seen(finite.size(), -1);
  for (std::size_t i = 0; i < finite.size(); ++i) {
    const int r = root(static_cast<int>(i));
    if (seen[r] < 0) {
      seen[r] = static_cast<int>(clusters.size());
      clusters.push_back({0.0, 0});
    }
    clusters[seen[r]].first += finite[i];
    clusters[seen[r]].second += 1;
  }
  for (auto& c : clusters) c.first /= static_cast<double>(c.second);
  std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) {
    if (a.first.real() != b.first.real()) return a.first.real() < b.first.real();
    return a.first.imag() < b.first.imag();
  });

  bool failed_verification = false;
  for (const auto& [lambda, mult] : clusters) {
    if (!in_region(region, lambda)) continue;
    const Mat M = evaluate(p, lambda);
    Eigen::JacobiSVD<Mat> svd(M);
    const double scale = p.scale_at(lambda);
    const auto& s = svd.singularValues();
    const double residual = s(s.size() - 1) / scale;
    long null_dim = 0;
    for (long i = 0; i < s.size(); ++i)
      if (s(i) <= std::sqrt(kTolVerify) * scale) ++null_dim;
    report.eigenvalues.push_back(lambda);
    report.multiplicities.push_back(mult);
    report.residuals.push_back(residual);
    report.possibly_defective.push_back(null_dim < mult);
    if (const Cone* c = std::get_if<Cone>(&region))
      report.cone_distance.push_back(c->distance_to_boundary(lambda));
    else
      report.cone_distance.push_back(std::numeric_limits<double>::quiet_NaN());
    if (residual > kTolVerify) failed_verification = true;
  }
  if (failed_verification) report.notes.push_back("some eigenvalues failed residual verification");
  return report;
}

ClearanceReport cone_clearance(const MatrixPencil& p, const Cone& cone, double search_radius) {
  ClearanceReport out;
  out.spectrum = spectrum(p, Disk{0.0, search_radius});
  for (cplx l : out.spectrum.eigenvalues)
    if (cone.closed_contains(l, kTolMargin)) out.violating.push_back(l);
  out.clear = out.violating.empty();
  return out;
}

std::vector<cplx> line_obstructions(const MatrixPencil& p, double psi, cplx zeta, double margin) {
  const Ray line(psi, zeta, Side::frequency);
  std::vector<cplx> out;
  for (cplx l : spectrum(p).eigenvalues)
    if (line.distance(l) <= margin * std::max(1.0, std::abs(l - zeta))) out.push_back(l);
  return out;
}

GrowthReport verify_growth_condition(const MatrixPencil& p, double theta, double R,
                                     int sample_count, double growth_tol) {
  if (!(R > 0.0)) throw ValidationError("growth radius must be positive");
  if (!(theta >= 0.0 && theta < kPi / 2)) throw ValidationError("growth cone aperture must lie in [0, pi/2)");
  if (sample_count < 4) throw ValidationError("growth check needs at least 4 samples per band");
  const int m = p.degree();
  const long n = p.dim();
  Eigen::LLT<Mat> llt(p.norm_forms().front());
  // Columns are an H_0-orthonormal basis.
  const Mat basis = llt.matrixU().solve(Mat::Identity(n, n));

  const int n_r = std::max(2, static_cast<int>(std::lround(std::sqrt(sample_count / 2.0))));
  const int n_a = std::max(2, sample_count / (2 * n_r));
  GrowthReport report;
  for (int band = 0; band < 3; ++band) {
    const double r0 = R * std::pow(2.0, band);
    for (int i = 0; i < n_r; ++i) {
      const double r = r0 * std::pow(2.0, (i + 0.5) / n_r);
      for (int a = 0; a < n_a; ++a) {
        const double psi = n_a == 1 ? 0.0 : -theta + 2.0 * theta * a / (n_a - 1);
        for (double nappe : {0.0, kPi}) {
          const cplx lambda = std::polar(r, psi + nappe);
          double worst = 0.0;
          try {
            for (long c = 0; c < n; ++c) {
              const Vec u = resolvent_apply(p, lambda, basis.col(c));
              double sum = 0.0;
              for (int j = 0; j <= m; ++j) {
                const Mat& H = p.norm_forms()[m - j];
                sum += std::pow(r, j) * std::sqrt(std::real(u.dot(H * u)));
              }
              worst = std::max(worst, sum);
            }
          } catch (const NearEigenvalueError&) {
            ++report.skipped;
            continue;
          }
          report.samples.push_back({lambda, worst, band});
          report.band_max[band] = std::max(report.band_max[band], worst);
        }
      }
    }
  }
  const double rm2 = std::max(report.band_max[0], report.band_max[1]);
  const double rm3 = std::max(rm2, report.band_max[2]);
  report.max_ratio = rm3;
  report.plausible = rm3 <= (1.0 + growth_tol) * rm2;
  report.verdict = report.plausible ? "plausible" : "growing";
  return report;
}

}  // namespace conescale
