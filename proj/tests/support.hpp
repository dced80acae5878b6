#pragma once

#include <algorithm>
#include <cmath>

#include "conescale/geometry.hpp"
#include "conescale/pencil.hpp"

namespace testing {

using namespace conescale;

inline Evaluator scalar(cplx (*f)(cplx)) {
  return [f](cplx z) {
    Vec v(1);
    v(0) = f(z);
    return v;
  };
}

template <class F>
Evaluator scalar_fn(F f) {
  return [f](cplx z) {
    Vec v(1);
    v(0) = f(z);
    return v;
  };
}

inline cplx half_gaussian(cplx z) { return std::exp(-z * z / 2.0); }
inline cplx unit_gaussian(cplx z) { return std::exp(-z * z); }

inline MatrixPencil scalar_pencil(std::vector<cplx> coeffs) {
  std::vector<Mat> a;
  for (cplx c : coeffs) a.push_back(Mat::Constant(1, 1, c));
  return MatrixPencil(a);
}

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline Mat dirichlet_laplacian(int n) {
  const double h = 1.0 / (n + 1);
  Mat L = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    L(i, i) = 2.0 / (h * h);
    if (i > 0) L(i, i - 1) = -1.0 / (h * h);
    if (i + 1 < n) L(i, i + 1) = -1.0 / (h * h);
  }
  return L;
}

inline MatrixPencil cylinder_pencil(int n) {
  const Mat I = Mat::Identity(n, n);
  const Mat L = dirichlet_laplacian(n);
  const Mat G = I + L;
  return MatrixPencil({I, Mat::Zero(n, n), L}, {I, G, G * G});
}

// Lexicographic sort by imaginary part, the natural order for the cylinder spectrum.
inline std::vector<cplx> by_imag(std::vector<cplx> v) {
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) { return a.imag() < b.imag(); });
  return v;
}

}  // namespace testing
