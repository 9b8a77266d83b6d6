#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>

#include "qsnn/errors.hpp"

namespace qsnn {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

inline void require_finite(const CMatrix& m, const std::string& what) {
  if (!m.allFinite()) throw NumericError(what + ": non-finite entries");
}

inline void require_square(const CMatrix& m, const std::string& what) {
  if (m.rows() != m.cols())
    throw ValidationError(what + ": matrix must be square, got " +
                          std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()));
}

// Largest absolute deviation from Hermitian symmetry.
inline double hermiticity_error(const CMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// Kronecker product a (x) b, built block by block: the (i,j) block of the
// result is a(i,j) * b.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline RMatrix kron(const RMatrix& a, const RMatrix& b) {
  RMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Matrix exponential by scaling-and-squaring with Pade approximants.
inline CMatrix matexp(const CMatrix& a) {
  require_square(a, "matexp");
  require_finite(a, "matexp");
  CMatrix out = a.exp();
  require_finite(out, "matexp result");
  return out;
}

inline RMatrix matexp(const RMatrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("matexp: matrix must be square");
  if (!a.allFinite()) throw NumericError("matexp: non-finite entries");
  RMatrix out = a.exp();
  if (!out.allFinite()) throw NumericError("matexp result: non-finite entries");
  return out;
}

template <typename Mat>
struct FrechetExp {
  Mat exp;         // e^a
  Mat derivative;  // directional derivative of exp at a along e
};

// Frechet derivative of the matrix exponential along direction e, via the
// block identity
//   exp [ a  e ]   =  [ e^a  D(a,e) ]
//       [ 0  a ]      [ 0    e^a    ]
// so one exponential of the doubled matrix yields both e^a and D(a,e).
template <typename Mat>
FrechetExp<Mat> frechet_exp_impl(const Mat& a, const Mat& e) {
  const Index n = a.rows();
  Mat block = Mat::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = a;
  block.topRightCorner(n, n) = e;
  block.bottomRightCorner(n, n) = a;
  const Mat big = block.exp();
  if (!big.allFinite()) throw NumericError("frechet_exp: non-finite result");
  return {big.topLeftCorner(n, n), big.topRightCorner(n, n)};
}

inline FrechetExp<CMatrix> frechet_exp(const CMatrix& a, const CMatrix& e) {
  require_square(a, "frechet_exp");
  if (a.rows() != e.rows() || a.cols() != e.cols())
    throw ValidationError("frechet_exp: direction shape mismatch");
  require_finite(a, "frechet_exp");
  require_finite(e, "frechet_exp direction");
  return frechet_exp_impl(a, e);
}

inline FrechetExp<RMatrix> frechet_exp(const RMatrix& a, const RMatrix& e) {
  if (a.rows() != a.cols()) throw ValidationError("frechet_exp: matrix must be square");
  if (a.rows() != e.rows() || a.cols() != e.cols())
    throw ValidationError("frechet_exp: direction shape mismatch");
  if (!a.allFinite() || !e.allFinite())
    throw NumericError("frechet_exp: non-finite entries");
  return frechet_exp_impl(a, e);
}

// Column-stacking vectorization: vec(rho) stacks the columns of rho, so that
// vec(A rho B) = (B^T (x) A) vec(rho). This matches Eigen's column-major
// storage, making vec/unvec plain reinterpretations of the same bytes.
inline CVector vec(const CMatrix& rho) {
  return Eigen::Map<const CVector>(rho.data(), rho.size());
}

inline CMatrix unvec(const CVector& v, Index d) {
  if (d * d != v.size())
    throw ValidationError("unvec: length " + std::to_string(v.size()) +
                          " is not " + std::to_string(d) + "^2");
  return Eigen::Map<const CMatrix>(v.data(), d, d);
}

inline CMatrix unvec(const CVector& v) {
  const auto d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  return unvec(v, d);
}

// Tr(a * b) without forming the product.
inline Complex trace_product(const CMatrix& a, const CMatrix& b) {
  return (a.transpose().cwiseProduct(b)).sum();
}

inline double trace_product(const RMatrix& a, const RMatrix& b) {
  return (a.transpose().cwiseProduct(b)).sum();
}

}  // namespace qsnn
