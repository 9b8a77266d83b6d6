#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qsnn/errors.hpp"
#include "qsnn/linalg.hpp"

namespace qsnn {

// Validation tolerances for physical-state and generator invariants.
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kEigenvalueFloor = -1e-9;
inline constexpr double kGeneratorHermTol = 1e-12;
inline constexpr double kTracePreservationTol = 1e-12;

// Density matrix with enforced invariants: Hermitian, unit trace, and
// positive semidefinite up to numerical tolerance.
struct DensityMatrix {
  CMatrix matrix;

  Index dim() const { return matrix.rows(); }

  // Validating constructor: throws NumericError if m is not a physical state.
  static DensityMatrix validated(CMatrix m) {
    require_square(m, "DensityMatrix");
    require_finite(m, "DensityMatrix");
    const double herm = hermiticity_error(m);
    if (herm > kHermitianTol)
      throw NumericError("DensityMatrix: hermiticity violated by " +
                         std::to_string(herm));
    const double trace_dev = std::abs(m.trace() - Complex(1.0, 0.0));
    if (trace_dev > kTraceTol)
      throw NumericError("DensityMatrix: trace deviates from 1 by " +
                         std::to_string(trace_dev));
    // Eigenvalues of the Hermitian part; tiny negative values are roundoff.
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()),
                                              Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < kEigenvalueFloor)
      throw NumericError("DensityMatrix: negative eigenvalue " +
                         std::to_string(min_eig));
    return DensityMatrix{std::move(m)};
  }

  // |i><i| in a d-dimensional space.
  static DensityMatrix basis_state(Index d, Index i) {
    if (i < 0 || i >= d)
      throw ValidationError("basis_state: index " + std::to_string(i) +
                            " out of range for dim " + std::to_string(d));
    CMatrix m = CMatrix::Zero(d, d);
    m(i, i) = 1.0;
    return DensityMatrix{std::move(m)};
  }

  // Population of basis state |i>.
  double population(Index i) const { return matrix(i, i).real(); }
};

// A Hamiltonian plus a set of jump operators defining Lindblad dynamics
//   d rho/dt = -i[H, rho] + sum_k ( L_k rho L_k^+ - 1/2 {L_k^+ L_k, rho} ).
struct GeneratorSpec {
  CMatrix hamiltonian;
  std::vector<CMatrix> lindblads;

  Index dim() const { return hamiltonian.rows(); }

  static GeneratorSpec validated(CMatrix h, std::vector<CMatrix> ls) {
    require_square(h, "GeneratorSpec hamiltonian");
    require_finite(h, "GeneratorSpec hamiltonian");
    const double herm = hermiticity_error(h);
    if (herm > kGeneratorHermTol)
      throw ValidationError("GeneratorSpec: hamiltonian not Hermitian (off by " +
                            std::to_string(herm) + ")");
    for (const auto& l : ls) {
      require_square(l, "GeneratorSpec jump operator");
      require_finite(l, "GeneratorSpec jump operator");
      if (l.rows() != h.rows())
        throw ValidationError("GeneratorSpec: jump operator dim mismatch");
    }
    return GeneratorSpec{std::move(h), std::move(ls)};
  }
};

// Vectorized generator acting on vec(rho) (column stacking): superoperator
// matrix of dimension d^2 x d^2.
struct Liouvillian {
  Index dim;       // underlying Hilbert-space dimension d
  CMatrix matrix;  // d^2 x d^2
};

// exp(Lت t): the completely positive trace-preserving map for duration t.
struct SuperPropagator {
  Index dim;
  CMatrix matrix;
};

// Assemble the superoperator. Under column stacking, vec(A rho B) =
// (B^T (x) A) vec(rho), so
//   -i[H, rho]        ->  -i ( I (x) H - H^T (x) I )
//   L rho L^+         ->  conj(L) (x) L
//   -1/2 {L^+L, rho}  ->  -1/2 ( I (x) L^+L + (L^+L)^T (x) I )
inline Liouvillian build_liouvillian(const GeneratorSpec& spec) {
  const Index d = spec.dim();
  const CMatrix id = CMatrix::Identity(d, d);
  const Complex i_unit(0.0, 1.0);

  CMatrix m = -i_unit * (kron(id, spec.hamiltonian) -
                         kron(spec.hamiltonian.transpose(), id));
  for (const auto& l : spec.lindblads) {
    const CMatrix ldl = l.adjoint() * l;
    m += kron(l.conjugate(), l);
    m -= 0.5 * kron(id, ldl);
    m -= 0.5 * kron(ldl.transpose(), id);
  }

  // Trace preservation: vec(I)^+ annihilates the generator. The tolerance is
  // absolute at unit scale and relative for generators with large entries.
  const CVector id_vec = vec(id);
  const double residual = (id_vec.adjoint() * m).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (residual > kTracePreservationTol * scale)
    throw NumericError("build_liouvillian: trace-preservation residual " +
                       std::to_string(residual));
  return Liouvillian{d, std::move(m)};
}

inline SuperPropagator propagator(const Liouvillian& l, double t) {
  if (!(t >= 0.0) || !std::isfinite(t))
    throw ValidationError("propagator: duration must be finite and >= 0, got " +
                          std::to_string(t));
  return SuperPropagator{l.dim, matexp(CMatrix(l.matrix * t))};
}

inline DensityMatrix evolve(const DensityMatrix& rho, const SuperPropagator& p) {
  if (rho.dim() != p.dim)
    throw ValidationError("evolve: state dim " + std::to_string(rho.dim()) +
                          " vs propagator dim " + std::to_string(p.dim));
  const CVector out = p.matrix * vec(rho.matrix);
  return DensityMatrix::validated(unvec(out, p.dim));
}

}  // namespace qsnn
