#pragma once

#include <vector>

#include "qsnn/errors.hpp"
#include "qsnn/lindblad.hpp"
#include "qsnn/linalg.hpp"

namespace qsnn {

// Classical fourth-order Runge-Kutta integration of the master equation,
// working directly on the d x d density matrix without any superoperator or
// matrix exponential. Slow but structurally independent of the propagator
// route, which is exactly what makes it useful as a cross-check.
inline DensityMatrix ode_oracle(const GeneratorSpec& spec,
                                const DensityMatrix& rho0, double t,
                                int steps) {
  if (steps <= 0)
    throw ValidationError("ode_oracle: steps must be positive, got " +
                          std::to_string(steps));
  if (!(t >= 0.0) || !std::isfinite(t))
    throw ValidationError("ode_oracle: duration must be finite and >= 0");
  if (rho0.dim() != spec.dim())
    throw ValidationError("ode_oracle: state/generator dim mismatch");

  std::vector<CMatrix> ldl;
  ldl.reserve(spec.lindblads.size());
  for (const auto& l : spec.lindblads) ldl.push_back(l.adjoint() * l);

  const Complex i_unit(0.0, 1.0);
  auto rhs = [&](const CMatrix& rho) -> CMatrix {
    CMatrix out = -i_unit * (spec.hamiltonian * rho - rho * spec.hamiltonian);
    for (std::size_t k = 0; k < spec.lindblads.size(); ++k) {
      const CMatrix& l = spec.lindblads[k];
      out += l * rho * l.adjoint();
      out -= 0.5 * (ldl[k] * rho + rho * ldl[k]);
    }
    return out;
  };

  const double h = t / steps;
  CMatrix rho = rho0.matrix;
  for (int s = 0; s < steps; ++s) {
    const CMatrix k1 = rhs(rho);
    const CMatrix k2 = rhs(rho + 0.5 * h * k1);
    const CMatrix k3 = rhs(rho + 0.5 * h * k2);
    const CMatrix k4 = rhs(rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return DensityMatrix::validated(std::move(rho));
}

}  // namespace qsnn
