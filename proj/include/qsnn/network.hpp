#pragma once

#include <string>
#include <vector>

#include "qsnn/errors.hpp"
#include "qsnn/lindblad.hpp"
#include "qsnn/linalg.hpp"
#include "qsnn/topology.hpp"

namespace qsnn {

// Word-word coupling Hamiltonian: sum_k h_k ( |i_k><j_k| + |j_k><i_k| ).
inline CMatrix build_hamiltonian(const QsnnTopology& topo, const RVector& h) {
  if (h.size() != static_cast<Index>(topo.hamiltonian_pairs.size()))
    throw ValidationError("build_hamiltonian: coupling count mismatch");
  CMatrix m = CMatrix::Zero(topo.dim(), topo.dim());
  for (std::size_t k = 0; k < topo.hamiltonian_pairs.size(); ++k) {
    const auto [i, j] = topo.hamiltonian_pairs[k];
    m(i, j) += h[static_cast<Index>(k)];
    m(j, i) += h[static_cast<Index>(k)];
  }
  return m;
}

// Decay channels gamma_k |o_k><w_k| feeding the output neurons.
inline std::vector<CMatrix> output_lindblads(const QsnnTopology& topo,
                                             const RVector& gamma_out) {
  if (gamma_out.size() != static_cast<Index>(topo.output_channels.size()))
    throw ValidationError("output_lindblads: channel count mismatch");
  std::vector<CMatrix> ls;
  ls.reserve(topo.output_channels.size());
  for (std::size_t k = 0; k < topo.output_channels.size(); ++k) {
    const auto [w, o] = topo.output_channels[k];
    CMatrix l = CMatrix::Zero(topo.dim(), topo.dim());
    l(o, w) = gamma_out[static_cast<Index>(k)];
    ls.push_back(std::move(l));
  }
  return ls;
}

// Sequential encoding of a sentence into word-neuron populations. The input
// neuron starts excited; reading word p opens the decay channel
// gamma_in |word_p><input| and every channel opened so far stays open while
// the state evolves for t_in / (sequence length). Re-reading an already open
// word changes nothing.
inline DensityMatrix encode_input(const QsnnTopology& topo,
                                  const QsnnParameters& params,
                                  const WordSequence& seq) {
  validate_sequence(topo, seq);
  const Index d = topo.dim();
  const double tau = params.t_in / static_cast<double>(seq.size());
  const CMatrix h0 = CMatrix::Zero(d, d);

  DensityMatrix rho = DensityMatrix::basis_state(d, 0);
  std::vector<bool> open(static_cast<std::size_t>(topo.vocab_size) + 1, false);
  std::vector<CMatrix> ls;
  for (int w : seq) {
    if (!open[static_cast<std::size_t>(w)]) {
      open[static_cast<std::size_t>(w)] = true;
      CMatrix l = CMatrix::Zero(d, d);
      l(w, 0) = params.gamma_in;
      ls.push_back(std::move(l));
    }
    const auto gen = GeneratorSpec::validated(h0, ls);
    rho = evolve(rho, propagator(build_liouvillian(gen), tau));
  }
  return rho;
}

// Coherent mixing among word neurons for duration t_u.
inline DensityMatrix unitary_stage(const DensityMatrix& rho,
                                   const QsnnTopology& topo,
                                   const QsnnParameters& params) {
  const auto gen =
      GeneratorSpec::validated(build_hamiltonian(topo, params.h), {});
  return evolve(rho, propagator(build_liouvillian(gen), params.t_u));
}

// Dissipative readout: word populations drain into the output neurons for
// duration t_d.
inline DensityMatrix output_stage(const DensityMatrix& rho,
                                  const QsnnTopology& topo,
                                  const QsnnParameters& params) {
  const auto gen = GeneratorSpec::validated(
      CMatrix::Zero(topo.dim(), topo.dim()),
      output_lindblads(topo, params.gamma_out));
  return evolve(rho, propagator(build_liouvillian(gen), params.t_d));
}

struct ForwardResult {
  DensityMatrix rho_out;
  double p_yes = 0.0;
  double p_no = 0.0;
  double p_undetermined = 0.0;  // remainder 1 - p_yes - p_no, exactly
};

inline constexpr double kProbabilityTol = 1e-10;

inline ForwardResult forward(const QsnnTopology& topo,
                             const QsnnParameters& params,
                             const WordSequence& seq) {
  topo.validate();
  params.validate(topo);
  DensityMatrix rho = encode_input(topo, params, seq);
  rho = unitary_stage(rho, topo, params);
  rho = output_stage(rho, topo, params);

  ForwardResult r{std::move(rho), 0.0, 0.0, 0.0};
  r.p_yes = r.rho_out.population(topo.output_index(Label::Yes));
  r.p_no = r.rho_out.population(topo.output_index(Label::No));
  r.p_undetermined = 1.0 - r.p_yes - r.p_no;
  for (double p : {r.p_yes, r.p_no, r.p_undetermined})
    if (p < -kProbabilityTol || p > 1.0 + kProbabilityTol)
      throw NumericError("forward: probability " + std::to_string(p) +
                         " outside [0, 1]");
  return r;
}

// Higher output population wins; an exact tie reads as Yes.
inline Label classify(const ForwardResult& r) {
  return r.p_yes >= r.p_no ? Label::Yes : Label::No;
}

}  // namespace qsnn
