#pragma once

#include <cmath>
#include <vector>

#include "qsnn/errors.hpp"
#include "qsnn/linalg.hpp"
#include "qsnn/network.hpp"
#include "qsnn/rng.hpp"
#include "qsnn/topology.hpp"

namespace qsnn {

// Softmax regression baseline operating on the same encoded inputs as the
// network: its feature vector is the word-neuron population profile produced
// by encode_input.
struct ClassicalNN {
  RMatrix weights;  // 2 x vocab_size, rows ordered (Yes, No)
  RVector biases;   // 2

  int inputs() const { return static_cast<int>(weights.cols()); }

  void validate() const {
    if (weights.rows() != 2 || biases.size() != 2)
      throw ValidationError("ClassicalNN: expected exactly two outputs");
    if (!weights.allFinite() || !biases.allFinite())
      throw NumericError("ClassicalNN: non-finite parameters");
  }
};

struct ClassicalSample {
  RVector x;  // word populations after encoding
  Label label;
};

// Word-neuron populations (indices 1..V) of an encoded state.
inline RVector word_populations(const DensityMatrix& rho, int vocab_size) {
  RVector x(vocab_size);
  for (int w = 1; w <= vocab_size; ++w) x[w - 1] = rho.population(w);
  return x;
}

inline std::vector<ClassicalSample> classical_dataset(
    const QsnnTopology& topo, const QsnnParameters& params,
    const std::vector<TrainingPair>& pairs) {
  std::vector<ClassicalSample> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs)
    out.push_back({word_populations(encode_input(topo, params, pair.sequence),
                                    topo.vocab_size),
                   pair.label});
  return out;
}

// Numerically stable softmax of the two logits.
inline Eigen::Vector2d classical_forward(const ClassicalNN& nn,
                                         const RVector& x) {
  if (x.size() != nn.weights.cols())
    throw ValidationError("classical_forward: input size mismatch");
  Eigen::Vector2d z = nn.weights * x + nn.biases;
  const double m = z.maxCoeff();
  Eigen::Vector2d e = (z.array() - m).exp();
  return e / e.sum();
}

// Loss = 1 - mean probability assigned to the correct label; same form as the
// network loss so the histories are directly comparable.
inline double classical_loss(const ClassicalNN& nn,
                             const std::vector<ClassicalSample>& samples) {
  if (samples.empty()) throw ValidationError("classical_loss: empty dataset");
  double acc = 0.0;
  for (const auto& s : samples) {
    const Eigen::Vector2d y = classical_forward(nn, s.x);
    acc += y[s.label == Label::Yes ? 0 : 1];
  }
  return 1.0 - acc / static_cast<double>(samples.size());
}

struct ClassicalGradients {
  RMatrix weights;
  RVector biases;
};

// Exact gradient of classical_loss. With y = softmax(z) and correct index c,
// d loss / d z_j = -(1/N) y_c (delta_cj - y_j) per sample.
inline ClassicalGradients classical_gradient(
    const ClassicalNN& nn, const std::vector<ClassicalSample>& samples) {
  if (samples.empty()) throw ValidationError("classical_gradient: empty dataset");
  ClassicalGradients g{RMatrix::Zero(2, nn.weights.cols()), RVector::Zero(2)};
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  for (const auto& s : samples) {
    const Eigen::Vector2d y = classical_forward(nn, s.x);
    const int c = s.label == Label::Yes ? 0 : 1;
    Eigen::Vector2d dz;
    for (int j = 0; j < 2; ++j)
      dz[j] = -inv_n * y[c] * ((j == c ? 1.0 : 0.0) - y[j]);
    g.weights += dz * s.x.transpose();
    g.biases += dz;
  }
  return g;
}

// Weights drawn uniformly from [-1, 1) in row-major order, biases zero.
inline ClassicalNN classical_init(int inputs, SampleRng& rng) {
  if (inputs < 1) throw ValidationError("classical_init: need at least one input");
  ClassicalNN nn{RMatrix(2, inputs), RVector::Zero(2)};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < inputs; ++c) nn.weights(r, c) = rng.uniform(-1.0, 1.0);
  return nn;
}

}  // namespace qsnn
