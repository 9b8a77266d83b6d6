#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qsnn/errors.hpp"
#include "qsnn/linalg.hpp"

namespace qsnn {

enum class Label { Yes, No };

inline std::string to_string(Label l) { return l == Label::Yes ? "Yes" : "No"; }

inline Label label_from_string(const std::string& s) {
  if (s == "Yes") return Label::Yes;
  if (s == "No") return Label::No;
  throw ValidationError("unknown label \"" + s + "\" (expected Yes or No)");
}

// A sentence as 1-based word-neuron indices, in reading order.
using WordSequence = std::vector<int>;

struct TrainingPair {
  WordSequence sequence;
  Label label;
};

// Neuron layout of the network Hilbert space, all indices absolute:
//   0            input neuron (initially excited)
//   1 .. V       word neurons
//   V+1, V+2     output neurons, in the order of `labels` ("Yes", "No")
struct QsnnTopology {
  int vocab_size = 0;
  std::vector<std::string> labels{"Yes", "No"};
  // Hamiltonian couplings between word neurons (i, j), 1-based, i < j.
  std::vector<std::pair<int, int>> hamiltonian_pairs;
  // Decay channels word neuron -> output neuron, absolute indices.
  std::vector<std::pair<int, int>> output_channels;

  int dim() const { return 1 + vocab_size + static_cast<int>(labels.size()); }
  int output_index(Label l) const {
    return 1 + vocab_size + (l == Label::Yes ? 0 : 1);
  }

  // Default wiring: every word pair coupled, every word connected to both
  // outputs.
  static QsnnTopology fully_connected(int vocab_size) {
    if (vocab_size < 1)
      throw ValidationError("topology: vocabulary must not be empty");
    QsnnTopology t;
    t.vocab_size = vocab_size;
    for (int i = 1; i <= vocab_size; ++i)
      for (int j = i + 1; j <= vocab_size; ++j)
        t.hamiltonian_pairs.emplace_back(i, j);
    for (int w = 1; w <= vocab_size; ++w)
      for (int o = 0; o < 2; ++o)
        t.output_channels.emplace_back(w, 1 + vocab_size + o);
    t.validate();
    return t;
  }

  void validate() const {
    if (vocab_size < 1)
      throw ValidationError("topology: vocabulary must not be empty");
    if (labels != std::vector<std::string>{"Yes", "No"})
      throw ValidationError("topology: labels must be [Yes, No]");
    std::set<std::pair<int, int>> seen_pairs;
    for (const auto& [i, j] : hamiltonian_pairs) {
      if (i < 1 || j < 1 || i > vocab_size || j > vocab_size)
        throw ValidationError("topology: coupling (" + std::to_string(i) + "," +
                              std::to_string(j) + ") outside word range");
      if (i >= j)
        throw ValidationError("topology: coupling indices must satisfy i < j");
      if (!seen_pairs.insert({i, j}).second)
        throw ValidationError("topology: duplicate coupling (" +
                              std::to_string(i) + "," + std::to_string(j) + ")");
    }
    std::set<std::pair<int, int>> seen_channels;
    for (const auto& [w, o] : output_channels) {
      if (w < 1 || w > vocab_size)
        throw ValidationError("topology: channel source " + std::to_string(w) +
                              " is not a word neuron");
      if (o < 1 + vocab_size || o >= dim())
        throw ValidationError("topology: channel target " + std::to_string(o) +
                              " is not an output neuron");
      if (!seen_channels.insert({w, o}).second)
        throw ValidationError("topology: duplicate channel (" +
                              std::to_string(w) + "," + std::to_string(o) + ")");
    }
  }
};

// Trainable parameters plus fixed stage settings.
struct QsnnParameters {
  RVector h;          // coupling strengths, one per hamiltonian pair
  RVector gamma_out;  // decay amplitudes, one per output channel
  double gamma_in = 1.0;  // input->word encoding amplitude (not trained)
  double t_in = 10.0;     // total input-encoding duration
  double t_u = 1.0;       // unitary-mixing duration
  double t_d = 10.0;      // output-decay duration

  void validate(const QsnnTopology& topo) const {
    if (h.size() != static_cast<Index>(topo.hamiltonian_pairs.size()))
      throw ValidationError("parameters: h size " + std::to_string(h.size()) +
                            " vs " + std::to_string(topo.hamiltonian_pairs.size()) +
                            " couplings");
    if (gamma_out.size() != static_cast<Index>(topo.output_channels.size()))
      throw ValidationError("parameters: gamma_out size " +
                            std::to_string(gamma_out.size()) + " vs " +
                            std::to_string(topo.output_channels.size()) +
                            " channels");
    if (!h.allFinite() || !gamma_out.allFinite())
      throw NumericError("parameters: non-finite values");
    for (double t : {t_in, t_u, t_d})
      if (!(t > 0.0) || !std::isfinite(t))
        throw ValidationError("parameters: stage durations must be positive");
    if (!std::isfinite(gamma_in))
      throw ValidationError("parameters: gamma_in must be finite");
  }
};

inline void validate_sequence(const QsnnTopology& topo, const WordSequence& seq) {
  if (seq.empty()) throw ValidationError("sequence: must contain at least one word");
  for (int w : seq)
    if (w < 1 || w > topo.vocab_size)
      throw ValidationError("sequence: word index " + std::to_string(w) +
                            " outside vocabulary of size " +
                            std::to_string(topo.vocab_size));
}

}  // namespace qsnn
