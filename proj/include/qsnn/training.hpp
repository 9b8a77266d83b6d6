#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qsnn/classical.hpp"
#include "qsnn/errors.hpp"
#include "qsnn/linalg.hpp"
#include "qsnn/network.hpp"
#include "qsnn/rng.hpp"
#include "qsnn/topology.hpp"

namespace qsnn {

enum class Mode { Coherent, Incoherent };

inline std::string to_string(Mode m) {
  return m == Mode::Coherent ? "coherent" : "incoherent";
}

enum class GradientMethod { Analytic, FiniteDifference };

// How the decay amplitudes are initialized for a training run.
//   uniform:lo:hi  each amplitude drawn uniformly from [lo, hi)
//   const:v        every amplitude set to v
//   grid:a,b,...   every amplitude set to the grid value selected by the
//                  run's sample index (round robin)
struct GammaInit {
  enum class Kind { Uniform, Const, Grid };
  Kind kind = Kind::Uniform;
  double lo = -1.0;
  double hi = 1.0;
  double value = 0.0;
  std::vector<double> grid;

  static GammaInit uniform(double lo, double hi) {
    if (!(lo < hi)) throw ValidationError("gamma init: need lo < hi");
    GammaInit g;
    g.kind = Kind::Uniform;
    g.lo = lo;
    g.hi = hi;
    return g;
  }

  static GammaInit constant(double v) {
    if (!std::isfinite(v)) throw ValidationError("gamma init: non-finite value");
    GammaInit g;
    g.kind = Kind::Const;
    g.value = v;
    return g;
  }

  static GammaInit grid_values(std::vector<double> values) {
    if (values.empty()) throw ValidationError("gamma init: empty grid");
    for (double v : values)
      if (!std::isfinite(v)) throw ValidationError("gamma init: non-finite grid value");
    GammaInit g;
    g.kind = Kind::Grid;
    g.grid = std::move(values);
    return g;
  }

  // Accepts "uniform:lo:hi", "const:v", or "grid:v1,v2,...".
  static GammaInit parse(const std::string& text) {
    auto bad = [&](const std::string& why) {
      return ValidationError("gamma init \"" + text + "\": " + why);
    };
    auto to_double = [&](const std::string& tok) {
      try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
      } catch (const std::exception&) {
        throw bad("cannot parse number \"" + tok + "\"");
      }
    };
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
    if (parts.empty()) throw bad("empty specification");
    if (parts[0] == "uniform") {
      if (parts.size() != 3) throw bad("expected uniform:lo:hi");
      return uniform(to_double(parts[1]), to_double(parts[2]));
    }
    if (parts[0] == "const") {
      if (parts.size() != 2) throw bad("expected const:v");
      return constant(to_double(parts[1]));
    }
    if (parts[0] == "grid") {
      if (parts.size() != 2) throw bad("expected grid:v1,v2,...");
      std::vector<double> values;
      std::stringstream gs(parts[1]);
      for (std::string tok; std::getline(gs, tok, ',');)
        values.push_back(to_double(tok));
      return grid_values(std::move(values));
    }
    throw bad("unknown kind \"" + parts[0] + "\"");
  }

  RVector draw(int count, SampleRng& rng, std::uint64_t sample_index) const {
    RVector out(count);
    switch (kind) {
      case Kind::Uniform:
        for (int i = 0; i < count; ++i) out[i] = rng.uniform(lo, hi);
        break;
      case Kind::Const:
        out.setConstant(value);
        break;
      case Kind::Grid:
        out.setConstant(grid[static_cast<std::size_t>(
            sample_index % static_cast<std::uint64_t>(grid.size()))]);
        break;
    }
    return out;
  }
};

// Mid-training dataset swap: iterations before correct_at train on the
// corrupted pairs, iterations from correct_at on train on the clean ones.
struct CorrectionSchedule {
  std::vector<TrainingPair> corrupted;
  int correct_at = 0;
};

struct TrainConfig {
  Mode mode = Mode::Coherent;
  int iterations = 2000;
  double learning_rate = 0.5;
  double h_init = 0.1;
  GammaInit gamma_init{};
  std::uint64_t seed = 0;
  std::uint64_t sample_index = 0;  // substream id and grid selector
  GradientMethod gradient_method = GradientMethod::Analytic;
  double fd_epsilon = 1e-5;
  // Fixed stage settings handed to the trained parameters.
  double gamma_in = 1.0;
  double t_in = 10.0;
  double t_u = 1.0;
  double t_d = 10.0;
  std::optional<CorrectionSchedule> correction;
  // Sequences whose Yes-probability is recorded each iteration.
  std::vector<WordSequence> tracked_sequences;

  void validate() const {
    if (iterations < 0) throw ValidationError("config: iterations must be >= 0");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw ValidationError("config: learning rate must be positive");
    if (!std::isfinite(h_init)) throw ValidationError("config: non-finite h_init");
    if (!(fd_epsilon > 0.0)) throw ValidationError("config: fd_epsilon must be positive");
    for (double t : {t_in, t_u, t_d})
      if (!(t > 0.0) || !std::isfinite(t))
        throw ValidationError("config: stage durations must be positive");
    if (correction) {
      if (correction->corrupted.empty())
        throw ValidationError("config: corrupted dataset must not be empty");
      if (correction->correct_at < 0 || correction->correct_at > iterations)
        throw ValidationError("config: correct_at outside [0, iterations]");
    }
  }
};

struct IterationRecord {
  int iteration = 0;
  double loss = 0.0;
  double robustness = 0.0;  // NaN for the classical model
  std::vector<double> tracked_p_yes;
};

// records[i] holds the metrics of the parameters after i updates; there are
// iterations + 1 records, from the initialization (iteration 0) to the final
// parameters. Only the field matching the trained model kind is meaningful.
struct TrainingHistory {
  std::vector<IterationRecord> records;
  QsnnParameters final_qsnn;
  ClassicalNN final_classical;
};

struct Gradients {
  RVector h;
  RVector gamma_out;
};

namespace detail {

// Precomputed per-dataset quantities that do not change while h and gamma_out
// are trained: encoded input states and index tables.
struct EvalContext {
  QsnnTopology topo;
  Index d = 0;
  std::vector<CMatrix> rho_in;  // encoded input per pair
  std::vector<int> out_idx;     // correct output neuron per pair
  std::vector<CMatrix> tracked_rho;
  int yes_idx = 0;
  std::vector<int> ch_w, ch_o;  // decay channel endpoints
  std::vector<int> hp_i, hp_j;  // coupling endpoints
};

inline EvalContext make_context(const QsnnTopology& topo,
                                const QsnnParameters& params,
                                const std::vector<TrainingPair>& pairs,
                                const std::vector<WordSequence>& tracked = {}) {
  if (pairs.empty()) throw ValidationError("training: empty dataset");
  EvalContext ctx;
  ctx.topo = topo;
  ctx.d = topo.dim();
  ctx.yes_idx = topo.output_index(Label::Yes);
  for (const auto& pair : pairs) {
    ctx.rho_in.push_back(encode_input(topo, params, pair.sequence).matrix);
    ctx.out_idx.push_back(topo.output_index(pair.label));
  }
  for (const auto& seq : tracked)
    ctx.tracked_rho.push_back(encode_input(topo, params, seq).matrix);
  for (const auto& [w, o] : topo.output_channels) {
    ctx.ch_w.push_back(w);
    ctx.ch_o.push_back(o);
  }
  for (const auto& [i, j] : topo.hamiltonian_pairs) {
    ctx.hp_i.push_back(i);
    ctx.hp_j.push_back(j);
  }
  return ctx;
}

// Classical rate matrix of the readout stage: populations obey
// d x / dt = R x with R(o,w) += gamma_k^2 and R(w,w) -= gamma_k^2 per channel.
// The readout generator couples neither coherences into populations nor the
// reverse, so output populations depend on input populations alone.
inline RMatrix rate_matrix(const EvalContext& ctx, const RVector& gamma_out) {
  RMatrix r = RMatrix::Zero(ctx.d, ctx.d);
  for (std::size_t k = 0; k < ctx.ch_w.size(); ++k) {
    const double rate = gamma_out[static_cast<Index>(k)] *
                        gamma_out[static_cast<Index>(k)];
    r(ctx.ch_o[k], ctx.ch_w[k]) += rate;
    r(ctx.ch_w[k], ctx.ch_w[k]) -= rate;
  }
  return r;
}

struct EvalResult {
  double loss = 0.0;
  RVector grad_h;
  RVector grad_gamma;
  // d p_s / d gamma_k for every (pair, channel); feeds both the gamma
  // gradient and the robustness score.
  RMatrix sample_gamma_derivs;
  double robustness = 0.0;
  std::vector<double> tracked_p_yes;
};

// One full evaluation of loss, gradients, robustness, and tracked
// probabilities at the given parameters.
//
// The forward map factorizes as p_s = e_o^T exp(R t_d) diag(U rho_s U^+),
// with U = exp(-i H t_u), because the readout stage keeps the population
// sector closed. All derivatives reduce to Frechet derivatives of the two
// small exponentials; directions are aggregated through the trace identity
// Tr(B D(A, E)) = Tr(D(A, B) E), so one doubled-dimension exponential per
// sample (for gamma) and one per evaluation (for h) covers every parameter.
inline EvalResult evaluate(const EvalContext& ctx, const QsnnParameters& params,
                           bool want_h_grad) {
  const Index d = ctx.d;
  const auto n_pairs = static_cast<int>(ctx.rho_in.size());
  const auto n_ch = static_cast<int>(ctx.ch_w.size());
  const auto n_h = static_cast<int>(ctx.hp_i.size());
  const double inv_n = 1.0 / static_cast<double>(n_pairs);

  const CMatrix ham = build_hamiltonian(ctx.topo, params.h);
  const CMatrix u = matexp(CMatrix(Complex(0.0, -1.0) * params.t_u * ham));
  const CMatrix u_adj = u.adjoint();
  const RMatrix a_pop = rate_matrix(ctx, params.gamma_out) * params.t_d;
  const RMatrix p_mat = matexp(a_pop);

  EvalResult r;
  r.grad_h = RVector::Zero(n_h);
  r.grad_gamma = RVector::Zero(n_ch);
  r.sample_gamma_derivs = RMatrix::Zero(n_pairs, n_ch);

  double p_sum = 0.0;
  CMatrix aggregate = CMatrix::Zero(d, d);  // sum_s rho_s U^+ diag(P row o_s)
  for (int s = 0; s < n_pairs; ++s) {
    const CMatrix sigma = u * ctx.rho_in[static_cast<std::size_t>(s)] * u_adj;
    const RVector x = sigma.diagonal().real();
    const int o = ctx.out_idx[static_cast<std::size_t>(s)];
    p_sum += p_mat.row(o).dot(x);

    RMatrix b = RMatrix::Zero(d, d);
    b.col(o) = x;
    const RMatrix ds = frechet_exp(a_pop, b).derivative;
    for (int k = 0; k < n_ch; ++k) {
      const auto w = ctx.ch_w[static_cast<std::size_t>(k)];
      const auto ok = ctx.ch_o[static_cast<std::size_t>(k)];
      r.sample_gamma_derivs(s, k) = 2.0 * params.gamma_out[k] * params.t_d *
                                    (ds(w, ok) - ds(w, w));
    }
    if (want_h_grad && n_h > 0)
      aggregate += ctx.rho_in[static_cast<std::size_t>(s)] * u_adj *
                   p_mat.row(o).transpose().asDiagonal();
  }

  r.loss = 1.0 - p_sum * inv_n;
  for (int k = 0; k < n_ch; ++k)
    r.grad_gamma[k] = -inv_n * r.sample_gamma_derivs.col(k).sum();
  r.robustness = 1.0 - r.sample_gamma_derivs.squaredNorm() * inv_n /
                           static_cast<double>(n_ch);

  if (want_h_grad && n_h > 0) {
    const CMatrix g =
        frechet_exp(CMatrix(Complex(0.0, -1.0) * params.t_u * ham), aggregate)
            .derivative;
    for (int k = 0; k < n_h; ++k) {
      const auto i = ctx.hp_i[static_cast<std::size_t>(k)];
      const auto j = ctx.hp_j[static_cast<std::size_t>(k)];
      r.grad_h[k] = -2.0 * params.t_u * inv_n * std::imag(g(j, i) + g(i, j));
    }
  }

  r.tracked_p_yes.reserve(ctx.tracked_rho.size());
  for (const auto& rho : ctx.tracked_rho) {
    const RVector x = (u * rho * u_adj).diagonal().real();
    r.tracked_p_yes.push_back(p_mat.row(ctx.yes_idx).dot(x));
  }
  return r;
}

inline double context_loss(const EvalContext& ctx, const QsnnParameters& params) {
  const CMatrix ham = build_hamiltonian(ctx.topo, params.h);
  const CMatrix u = matexp(CMatrix(Complex(0.0, -1.0) * params.t_u * ham));
  const RMatrix p_mat = matexp(RMatrix(rate_matrix(ctx, params.gamma_out) * params.t_d));
  double p_sum = 0.0;
  for (std::size_t s = 0; s < ctx.rho_in.size(); ++s) {
    const RVector x = (u * ctx.rho_in[s] * u.adjoint()).diagonal().real();
    p_sum += p_mat.row(ctx.out_idx[s]).dot(x);
  }
  return 1.0 - p_sum / static_cast<double>(ctx.rho_in.size());
}

inline Gradients fd_gradient(const EvalContext& ctx, const QsnnParameters& params,
                             double eps) {
  if (!(eps > 0.0)) throw ValidationError("finite differences: step must be positive");
  Gradients g{RVector::Zero(params.h.size()), RVector::Zero(params.gamma_out.size())};
  QsnnParameters work = params;
  for (Index k = 0; k < params.h.size(); ++k) {
    work.h[k] = params.h[k] + eps;
    const double up = context_loss(ctx, work);
    work.h[k] = params.h[k] - eps;
    const double down = context_loss(ctx, work);
    work.h[k] = params.h[k];
    g.h[k] = (up - down) / (2.0 * eps);
  }
  for (Index k = 0; k < params.gamma_out.size(); ++k) {
    work.gamma_out[k] = params.gamma_out[k] + eps;
    const double up = context_loss(ctx, work);
    work.gamma_out[k] = params.gamma_out[k] - eps;
    const double down = context_loss(ctx, work);
    work.gamma_out[k] = params.gamma_out[k];
    g.gamma_out[k] = (up - down) / (2.0 * eps);
  }
  return g;
}

}  // namespace detail

// Loss = 1 - mean correct-label population over the dataset.
inline double loss(const QsnnTopology& topo, const QsnnParameters& params,
                   const std::vector<TrainingPair>& pairs) {
  topo.validate();
  params.validate(topo);
  return detail::context_loss(detail::make_context(topo, params, pairs), params);
}

// Exact loss gradient with respect to (h, gamma_out).
inline Gradients gradient(const QsnnTopology& topo, const QsnnParameters& params,
                          const std::vector<TrainingPair>& pairs) {
  topo.validate();
  params.validate(topo);
  const auto ctx = detail::make_context(topo, params, pairs);
  auto ev = detail::evaluate(ctx, params, /*want_h_grad=*/true);
  return Gradients{std::move(ev.grad_h), std::move(ev.grad_gamma)};
}

// Central-difference gradient of the same loss; the slow but assumption-free
// route.
inline Gradients finite_diff_gradient(const QsnnTopology& topo,
                                      const QsnnParameters& params,
                                      const std::vector<TrainingPair>& pairs,
                                      double eps = 1e-5) {
  topo.validate();
  params.validate(topo);
  return detail::fd_gradient(detail::make_context(topo, params, pairs), params, eps);
}

// 1 - mean squared sensitivity of the correct-label population to the decay
// amplitudes; 1 means a dataset perfectly insensitive to gamma perturbations.
inline double robustness(const QsnnTopology& topo, const QsnnParameters& params,
                         const std::vector<TrainingPair>& pairs) {
  topo.validate();
  params.validate(topo);
  const auto ctx = detail::make_context(topo, params, pairs);
  return detail::evaluate(ctx, params, /*want_h_grad=*/false).robustness;
}

// One gradient-descent update. Incoherent networks keep their couplings
// frozen at zero; only the decay amplitudes learn.
inline QsnnParameters sgd_step(const QsnnParameters& params, const Gradients& g,
                               double learning_rate, Mode mode) {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ValidationError("sgd_step: learning rate must be positive");
  if (g.h.size() != params.h.size() || g.gamma_out.size() != params.gamma_out.size())
    throw ValidationError("sgd_step: gradient shape mismatch");
  QsnnParameters out = params;
  if (mode == Mode::Coherent) out.h -= learning_rate * g.h;
  out.gamma_out -= learning_rate * g.gamma_out;
  return out;
}

namespace detail {

inline void check_record(double loss_value, double robustness_value, int iteration) {
  if (!std::isfinite(loss_value))
    throw NumericError("training: non-finite loss at iteration " +
                       std::to_string(iteration) +
                       " (try a smaller learning rate)");
  if (loss_value < -1e-9 || loss_value > 1.0 + 1e-9)
    throw NumericError("training: loss " + std::to_string(loss_value) +
                       " outside [0, 1] at iteration " + std::to_string(iteration));
  if (robustness_value > 1.0 + 1e-9)
    throw NumericError("training: robustness " + std::to_string(robustness_value) +
                       " above 1 at iteration " + std::to_string(iteration));
}

}  // namespace detail

// Full gradient-descent training of the network. Returns one record per
// iteration (plus the initial state) and the final parameters.
inline TrainingHistory train(const QsnnTopology& topo,
                             const std::vector<TrainingPair>& dataset,
                             const TrainConfig& cfg) {
  topo.validate();
  cfg.validate();

  QsnnParameters params;
  params.gamma_in = cfg.gamma_in;
  params.t_in = cfg.t_in;
  params.t_u = cfg.t_u;
  params.t_d = cfg.t_d;
  const auto n_h = static_cast<Index>(topo.hamiltonian_pairs.size());
  params.h = cfg.mode == Mode::Coherent ? RVector::Constant(n_h, cfg.h_init)
                                        : RVector::Zero(n_h);
  SampleRng rng = SampleRng::substream(cfg.seed, cfg.sample_index);
  params.gamma_out = cfg.gamma_init.draw(
      static_cast<int>(topo.output_channels.size()), rng, cfg.sample_index);
  params.validate(topo);

  const auto clean_ctx =
      detail::make_context(topo, params, dataset, cfg.tracked_sequences);
  std::optional<detail::EvalContext> corrupted_ctx;
  if (cfg.correction)
    corrupted_ctx = detail::make_context(topo, params, cfg.correction->corrupted,
                                         cfg.tracked_sequences);
  auto active = [&](int it) -> const detail::EvalContext& {
    if (corrupted_ctx && it < cfg.correction->correct_at) return *corrupted_ctx;
    return clean_ctx;
  };

  TrainingHistory hist;
  hist.records.reserve(static_cast<std::size_t>(cfg.iterations) + 1);
  for (int it = 0; it <= cfg.iterations; ++it) {
    const auto& ctx = active(it);
    const bool stepping = it < cfg.iterations;
    const bool want_h = stepping && cfg.mode == Mode::Coherent &&
                        cfg.gradient_method == GradientMethod::Analytic;
    auto ev = detail::evaluate(ctx, params, want_h);
    detail::check_record(ev.loss, ev.robustness, it);
    hist.records.push_back({it, ev.loss, ev.robustness, std::move(ev.tracked_p_yes)});
    if (stepping) {
      const Gradients g =
          cfg.gradient_method == GradientMethod::Analytic
              ? Gradients{std::move(ev.grad_h), std::move(ev.grad_gamma)}
              : detail::fd_gradient(ctx, params, cfg.fd_epsilon);
      params = sgd_step(params, g, cfg.learning_rate, cfg.mode);
    }
  }
  hist.final_qsnn = std::move(params);
  return hist;
}

// Gradient-descent training of the softmax baseline on the same encoded
// inputs. Histories line up record-for-record with train(); the robustness
// column is NaN because the score is defined through the decay amplitudes the
// baseline does not have.
inline TrainingHistory classical_train(const QsnnTopology& topo,
                                       const std::vector<TrainingPair>& dataset,
                                       const TrainConfig& cfg) {
  topo.validate();
  cfg.validate();
  if (dataset.empty()) throw ValidationError("train: empty dataset");

  QsnnParameters enc;
  enc.h = RVector::Zero(static_cast<Index>(topo.hamiltonian_pairs.size()));
  enc.gamma_out = RVector::Zero(static_cast<Index>(topo.output_channels.size()));
  enc.gamma_in = cfg.gamma_in;
  enc.t_in = cfg.t_in;
  enc.t_u = cfg.t_u;
  enc.t_d = cfg.t_d;

  const auto clean = classical_dataset(topo, enc, dataset);
  std::vector<ClassicalSample> corrupted;
  if (cfg.correction)
    corrupted = classical_dataset(topo, enc, cfg.correction->corrupted);
  auto active = [&](int it) -> const std::vector<ClassicalSample>& {
    if (cfg.correction && it < cfg.correction->correct_at) return corrupted;
    return clean;
  };
  std::vector<RVector> tracked_x;
  for (const auto& seq : cfg.tracked_sequences)
    tracked_x.push_back(
        word_populations(encode_input(topo, enc, seq), topo.vocab_size));

  SampleRng rng = SampleRng::substream(cfg.seed, cfg.sample_index);
  ClassicalNN nn = classical_init(topo.vocab_size, rng);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  TrainingHistory hist;
  hist.records.reserve(static_cast<std::size_t>(cfg.iterations) + 1);
  for (int it = 0; it <= cfg.iterations; ++it) {
    const auto& samples = active(it);
    const double l = classical_loss(nn, samples);
    if (!std::isfinite(l))
      throw NumericError("training: non-finite loss at iteration " +
                         std::to_string(it));
    IterationRecord rec{it, l, nan, {}};
    for (const auto& x : tracked_x)
      rec.tracked_p_yes.push_back(classical_forward(nn, x)[0]);
    hist.records.push_back(std::move(rec));
    if (it < cfg.iterations) {
      const auto g = classical_gradient(nn, samples);
      nn.weights -= cfg.learning_rate * g.weights;
      nn.biases -= cfg.learning_rate * g.biases;
    }
  }
  hist.final_classical = std::move(nn);
  return hist;
}

}  // namespace qsnn
