#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qsnn/classical.hpp"
#include "qsnn/dataset.hpp"
#include "qsnn/errors.hpp"
#include "qsnn/network.hpp"
#include "qsnn/summary.hpp"
#include "qsnn/topology.hpp"
#include "qsnn/training.hpp"

namespace qsnn {

enum class ModeSelection { Coherent, Incoherent, Classical, All };

inline ModeSelection mode_selection_from_string(const std::string& s) {
  if (s == "coherent") return ModeSelection::Coherent;
  if (s == "incoherent") return ModeSelection::Incoherent;
  if (s == "classical") return ModeSelection::Classical;
  if (s == "all") return ModeSelection::All;
  throw ValidationError("unknown mode \"" + s +
                        "\" (expected coherent, incoherent, classical, or all)");
}

// Options shared by every subcommand; unset fields fall back to
// per-experiment defaults.
struct ExperimentConfig {
  std::optional<std::string> dataset_path;
  std::optional<std::string> test_dataset_path;  // verse test sequences
  std::optional<std::string> corrupted_path;     // label-noise corrupted labels
  std::optional<std::string> params_path;        // eval input
  std::optional<int> samples;
  std::optional<int> iterations;
  std::optional<double> learning_rate;
  std::uint64_t seed = 12345;
  std::vector<double> h_inits{0.1};
  std::optional<GammaInit> gamma_init;
  std::optional<double> t_in, t_u, t_d, gamma_in;
  ModeSelection mode = ModeSelection::All;
  std::string out_dir = ".";
  int correct_at = 100;
};

struct ModelRun {
  std::string name;  // "coherent[_h<v>]", "incoherent", or "classical"
  std::vector<TrainingHistory> histories;
};

struct ExperimentResult {
  std::vector<ModelRun> models;
  std::vector<std::string> tracked_ids;
  std::vector<std::filesystem::path> files_written;
};

namespace detail {

struct ModelSpec {
  enum class Kind { Coherent, Incoherent, Classical };
  Kind kind = Kind::Coherent;
  double h_init = 0.1;
  std::string name;
};

// Expand a mode selection into concrete models; one coherent model per
// configured h initialization.
inline std::vector<ModelSpec> resolve_models(ModeSelection mode,
                                             const std::vector<double>& h_inits,
                                             bool include_classical_in_all) {
  if (h_inits.empty()) throw ValidationError("at least one h initialization required");
  std::vector<ModelSpec> out;
  const bool want_coherent =
      mode == ModeSelection::Coherent || mode == ModeSelection::All;
  const bool want_incoherent =
      mode == ModeSelection::Incoherent || mode == ModeSelection::All;
  const bool want_classical =
      mode == ModeSelection::Classical ||
      (mode == ModeSelection::All && include_classical_in_all);
  if (want_coherent)
    for (double h : h_inits)
      out.push_back({ModelSpec::Kind::Coherent, h,
                     h_inits.size() == 1 ? std::string("coherent")
                                         : "coherent_h" + format_double(h)});
  if (want_incoherent) out.push_back({ModelSpec::Kind::Incoherent, 0.0, "incoherent"});
  if (want_classical) out.push_back({ModelSpec::Kind::Classical, 0.0, "classical"});
  return out;
}

// Shared per-experiment settings after defaulting.
struct Resolved {
  int samples = 1;
  TrainConfig base;  // mode/h_init/sample_index filled per model and sample
};

inline Resolved resolve_common(const ExperimentConfig& ec, int default_samples,
                               int default_iters, double default_lr,
                               GammaInit default_gamma, double default_t_in,
                               double default_t_u = 1.0) {
  Resolved r;
  r.samples = ec.samples.value_or(default_samples);
  if (r.samples < 1) throw ValidationError("samples must be >= 1");
  r.base.iterations = ec.iterations.value_or(default_iters);
  r.base.learning_rate = ec.learning_rate.value_or(default_lr);
  r.base.gamma_init = ec.gamma_init.value_or(default_gamma);
  r.base.seed = ec.seed;
  r.base.t_in = ec.t_in.value_or(default_t_in);
  r.base.t_u = ec.t_u.value_or(default_t_u);
  r.base.t_d = ec.t_d.value_or(10.0);
  r.base.gamma_in = ec.gamma_in.value_or(1.0);
  r.base.validate();
  return r;
}

inline std::vector<TrainingHistory> run_model_samples(
    const QsnnTopology& topo, const std::vector<TrainingPair>& train_pairs,
    const ModelSpec& model, const TrainConfig& base, int samples) {
  std::vector<TrainingHistory> out;
  out.reserve(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    TrainConfig cfg = base;
    cfg.sample_index = static_cast<std::uint64_t>(s);
    switch (model.kind) {
      case ModelSpec::Kind::Coherent:
        cfg.mode = Mode::Coherent;
        cfg.h_init = model.h_init;
        out.push_back(train(topo, train_pairs, cfg));
        break;
      case ModelSpec::Kind::Incoherent:
        cfg.mode = Mode::Incoherent;
        out.push_back(train(topo, train_pairs, cfg));
        break;
      case ModelSpec::Kind::Classical:
        out.push_back(classical_train(topo, train_pairs, cfg));
        break;
    }
  }
  return out;
}

inline std::filesystem::path ensure_out_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec && !std::filesystem::is_directory(p))
    throw ValidationError("cannot create output directory " + p.string());
  return p;
}

inline LabeledDataset load_or_builtin_train(const ExperimentConfig& ec,
                                            const std::string& corpus) {
  if (ec.dataset_path) return load_dataset(*ec.dataset_path, DatasetRole::Train);
  return builtin_corpus(corpus).first;
}

inline std::vector<std::string> tracked_ids_of(const LabeledDataset& ds) {
  std::vector<std::string> ids;
  ids.reserve(ds.pairs.size());
  for (const auto& pair : ds.pairs) ids.push_back(sequence_id(pair.sequence));
  return ids;
}

inline std::vector<WordSequence> sequences_of(const LabeledDataset& ds) {
  std::vector<WordSequence> out;
  for (const auto& tp : to_training_pairs(ds)) out.push_back(tp.sequence);
  return out;
}

}  // namespace detail

// Multi-sample training comparison on the two-word task (or a user dataset):
// per model, S runs from matched random initializations, summarized as
// mean-loss and mean-robustness curves with 95% confidence intervals.
// Written files: <out>/<model>_summary.csv.
inline ExperimentResult run_accelerate(const ExperimentConfig& ec) {
  const auto out_dir = detail::ensure_out_dir(ec.out_dir);
  const auto train_ds = detail::load_or_builtin_train(ec, "accelerate");
  const auto train_pairs = to_training_pairs(train_ds);
  const auto topo =
      QsnnTopology::fully_connected(static_cast<int>(train_ds.vocabulary.size()));
  // Slow learning rate and a long mixing stage: the coupling direction is
  // only competitive when t_u amplifies it, and the transient between the
  // three models is what this comparison is for.
  auto rc = detail::resolve_common(ec, /*samples=*/100, /*iters=*/200,
                                   /*lr=*/0.02, GammaInit::uniform(-1.0, 1.0),
                                   /*t_in=*/10.0, /*t_u=*/4.0);
  ExperimentResult result;
  for (const auto& model :
       detail::resolve_models(ec.mode, ec.h_inits, /*classical in all*/ true)) {
    auto histories = detail::run_model_samples(topo, train_pairs, model, rc.base,
                                               rc.samples);
    const auto path = out_dir / (model.name + "_summary.csv");
    write_summary_csv(summarize(histories), path);
    result.files_written.push_back(path);
    result.models.push_back({model.name, std::move(histories)});
  }
  return result;
}

// Identical pipeline to run_accelerate; kept as its own entry point because
// the focus is the robustness columns of the summaries. Robustness is
// recorded on every iteration of every training run regardless.
inline ExperimentResult run_robustness(const ExperimentConfig& ec) {
  return run_accelerate(ec);
}

// Verse recognition on the 8-word corpus: trains each model on the 12
// training pairs and tracks the Yes-probability of the 4 test sequences each
// iteration. Written files: <out>/<model>_summary.csv (loss curves) and
// <out>/<model>_accuracy.csv (per-test-sequence mean and sample variance).
inline ExperimentResult run_verse(const ExperimentConfig& ec) {
  const auto out_dir = detail::ensure_out_dir(ec.out_dir);
  const auto train_ds = detail::load_or_builtin_train(ec, "verse-default");
  const auto test_ds = ec.test_dataset_path
                           ? load_dataset(*ec.test_dataset_path, DatasetRole::Test)
                           : builtin_corpus("verse-default").second;
  if (test_ds.vocabulary != train_ds.vocabulary)
    throw ValidationError("verse: train and test vocabularies differ");
  const auto train_pairs = to_training_pairs(train_ds);
  const auto topo =
      QsnnTopology::fully_connected(static_cast<int>(train_ds.vocabulary.size()));
  // Long encoding starves the trailing-word channels, so the verse window —
  // where rerouting through a learned coupling still beats the weak readout
  // itself — stays open across the whole iteration budget.
  auto rc = detail::resolve_common(ec, /*samples=*/8, /*iters=*/1300,
                                   /*lr=*/0.5, GammaInit::uniform(-1.0, 1.0),
                                   /*t_in=*/7.0);
  rc.base.tracked_sequences = detail::sequences_of(test_ds);

  ExperimentResult result;
  result.tracked_ids = detail::tracked_ids_of(test_ds);
  for (const auto& model :
       detail::resolve_models(ec.mode, ec.h_inits, /*classical in all*/ true)) {
    auto histories = detail::run_model_samples(topo, train_pairs, model, rc.base,
                                               rc.samples);
    const auto spath = out_dir / (model.name + "_summary.csv");
    write_summary_csv(summarize(histories), spath);
    const auto apath = out_dir / (model.name + "_accuracy.csv");
    write_accuracy_csv(histories, result.tracked_ids, apath);
    result.files_written.push_back(spath);
    result.files_written.push_back(apath);
    result.models.push_back({model.name, std::move(histories)});
  }
  return result;
}

// Label-noise recovery: trains on corrupted labels, switches to the clean
// labels at iteration correct_at. By default the corrupted set is the clean
// two-word task with both labels swapped, so the pre-correction runs are
// statistically indistinguishable and the whole contest is in how fast each
// model unlearns after the switch. One run per decay-amplitude grid value; by
// default the grid {0.1, 0.3, 0.5, 0.7} and the two network models (pass
// --mode classical to run the baseline instead). Written files:
// <out>/<model>_summary.csv.
inline ExperimentResult run_label_noise(const ExperimentConfig& ec) {
  const auto out_dir = detail::ensure_out_dir(ec.out_dir);
  const auto clean_ds = detail::load_or_builtin_train(ec, "accelerate");
  const auto corrupted_ds = ec.corrupted_path
                                ? load_dataset(*ec.corrupted_path, DatasetRole::Train)
                                : builtin_swapped_labels();
  if (corrupted_ds.vocabulary != clean_ds.vocabulary)
    throw ValidationError("label-noise: corrupted vocabulary differs from clean");
  if (corrupted_ds.pairs.size() != clean_ds.pairs.size())
    throw ValidationError("label-noise: corrupted pair count differs from clean");
  for (std::size_t i = 0; i < clean_ds.pairs.size(); ++i)
    if (corrupted_ds.pairs[i].sequence != clean_ds.pairs[i].sequence)
      throw ValidationError("label-noise: corrupted pair " + std::to_string(i) +
                            " has a different sequence than the clean dataset");

  const auto clean_pairs = to_training_pairs(clean_ds);
  const auto corrupted_pairs = to_training_pairs(corrupted_ds);
  const auto topo =
      QsnnTopology::fully_connected(static_cast<int>(clean_ds.vocabulary.size()));
  // Slow steps and a long mixing window: at correction time the decays are
  // already deep in the (now wrong) corrupted optimum, so the recovery race is
  // decided by which model can reroute populations fastest, and the coherent
  // model's mixing term gives it a second, non-decay knob to do that with.
  auto rc = detail::resolve_common(
      ec, /*samples=*/4, /*iters=*/800, /*lr=*/0.02,
      GammaInit::grid_values({0.1, 0.3, 0.5, 0.7}), /*t_in=*/3.0,
      /*t_u=*/4.0);
  if (ec.correct_at < 0 || ec.correct_at > rc.base.iterations)
    throw ValidationError("label-noise: correct-at outside [0, iterations]");
  rc.base.correction = CorrectionSchedule{corrupted_pairs, ec.correct_at};

  ExperimentResult result;
  for (const auto& model :
       detail::resolve_models(ec.mode, ec.h_inits, /*classical in all*/ false)) {
    auto histories = detail::run_model_samples(topo, clean_pairs, model, rc.base,
                                               rc.samples);
    const auto path = out_dir / (model.name + "_summary.csv");
    write_summary_csv(summarize(histories), path);
    result.files_written.push_back(path);
    result.models.push_back({model.name, std::move(histories)});
  }
  return result;
}

namespace detail {

inline nlohmann::json parameters_to_json(const std::string& model_name,
                                         const LabeledDataset& ds,
                                         const QsnnTopology& topo,
                                         const TrainingHistory& hist,
                                         const TrainConfig& cfg) {
  nlohmann::json j;
  j["model"] = model_name;
  j["vocabulary"] = ds.vocabulary;
  nlohmann::json tj;
  tj["hamiltonian_pairs"] = nlohmann::json::array();
  for (const auto& [a, b] : topo.hamiltonian_pairs)
    tj["hamiltonian_pairs"].push_back({a, b});
  tj["output_channels"] = nlohmann::json::array();
  for (const auto& [w, o] : topo.output_channels)
    tj["output_channels"].push_back({w, o});
  j["topology"] = tj;
  if (model_name == "classical") {
    nlohmann::json cj;
    cj["weights"] = nlohmann::json::array();
    for (Index r = 0; r < 2; ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Index c = 0; c < hist.final_classical.weights.cols(); ++c)
        row.push_back(hist.final_classical.weights(r, c));
      cj["weights"].push_back(row);
    }
    cj["biases"] = {hist.final_classical.biases[0], hist.final_classical.biases[1]};
    // The baseline's inputs are encoded states, so the encoding settings are
    // part of the model.
    cj["gamma_in"] = cfg.gamma_in;
    cj["t_in"] = cfg.t_in;
    cj["t_u"] = cfg.t_u;
    cj["t_d"] = cfg.t_d;
    j["classical"] = cj;
  } else {
    const auto& p = hist.final_qsnn;
    nlohmann::json qj;
    qj["h"] = std::vector<double>(p.h.data(), p.h.data() + p.h.size());
    qj["gamma_out"] = std::vector<double>(p.gamma_out.data(),
                                          p.gamma_out.data() + p.gamma_out.size());
    qj["gamma_in"] = p.gamma_in;
    qj["t_in"] = p.t_in;
    qj["t_u"] = p.t_u;
    qj["t_d"] = p.t_d;
    j["qsnn"] = qj;
  }
  return j;
}

}  // namespace detail

struct SavedModel {
  std::string model;  // "coherent", "incoherent", or "classical"
  std::vector<std::string> vocabulary;
  QsnnTopology topo;
  QsnnParameters qsnn;      // meaningful unless model == "classical"
  ClassicalNN classical;    // meaningful when model == "classical"
};

inline SavedModel load_parameters(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open parameter file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("parameters " + path.string() + ": " + e.what());
  }
  auto bad = [&](const std::string& why) {
    return ValidationError("parameters " + path.string() + ": " + why);
  };
  try {
    SavedModel m;
    m.model = j.at("model").get<std::string>();
    m.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    m.topo.vocab_size = static_cast<int>(m.vocabulary.size());
    for (const auto& pr : j.at("topology").at("hamiltonian_pairs"))
      m.topo.hamiltonian_pairs.emplace_back(pr.at(0).get<int>(), pr.at(1).get<int>());
    for (const auto& ch : j.at("topology").at("output_channels"))
      m.topo.output_channels.emplace_back(ch.at(0).get<int>(), ch.at(1).get<int>());
    m.topo.validate();
    if (m.model == "classical") {
      const auto& cj = j.at("classical");
      const auto rows = cj.at("weights").get<std::vector<std::vector<double>>>();
      if (rows.size() != 2) throw bad("classical weights need two rows");
      m.classical.weights.resize(2, static_cast<Index>(rows[0].size()));
      for (int r = 0; r < 2; ++r) {
        if (rows[static_cast<std::size_t>(r)].size() != rows[0].size())
          throw bad("ragged classical weights");
        for (std::size_t c = 0; c < rows[0].size(); ++c)
          m.classical.weights(r, static_cast<Index>(c)) =
              rows[static_cast<std::size_t>(r)][c];
      }
      const auto biases = cj.at("biases").get<std::vector<double>>();
      if (biases.size() != 2) throw bad("classical biases need two entries");
      m.classical.biases.resize(2);
      m.classical.biases << biases[0], biases[1];
      m.classical.validate();
      // Encoding settings travel in m.qsnn so eval can rebuild the inputs.
      m.qsnn.h = RVector::Zero(static_cast<Index>(m.topo.hamiltonian_pairs.size()));
      m.qsnn.gamma_out =
          RVector::Zero(static_cast<Index>(m.topo.output_channels.size()));
      m.qsnn.gamma_in = cj.at("gamma_in").get<double>();
      m.qsnn.t_in = cj.at("t_in").get<double>();
      m.qsnn.t_u = cj.at("t_u").get<double>();
      m.qsnn.t_d = cj.at("t_d").get<double>();
      m.qsnn.validate(m.topo);
    } else if (m.model == "coherent" || m.model == "incoherent") {
      const auto& qj = j.at("qsnn");
      const auto h = qj.at("h").get<std::vector<double>>();
      const auto g = qj.at("gamma_out").get<std::vector<double>>();
      m.qsnn.h = Eigen::Map<const RVector>(h.data(), static_cast<Index>(h.size()));
      m.qsnn.gamma_out =
          Eigen::Map<const RVector>(g.data(), static_cast<Index>(g.size()));
      m.qsnn.gamma_in = qj.at("gamma_in").get<double>();
      m.qsnn.t_in = qj.at("t_in").get<double>();
      m.qsnn.t_u = qj.at("t_u").get<double>();
      m.qsnn.t_d = qj.at("t_d").get<double>();
      m.qsnn.validate(m.topo);
    } else {
      throw bad("unknown model kind \"" + m.model + "\"");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw bad(e.what());
  }
}

struct TrainRunResult {
  std::string model_name;
  TrainingHistory history;
  std::vector<std::filesystem::path> files_written;
};

// One seeded training run; writes <out>/history.csv (tracking every dataset
// sequence) and <out>/params.json with the final parameters.
inline TrainRunResult run_single_train(const ExperimentConfig& ec) {
  if (ec.mode == ModeSelection::All)
    throw ValidationError("train: pick one model with --mode "
                          "(coherent, incoherent, or classical)");
  const auto out_dir = detail::ensure_out_dir(ec.out_dir);
  const auto train_ds = detail::load_or_builtin_train(ec, "accelerate");
  const auto train_pairs = to_training_pairs(train_ds);
  const auto topo =
      QsnnTopology::fully_connected(static_cast<int>(train_ds.vocabulary.size()));
  auto rc = detail::resolve_common(ec, /*samples=*/1, /*iters=*/2000,
                                   /*lr=*/0.5, GammaInit::uniform(-1.0, 1.0),
                                   /*t_in=*/10.0);
  rc.base.tracked_sequences = detail::sequences_of(train_ds);
  if (ec.h_inits.size() != 1)
    throw ValidationError("train: exactly one h initialization expected");

  const auto models = detail::resolve_models(ec.mode, ec.h_inits, true);
  const auto& model = models.front();
  auto histories =
      detail::run_model_samples(topo, train_pairs, model, rc.base, 1);

  TrainRunResult result;
  result.model_name = model.name;
  result.history = std::move(histories.front());
  const auto hpath = out_dir / "history.csv";
  write_history_csv(result.history, detail::tracked_ids_of(train_ds), hpath);
  const auto ppath = out_dir / "params.json";
  {
    std::ofstream out(ppath, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + ppath.string());
    out << detail::parameters_to_json(model.name, train_ds, topo, result.history,
                                      rc.base)
               .dump(2)
        << '\n';
    if (!out) throw ValidationError("error while writing " + ppath.string());
  }
  result.files_written = {hpath, ppath};
  return result;
}

struct EvalRow {
  std::vector<std::string> sequence;
  std::string label;
  double p_yes = 0.0, p_no = 0.0, p_undetermined = 0.0;
  std::string predicted;
};

// Loads saved parameters and scores every sequence of the dataset. Writes
// <out>/eval.csv and returns the rows for printing.
inline std::vector<EvalRow> run_eval(const ExperimentConfig& ec) {
  if (!ec.params_path) throw ValidationError("eval: --params FILE is required");
  const auto saved = load_parameters(*ec.params_path);
  const auto ds = ec.dataset_path
                      ? load_dataset(*ec.dataset_path, DatasetRole::Test)
                      : builtin_corpus("accelerate").second;
  if (ds.vocabulary != saved.vocabulary)
    throw ValidationError("eval: dataset vocabulary differs from the saved model's");
  const auto pairs = to_training_pairs(ds);

  std::vector<EvalRow> rows;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EvalRow row;
    row.sequence = ds.pairs[i].sequence;
    row.label = ds.pairs[i].label;
    if (saved.model == "classical") {
      const auto x = word_populations(
          encode_input(saved.topo, saved.qsnn, pairs[i].sequence),
          saved.topo.vocab_size);
      const auto y = classical_forward(saved.classical, x);
      row.p_yes = y[0];
      row.p_no = y[1];
      row.p_undetermined = 0.0;
      row.predicted = y[0] >= y[1] ? "Yes" : "No";
    } else {
      const auto fr = forward(saved.topo, saved.qsnn, pairs[i].sequence);
      row.p_yes = fr.p_yes;
      row.p_no = fr.p_no;
      row.p_undetermined = fr.p_undetermined;
      row.predicted = to_string(classify(fr));
    }
    rows.push_back(std::move(row));
  }

  const auto out_dir = detail::ensure_out_dir(ec.out_dir);
  const auto path = out_dir / "eval.csv";
  auto out = detail::open_csv(path);
  out << "sequence,label,p_yes,p_no,p_undetermined,predicted\n";
  for (const auto& r : rows)
    out << sequence_id(r.sequence) << ',' << r.label << ','
        << format_double(r.p_yes) << ',' << format_double(r.p_no) << ','
        << format_double(r.p_undetermined) << ',' << r.predicted << '\n';
  if (!out) throw ValidationError("error while writing " + path.string());
  return rows;
}

}  // namespace qsnn
