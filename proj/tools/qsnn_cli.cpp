// Command-line harness: batch experiments, single training runs, and model
// evaluation for the quantum-walk sentence classifier.

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <qsnn/qsnn.hpp>

namespace {

struct RawOptions {
  std::optional<std::string> dataset, test_dataset, corrupted, params;
  std::optional<int> samples, iters;
  std::optional<double> lr, t_in, t_u, t_d, gamma_in;
  std::optional<std::uint64_t> seed;
  std::vector<double> h_init{0.1};
  std::optional<std::string> gamma_init;
  std::string mode;
  std::string out = ".";
  std::optional<int> correct_at;
};

void add_common_options(CLI::App* sub, RawOptions& raw, const char* default_mode) {
  sub->add_option("--dataset", raw.dataset, "training dataset JSON file");
  sub->add_option("--samples", raw.samples, "number of independent runs S");
  sub->add_option("--iters", raw.iters, "training iterations");
  sub->add_option("--lr", raw.lr, "learning rate");
  sub->add_option("--seed", raw.seed, "base RNG seed (default 12345)");
  sub->add_option("--h-init", raw.h_init,
                  "initial coupling strength(s); a comma list trains one "
                  "coherent model per value")
      ->delimiter(',');
  sub->add_option("--gamma-init", raw.gamma_init,
                  "decay-amplitude initialization: uniform:lo:hi | const:v | "
                  "grid:v1,v2,...");
  sub->add_option("--t-in", raw.t_in, "input-encoding duration");
  sub->add_option("--t-u", raw.t_u, "unitary-mixing duration");
  sub->add_option("--t-d", raw.t_d, "output-decay duration");
  sub->add_option("--gamma-in", raw.gamma_in, "input-encoding decay amplitude");
  raw.mode = default_mode;
  sub->add_option("--mode", raw.mode,
                  "models to run: coherent, incoherent, classical, or all");
  sub->add_option("--out", raw.out, "output directory (default .)");
}

qsnn::ExperimentConfig to_config(const RawOptions& raw) {
  qsnn::ExperimentConfig ec;
  ec.dataset_path = raw.dataset;
  ec.test_dataset_path = raw.test_dataset;
  ec.corrupted_path = raw.corrupted;
  ec.params_path = raw.params;
  ec.samples = raw.samples;
  ec.iterations = raw.iters;
  ec.learning_rate = raw.lr;
  if (raw.seed) ec.seed = *raw.seed;
  ec.h_inits = raw.h_init;
  if (raw.gamma_init) ec.gamma_init = qsnn::GammaInit::parse(*raw.gamma_init);
  ec.t_in = raw.t_in;
  ec.t_u = raw.t_u;
  ec.t_d = raw.t_d;
  ec.gamma_in = raw.gamma_in;
  ec.mode = qsnn::mode_selection_from_string(raw.mode);
  ec.out_dir = raw.out;
  if (raw.correct_at) ec.correct_at = *raw.correct_at;
  return ec;
}

void print_files(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum-walk sentence classifier experiments"};
  app.require_subcommand(1);

  RawOptions raw;
  auto* accelerate = app.add_subcommand(
      "accelerate", "multi-sample training-speed comparison on the 2-word task");
  add_common_options(accelerate, raw, "all");
  auto* verse = app.add_subcommand(
      "verse", "verse recognition on the 8-word corpus with test-set tracking");
  add_common_options(verse, raw, "all");
  verse->add_option("--test-dataset", raw.test_dataset,
                    "test dataset JSON (default: builtin verse test set)");
  auto* label_noise = app.add_subcommand(
      "label-noise", "training on corrupted labels corrected mid-run");
  add_common_options(label_noise, raw, "all");
  label_noise->add_option("--corrupted", raw.corrupted,
                          "corrupted-label dataset JSON (default: builtin)");
  label_noise->add_option("--correct-at", raw.correct_at,
                          "iteration at which labels are corrected (default 100)");
  auto* robustness = app.add_subcommand(
      "robustness", "decay-amplitude sensitivity tracking during training");
  add_common_options(robustness, raw, "all");
  auto* train_cmd =
      app.add_subcommand("train", "single seeded training run");
  add_common_options(train_cmd, raw, "coherent");
  auto* eval_cmd =
      app.add_subcommand("eval", "score sequences with saved parameters");
  add_common_options(eval_cmd, raw, "all");
  eval_cmd->add_option("--params", raw.params, "parameter JSON from `train`")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto ec = to_config(raw);
    if (accelerate->parsed()) {
      print_files(qsnn::run_accelerate(ec).files_written);
    } else if (verse->parsed()) {
      print_files(qsnn::run_verse(ec).files_written);
    } else if (label_noise->parsed()) {
      print_files(qsnn::run_label_noise(ec).files_written);
    } else if (robustness->parsed()) {
      print_files(qsnn::run_robustness(ec).files_written);
    } else if (train_cmd->parsed()) {
      const auto r = qsnn::run_single_train(ec);
      std::cout << r.model_name << " final loss "
                << qsnn::format_double(r.history.records.back().loss) << '\n';
      print_files(r.files_written);
    } else if (eval_cmd->parsed()) {
      const auto rows = qsnn::run_eval(ec);
      std::cout << std::left << std::setw(24) << "sequence" << std::setw(7)
                << "label" << std::setw(12) << "p_yes" << std::setw(12) << "p_no"
                << std::setw(12) << "p_und" << "predicted\n";
      for (const auto& r : rows) {
        std::ostringstream seq;
        for (std::size_t i = 0; i < r.sequence.size(); ++i)
          seq << (i ? " " : "") << r.sequence[i];
        std::cout << std::left << std::setw(24) << seq.str() << std::setw(7)
                  << r.label << std::fixed << std::setprecision(6)
                  << std::setw(12) << r.p_yes << std::setw(12) << r.p_no
                  << std::setw(12) << r.p_undetermined << r.predicted << '\n';
      }
    }
  } catch (const qsnn::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const qsnn::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
