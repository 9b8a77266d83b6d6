#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "qsnn/errors.hpp"
#include "qsnn/training.hpp"

namespace qsnn {

// Shortest decimal form that parses back to the identical double; CSV output
// is therefore byte-stable and lossless.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct SummaryRow {
  int iteration = 0;
  double mean_loss = 0.0, ci95_lo = 0.0, ci95_hi = 0.0, var_loss = 0.0;
  double mean_robustness = 0.0, ci95_rob_lo = 0.0, ci95_rob_hi = 0.0;
};

namespace detail {

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // sample variance (n - 1 denominator; 0 when n == 1)
};

inline MeanVar mean_var(const std::vector<double>& xs) {
  const auto n = static_cast<double>(xs.size());
  MeanVar mv;
  for (double x : xs) mv.mean += x;
  mv.mean /= n;
  if (xs.size() > 1) {
    for (double x : xs) mv.var += (x - mv.mean) * (x - mv.mean);
    mv.var /= n - 1.0;
  }
  return mv;
}

}  // namespace detail

// Per-iteration statistics across a set of runs: mean, 95% confidence
// interval (mean +/- 1.96 stddev / sqrt(S)), and sample variance, for loss
// and robustness.
inline std::vector<SummaryRow> summarize(const std::vector<TrainingHistory>& runs) {
  if (runs.empty()) throw ValidationError("summarize: no runs");
  const std::size_t rows = runs.front().records.size();
  for (const auto& run : runs)
    if (run.records.size() != rows)
      throw ValidationError("summarize: runs have differing lengths");
  const double root_s = std::sqrt(static_cast<double>(runs.size()));
  std::vector<SummaryRow> out;
  out.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<double> losses, robs;
    for (const auto& run : runs) {
      losses.push_back(run.records[r].loss);
      robs.push_back(run.records[r].robustness);
    }
    const auto l = detail::mean_var(losses);
    const auto rb = detail::mean_var(robs);
    SummaryRow row;
    row.iteration = runs.front().records[r].iteration;
    row.mean_loss = l.mean;
    row.var_loss = l.var;
    row.ci95_lo = l.mean - 1.96 * std::sqrt(l.var) / root_s;
    row.ci95_hi = l.mean + 1.96 * std::sqrt(l.var) / root_s;
    row.mean_robustness = rb.mean;
    row.ci95_rob_lo = rb.mean - 1.96 * std::sqrt(rb.var) / root_s;
    row.ci95_rob_hi = rb.mean + 1.96 * std::sqrt(rb.var) / root_s;
    out.push_back(row);
  }
  return out;
}

namespace detail {

inline std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // '\n' line endings everywhere
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

}  // namespace detail

// One row per record: iteration, loss, robustness, then one p_yes_<id>
// column per tracked sequence.
inline void write_history_csv(const TrainingHistory& hist,
                              const std::vector<std::string>& tracked_ids,
                              const std::filesystem::path& path) {
  auto out = detail::open_csv(path);
  out << "iteration,loss,robustness";
  for (const auto& id : tracked_ids) out << ",p_yes_" << id;
  out << '\n';
  for (const auto& rec : hist.records) {
    if (rec.tracked_p_yes.size() != tracked_ids.size())
      throw ValidationError("write_history_csv: tracked column count mismatch");
    out << rec.iteration << ',' << format_double(rec.loss) << ','
        << format_double(rec.robustness);
    for (double p : rec.tracked_p_yes) out << ',' << format_double(p);
    out << '\n';
  }
  if (!out) throw ValidationError("error while writing " + path.string());
}

inline void write_summary_csv(const std::vector<SummaryRow>& rows,
                              const std::filesystem::path& path) {
  auto out = detail::open_csv(path);
  out << "iteration,mean_loss,ci95_lo,ci95_hi,var_loss,mean_robustness,"
         "ci95_rob_lo,ci95_rob_hi\n";
  for (const auto& r : rows)
    out << r.iteration << ',' << format_double(r.mean_loss) << ','
        << format_double(r.ci95_lo) << ',' << format_double(r.ci95_hi) << ','
        << format_double(r.var_loss) << ',' << format_double(r.mean_robustness)
        << ',' << format_double(r.ci95_rob_lo) << ','
        << format_double(r.ci95_rob_hi) << '\n';
  if (!out) throw ValidationError("error while writing " + path.string());
}

// Per-iteration mean and sample variance of each tracked sequence's
// Yes-probability across runs: iteration, then mean_p_yes_<id>,
// var_p_yes_<id> per sequence.
inline void write_accuracy_csv(const std::vector<TrainingHistory>& runs,
                               const std::vector<std::string>& tracked_ids,
                               const std::filesystem::path& path) {
  if (runs.empty()) throw ValidationError("write_accuracy_csv: no runs");
  auto out = detail::open_csv(path);
  out << "iteration";
  for (const auto& id : tracked_ids)
    out << ",mean_p_yes_" << id << ",var_p_yes_" << id;
  out << '\n';
  const std::size_t rows = runs.front().records.size();
  for (const auto& run : runs)
    if (run.records.size() != rows)
      throw ValidationError("write_accuracy_csv: runs have differing lengths");
  for (std::size_t r = 0; r < rows; ++r) {
    out << runs.front().records[r].iteration;
    for (std::size_t t = 0; t < tracked_ids.size(); ++t) {
      std::vector<double> ps;
      for (const auto& run : runs) {
        if (run.records[r].tracked_p_yes.size() != tracked_ids.size())
          throw ValidationError("write_accuracy_csv: tracked column mismatch");
        ps.push_back(run.records[r].tracked_p_yes[t]);
      }
      const auto mv = detail::mean_var(ps);
      out << ',' << format_double(mv.mean) << ',' << format_double(mv.var);
    }
    out << '\n';
  }
  if (!out) throw ValidationError("error while writing " + path.string());
}

}  // namespace qsnn
