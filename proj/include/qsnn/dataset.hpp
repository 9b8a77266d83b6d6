#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qsnn/errors.hpp"
#include "qsnn/topology.hpp"

namespace qsnn {

enum class DatasetRole { Train, Test };

struct LabeledPair {
  std::vector<std::string> sequence;
  std::string label;  // "Yes" or "No"
};

struct LabeledDataset {
  std::vector<std::string> vocabulary;  // order defines word indices 1..V
  std::vector<LabeledPair> pairs;
  DatasetRole role = DatasetRole::Train;
};

inline int word_index(const LabeledDataset& ds, const std::string& word) {
  for (std::size_t i = 0; i < ds.vocabulary.size(); ++i)
    if (ds.vocabulary[i] == word) return static_cast<int>(i) + 1;
  throw ValidationError("word \"" + word + "\" is not in the vocabulary");
}

inline void validate_dataset(const LabeledDataset& ds, const std::string& where) {
  if (ds.vocabulary.empty())
    throw ValidationError(where + ": vocabulary must not be empty");
  std::set<std::string> seen;
  for (const auto& w : ds.vocabulary) {
    if (w.empty()) throw ValidationError(where + ": empty vocabulary word");
    if (!seen.insert(w).second)
      throw ValidationError(where + ": duplicate vocabulary word \"" + w + "\"");
  }
  for (std::size_t p = 0; p < ds.pairs.size(); ++p) {
    const auto& pair = ds.pairs[p];
    if (pair.sequence.empty())
      throw ValidationError(where + ": pair " + std::to_string(p) +
                            " has an empty sequence");
    for (const auto& w : pair.sequence)
      if (!seen.count(w))
        throw ValidationError(where + ": pair " + std::to_string(p) +
                              " uses unknown word \"" + w + "\"");
    label_from_string(pair.label);  // throws on anything but Yes/No
  }
}

inline LabeledDataset dataset_from_json(const nlohmann::json& j,
                                        const std::string& where,
                                        DatasetRole role) {
  auto bad = [&](const std::string& why) { return ValidationError(where + ": " + why); };
  if (!j.is_object()) throw bad("top level must be an object");
  if (!j.contains("vocabulary") || !j["vocabulary"].is_array())
    throw bad("missing \"vocabulary\" array");
  if (!j.contains("pairs") || !j["pairs"].is_array())
    throw bad("missing \"pairs\" array");
  LabeledDataset ds;
  ds.role = role;
  for (const auto& w : j["vocabulary"]) {
    if (!w.is_string()) throw bad("vocabulary entries must be strings");
    ds.vocabulary.push_back(w.get<std::string>());
  }
  for (const auto& p : j["pairs"]) {
    if (!p.is_object() || !p.contains("sequence") || !p.contains("label") ||
        !p["sequence"].is_array() || !p["label"].is_string())
      throw bad("each pair needs a \"sequence\" array and a \"label\" string");
    LabeledPair pair;
    for (const auto& w : p["sequence"]) {
      if (!w.is_string()) throw bad("sequence entries must be strings");
      pair.sequence.push_back(w.get<std::string>());
    }
    pair.label = p["label"].get<std::string>();
    ds.pairs.push_back(std::move(pair));
  }
  validate_dataset(ds, where);
  return ds;
}

inline LabeledDataset load_dataset(const std::filesystem::path& path,
                                   DatasetRole role = DatasetRole::Train) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("dataset " + path.string() + ": " + e.what());
  }
  return dataset_from_json(j, path.string(), role);
}

inline nlohmann::json dataset_to_json(const LabeledDataset& ds) {
  nlohmann::json j;
  j["vocabulary"] = ds.vocabulary;
  j["pairs"] = nlohmann::json::array();
  for (const auto& pair : ds.pairs)
    j["pairs"].push_back({{"sequence", pair.sequence}, {"label", pair.label}});
  return j;
}

inline void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path) {
  validate_dataset(ds, path.string());
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write dataset file " + path.string());
  out << dataset_to_json(ds).dump(2) << '\n';
  if (!out) throw ValidationError("error while writing " + path.string());
}

inline std::vector<TrainingPair> to_training_pairs(const LabeledDataset& ds) {
  validate_dataset(ds, "dataset");
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < ds.vocabulary.size(); ++i)
    index[ds.vocabulary[i]] = static_cast<int>(i) + 1;
  std::vector<TrainingPair> out;
  out.reserve(ds.pairs.size());
  for (const auto& pair : ds.pairs) {
    TrainingPair tp;
    for (const auto& w : pair.sequence) tp.sequence.push_back(index.at(w));
    tp.label = label_from_string(pair.label);
    out.push_back(std::move(tp));
  }
  return out;
}

// Stable column identifier for a sequence: words joined by underscores,
// non-alphanumeric characters replaced.
inline std::string sequence_id(const std::vector<std::string>& words) {
  std::string id;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) id += '_';
    for (char c : words[i])
      id += (std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '_';
  }
  return id;
}

namespace detail {

inline LabeledDataset make_dataset(std::vector<std::string> vocab,
                                   std::vector<LabeledPair> pairs,
                                   DatasetRole role) {
  LabeledDataset ds{std::move(vocab), std::move(pairs), role};
  validate_dataset(ds, "builtin corpus");
  return ds;
}

inline const std::vector<std::string>& verse_vocabulary() {
  static const std::vector<std::string> vocab{"gold", "dawn", "lark", "ash",
                                              "dusk", "crow", "wind", "tide"};
  return vocab;
}

}  // namespace detail

// Shipped corpora.
//
// "accelerate": the minimal two-word task — sequence (w1, w2) is Yes and the
// reversed sequence is No — with the test set mirroring the training set.
//
// "verse-default": a synthetic stand-in corpus for verse recognition over an
// 8-word vocabulary. gold/dawn/lark lead grammatical sentences; wind and tide
// only ever trail them and never touch an ungrammatical pair, so their output
// channels see only the small trailing population during training. tide
// trails three different sentences while wind trails just one, which leaves
// wind the most weakly trained word in the vocabulary; ash/dusk/crow form the
// ungrammatical pairs among themselves. All 12 training pairs are in normal
// order; inverted order is never seen in training. The 4 test sequences, all
// labeled Yes, are 2 unseen normal sentences and 2 verses that lead with
// wind, putting the large leading population weight on the word whose own
// readout is weakest — the case where a learned word-word coupling can still
// reroute that population through better-trained neighbours.
inline std::pair<LabeledDataset, LabeledDataset> builtin_corpus(
    const std::string& name) {
  using detail::make_dataset;
  if (name == "accelerate") {
    const std::vector<std::string> vocab{"w1", "w2"};
    std::vector<LabeledPair> pairs{{{"w1", "w2"}, "Yes"}, {{"w2", "w1"}, "No"}};
    return {make_dataset(vocab, pairs, DatasetRole::Train),
            make_dataset(vocab, pairs, DatasetRole::Test)};
  }
  if (name == "verse-default") {
    const auto& vocab = detail::verse_vocabulary();
    std::vector<LabeledPair> train{
        {{"gold", "wind"}, "Yes"}, {{"gold", "tide"}, "Yes"},
        {{"dawn", "tide"}, "Yes"}, {{"lark", "tide"}, "Yes"},
        {{"gold", "dawn"}, "Yes"}, {{"dawn", "lark"}, "Yes"},
        {{"ash", "dusk"}, "No"},   {{"dusk", "ash"}, "No"},
        {{"dusk", "crow"}, "No"},  {{"crow", "dusk"}, "No"},
        {{"crow", "ash"}, "No"},   {{"ash", "crow"}, "No"}};
    std::vector<LabeledPair> test{
        {{"dawn", "wind"}, "Yes"},   // normal: content word leads
        {{"gold", "lark"}, "Yes"},   // normal
        {{"wind", "gold"}, "Yes"},   // verse: inverted order
        {{"wind", "dawn"}, "Yes"}};  // verse
    return {make_dataset(vocab, train, DatasetRole::Train),
            make_dataset(vocab, test, DatasetRole::Test)};
  }
  throw ValidationError("unknown builtin corpus \"" + name + "\"");
}

// The accelerate training pairs with every label inverted — the default
// corrupted set for the label-noise experiment. Swapping both labels keeps
// the corrupted task exactly as learnable as the clean one (it is the same
// task with Yes and No exchanged), so the two models train indistinguishably
// until the correction hits and every learned answer is suddenly wrong.
inline LabeledDataset builtin_swapped_labels() {
  auto [train, test] = builtin_corpus("accelerate");
  (void)test;
  for (auto& pair : train.pairs)
    pair.label = pair.label == "Yes" ? "No" : "Yes";
  return train;
}

}  // namespace qsnn
