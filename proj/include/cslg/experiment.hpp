#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cslg/bayes.hpp"
#include "cslg/grounding.hpp"
#include "cslg/metrics.hpp"
#include "cslg/percept_sim.hpp"

namespace cslg {

enum class SplitMode { TrainEqTest, Holdout };

struct SplitSpec {
  double train_fraction = 1.0;
  SplitMode mode = SplitMode::TrainEqTest;

  /// 1.0 means train = test; anything in (0, 1) is a prefix holdout.
  static SplitSpec from_fraction(double fraction);
  std::size_t train_size(std::size_t n) const;
  void validate() const;
};

enum class ModelChoice { Csl, Baseline, Both };

struct RunConfig {
  ScenarioConfig scenario;
  std::size_t n_sequences = 10;
  SplitSpec split = SplitSpec::from_fraction(1.0);
  ModelChoice model = ModelChoice::Both;
  std::array<std::optional<double>, 3> eps;  // per-modality overrides
  std::optional<int> min_samples;
  double aux_factor = 2.0;
  std::optional<std::size_t> freeze_after;
  bayes::BayesConfig bayes;
  std::filesystem::path output_dir = "out";
  unsigned threads = 0;  // 0 = hardware concurrency

  ClusteringParams clustering() const;
  LearnerConfig learner() const;
  void validate() const;
};

/// CSL learner: observes the training prefix online (recording the mapping
/// trajectory after every observation), freezes, then scores the test part.
Metrics run_csl(std::span<const Situation> sequence, const SplitSpec& split,
                const LearnerConfig& cfg, std::optional<std::size_t> freeze_after = std::nullopt);

/// Snapshot of the learner after each training observation of run_csl.
std::vector<std::vector<MappingRecord>> csl_snapshots(std::span<const Situation> sequence,
                                                      const SplitSpec& split, const LearnerConfig& cfg);

/// Bayesian baseline: batch fit on the training part, score on the test part.
Metrics run_baseline(std::span<const Situation> sequence, const SplitSpec& split,
                     const bayes::BayesConfig& cfg, Rng& rng);

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t n = 0;
};

/// Mean and population std; nullopt for no samples.
std::optional<Stat> summarize(std::span<const double> xs);

struct WordSummary {
  std::string word;
  Modality modality = Modality::Shape;
  std::optional<Stat> accuracy;
  double train_count = 0.0;  // mean over runs
  double test_count = 0.0;
  double total_count = 0.0;
  double auxiliary_rate = 0.0;  // fraction of runs in which the model treats the word as auxiliary
};

struct Summary {
  std::string model;
  std::uint64_t seed = 0;
  double train_fraction = 1.0;
  std::size_t runs = 0;
  std::vector<WordSummary> words;
  std::map<Modality, std::optional<Stat>> per_modality;
  std::optional<Stat> sentence_accuracy;
  std::vector<std::array<Stat, 2>> trajectory;  // (correct, false) per situation index
};

/// Elementwise mean/std over runs. Words listed in `word_order` come first in
/// that order; remaining words follow sorted by modality and surface.
Summary aggregate(std::span<const Metrics> runs, const std::vector<std::string>& word_order = {});

/// Writes word_accuracy.csv, modality_accuracy.csv, mapping_trajectory.csv,
/// word_occurrences.csv and summary.json into out_dir (created if missing).
void emit_reports(const Summary& summary, const std::filesystem::path& out_dir);

struct ExperimentResult {
  Scenario scenario;
  std::map<std::string, std::vector<Metrics>> runs;  // keyed by model name
  std::map<std::string, Summary> summaries;
};

/// Generates (or reuses) the scenario, shuffles n_sequences orders and runs
/// the selected models on each. Sequences run in parallel; results do not
/// depend on the thread count.
ExperimentResult run_experiment(const RunConfig& cfg, std::optional<Scenario> scenario = std::nullopt);

/// Runs the experiment and writes one report directory per model under output_dir.
ExperimentResult run_and_report(const RunConfig& cfg, std::optional<Scenario> scenario = std::nullopt);

}  // namespace cslg
