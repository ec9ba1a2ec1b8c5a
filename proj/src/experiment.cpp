#include "cslg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <thread>

#include "cslg/io.hpp"

namespace cslg {

SplitSpec SplitSpec::from_fraction(double fraction) {
  SplitSpec s{fraction, fraction >= 1.0 ? SplitMode::TrainEqTest : SplitMode::Holdout};
  s.validate();
  return s;
}

std::size_t SplitSpec::train_size(std::size_t n) const {
  if (mode == SplitMode::TrainEqTest) return n;
  return std::min(n, static_cast<std::size_t>(std::ceil(train_fraction * static_cast<double>(n) - 1e-9)));
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw ConfigError("split train_fraction must lie in (0, 1]");
  if (mode == SplitMode::TrainEqTest && train_fraction != 1.0)
    throw ConfigError("train_eq_test split requires train_fraction = 1.0");
}

ClusteringParams RunConfig::clustering() const {
  ClusteringParams p = default_clustering(scenario);
  for (Modality m : kPerceptModalities) {
    if (eps[index_of(m)]) p[m].eps = *eps[index_of(m)];
    if (min_samples) p[m].min_samples = *min_samples;
  }
  return p;
}

LearnerConfig RunConfig::learner() const {
  LearnerConfig l;
  l.clustering = clustering();
  l.aux_factor = aux_factor;
  return l;
}

void RunConfig::validate() const {
  scenario.validate();
  split.validate();
  if (n_sequences < 1) throw ConfigError("n_sequences must be >= 1");
  for (const auto& e : eps)
    if (e && !(*e > 0.0)) throw ConfigError("clustering.eps must be positive");
  if (min_samples && *min_samples < 1) throw ConfigError("clustering.min_samples must be >= 1");
  if (!(aux_factor > 0.0)) throw ConfigError("csl.aux_factor must be positive");
  if (bayes.iterations < 0) throw ConfigError("bayes.iterations must be >= 0");
  for (int k : bayes.components)
    if (k < 1) throw ConfigError("bayes.K must be >= 1");
  if (!(bayes.lambda > 0 && bayes.alpha > 0 && bayes.gamma > 0 && bayes.kappa0 > 0 &&
        bayes.psi_scale > 0))
    throw ConfigError("bayes hyperparameters must be positive");
  if (!(bayes.nu0_offset > -1.0)) throw ConfigError("bayes.nu0_offset must exceed -1");
}

namespace {

void fill_totals(Metrics& m, std::span<const Situation> sequence) {
  for (const auto& s : sequence) {
    for (const auto& t : s.tokens) {
      auto& ws = m.words[t.surface];
      ++ws.total_count;
      if (t.truth) ws.modality = t.truth->modality;
    }
  }
}

std::pair<std::span<const Situation>, std::span<const Situation>> split_sequence(
    std::span<const Situation> sequence, const SplitSpec& split) {
  const std::size_t n_train = split.train_size(sequence.size());
  const auto train = sequence.subspan(0, n_train);
  const auto test = split.mode == SplitMode::TrainEqTest ? sequence : sequence.subspan(n_train);
  return {train, test};
}

}  // namespace

Metrics run_csl(std::span<const Situation> sequence, const SplitSpec& split,
                const LearnerConfig& cfg, std::optional<std::size_t> freeze_after) {
  const auto [train, test] = split_sequence(sequence, split);

  GroundingState state;
  std::vector<MappingCounts> trajectory;
  trajectory.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (freeze_after && i >= *freeze_after) state.frozen = true;
    state = observe(std::move(state), train[i], cfg);
    const auto snap = snapshot_mappings(state);
    trajectory.push_back(count_mappings(state, snap));
  }
  state.frozen = true;

  const auto majority = majority_truth(state);
  Metrics m = score_occurrences(train, test, [&](const Lexeme& lex) {
    return grounded_correctly(state, lex, majority);
  });
  fill_totals(m, sequence);
  m.model = "csl";
  m.train_fraction = split.train_fraction;
  m.trajectory = std::move(trajectory);
  m.auxiliary = state.auxiliary;
  return m;
}

std::vector<std::vector<MappingRecord>> csl_snapshots(std::span<const Situation> sequence,
                                                      const SplitSpec& split, const LearnerConfig& cfg) {
  const auto [train, test] = split_sequence(sequence, split);
  GroundingState state;
  std::vector<std::vector<MappingRecord>> out;
  for (const auto& s : train) {
    state = observe(std::move(state), s, cfg);
    out.push_back(snapshot_mappings(state));
  }
  return out;
}

Metrics run_baseline(std::span<const Situation> sequence, const SplitSpec& split,
                     const bayes::BayesConfig& cfg, Rng& rng) {
  const auto [train, test] = split_sequence(sequence, split);
  const auto corpus = bayes::make_corpus(train);
  const auto hyper = bayes::default_hyperparams(corpus, cfg);
  const auto state = bayes::fit(corpus, hyper, cfg.iterations, rng);
  Metrics m = bayes::score_baseline(state, train, test);
  fill_totals(m, sequence);
  m.train_fraction = split.train_fraction;
  return m;
}

std::optional<Stat> summarize(std::span<const double> xs) {
  if (xs.empty()) return std::nullopt;
  Stat s;
  s.n = xs.size();
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(s.n);
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(var / static_cast<double>(s.n));
  return s;
}

Summary aggregate(std::span<const Metrics> runs, const std::vector<std::string>& word_order) {
  if (runs.empty()) throw Error("aggregate: no runs");
  Summary out;
  out.model = runs[0].model;
  out.seed = runs[0].seed;
  out.train_fraction = runs[0].train_fraction;
  out.runs = runs.size();

  std::map<std::string, Modality> modality_of;
  for (const auto& r : runs)
    for (const auto& [w, ws] : r.words) modality_of.emplace(w, ws.modality);

  std::vector<std::string> order;
  for (const auto& w : word_order)
    if (modality_of.contains(w)) order.push_back(w);
  std::vector<std::string> rest;
  for (const auto& [w, m] : modality_of)
    if (std::find(order.begin(), order.end(), w) == order.end()) rest.push_back(w);
  std::sort(rest.begin(), rest.end(), [&](const std::string& a, const std::string& b) {
    return std::pair(modality_of[a], a) < std::pair(modality_of[b], b);
  });
  order.insert(order.end(), rest.begin(), rest.end());

  const double n_runs = static_cast<double>(runs.size());
  for (const auto& w : order) {
    WordSummary ws;
    ws.word = w;
    ws.modality = modality_of[w];
    std::vector<double> acc;
    for (const auto& r : runs) {
      const auto it = r.words.find(w);
      if (r.auxiliary.contains(w)) ws.auxiliary_rate += 1.0 / n_runs;
      if (it == r.words.end()) continue;
      ws.train_count += it->second.train_count / n_runs;
      ws.test_count += it->second.test_count / n_runs;
      ws.total_count += it->second.total_count / n_runs;
      if (auto a = it->second.accuracy()) acc.push_back(*a);
    }
    ws.accuracy = summarize(acc);
    out.words.push_back(std::move(ws));
  }

  for (Modality m : kAllModalities) {
    std::vector<double> xs;
    for (const auto& r : runs) {
      const auto it = r.per_modality.find(m);
      if (it != r.per_modality.end() && it->second) xs.push_back(*it->second);
    }
    out.per_modality[m] = summarize(xs);
  }
  std::vector<double> sent;
  for (const auto& r : runs)
    if (r.sentence_accuracy) sent.push_back(*r.sentence_accuracy);
  out.sentence_accuracy = summarize(sent);

  std::size_t len = 0;
  for (const auto& r : runs)
    if (r.trajectory) len = std::max(len, r.trajectory->size());
  for (std::size_t i = 0; i < len; ++i) {
    std::vector<double> good, bad;
    for (const auto& r : runs) {
      if (!r.trajectory || i >= r.trajectory->size()) continue;
      good.push_back((*r.trajectory)[i].correct);
      bad.push_back((*r.trajectory)[i].wrong);
    }
    out.trajectory.push_back({*summarize(good), *summarize(bad)});
  }
  return out;
}

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::string fmt(const std::optional<Stat>& s, bool std_dev) {
  if (!s) return "";
  return fmt(std_dev ? s->std : s->mean);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace

void emit_reports(const Summary& summary, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create directory '" + out_dir.string() + "': " + ec.message());

  std::string words = "word,modality,mean,std,train_count,test_count\n";
  std::string occ = "word,modality,total_mean,train_mean,test_mean\n";
  for (const auto& w : summary.words) {
    const std::string mod(to_string(w.modality));
    words += w.word + "," + mod + "," + fmt(w.accuracy, false) + "," + fmt(w.accuracy, true) + "," +
             fmt(w.train_count) + "," + fmt(w.test_count) + "\n";
    occ += w.word + "," + mod + "," + fmt(w.total_count) + "," + fmt(w.train_count) + "," +
           fmt(w.test_count) + "\n";
  }

  std::string modality = "modality,mean,std\n";
  for (Modality m : kAllModalities) {
    const auto it = summary.per_modality.find(m);
    const std::optional<Stat> s = it == summary.per_modality.end() ? std::nullopt : it->second;
    modality += std::string(to_string(m)) + "," + fmt(s, false) + "," + fmt(s, true) + "\n";
  }
  modality += "sentence," + fmt(summary.sentence_accuracy, false) + "," +
              fmt(summary.sentence_accuracy, true) + "\n";

  std::string traj = "situation,correct_mean,correct_std,false_mean,false_std\n";
  for (std::size_t i = 0; i < summary.trajectory.size(); ++i) {
    const auto& [good, bad] = summary.trajectory[i];
    traj += std::to_string(i + 1) + "," + fmt(good.mean) + "," + fmt(good.std) + "," + fmt(bad.mean) +
            "," + fmt(bad.std) + "\n";
  }

  write_file(out_dir / "word_accuracy.csv", words);
  write_file(out_dir / "modality_accuracy.csv", modality);
  write_file(out_dir / "mapping_trajectory.csv", traj);
  write_file(out_dir / "word_occurrences.csv", occ);
  write_file(out_dir / "summary.json", summary_to_json(summary).dump(2) + "\n");
}

ExperimentResult run_experiment(const RunConfig& cfg, std::optional<Scenario> scenario) {
  cfg.validate();
  ExperimentResult result;
  if (scenario) {
    result.scenario = std::move(*scenario);
  } else {
    Rng scenario_rng(cfg.scenario.seed);
    result.scenario = generate_scenario(cfg.scenario, build_lexicon(), scenario_rng);
  }
  const std::uint64_t seed = result.scenario.config.seed;
  Rng shuffle_rng = Rng(seed).derive(1);
  const auto sequences = shuffle_sequences(result.scenario.situations, cfg.n_sequences, shuffle_rng);
  const LearnerConfig learner = [&] {
    RunConfig c = cfg;
    c.scenario = result.scenario.config;
    return c.learner();
  }();

  std::vector<std::string> models;
  if (cfg.model != ModelChoice::Baseline) models.push_back("csl");
  if (cfg.model != ModelChoice::Csl) models.push_back("baseline");

  struct Job {
    std::string model;
    std::size_t sequence;
  };
  std::vector<Job> jobs;
  for (const auto& m : models)
    for (std::size_t i = 0; i < sequences.size(); ++i) jobs.push_back({m, i});

  auto run_job = [&](const Job& job) {
    const auto& seq = sequences[job.sequence];
    Metrics m;
    if (job.model == "csl") {
      m = run_csl(seq, cfg.split, learner, cfg.freeze_after);
    } else {
      Rng rng = Rng(seed).derive(100 + job.sequence);
      m = run_baseline(seq, cfg.split, cfg.bayes, rng);
    }
    m.seed = seed;
    m.sequence = job.sequence;
    return m;
  };

  std::vector<Metrics> out(jobs.size());
  const unsigned threads =
      std::max(1u, cfg.threads ? cfg.threads : std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < jobs.size(); start += threads) {
    std::vector<std::future<Metrics>> batch;
    const std::size_t end = std::min(jobs.size(), start + threads);
    for (std::size_t j = start; j < end; ++j)
      batch.push_back(std::async(std::launch::async, run_job, jobs[j]));
    for (std::size_t j = start; j < end; ++j) out[j] = batch[j - start].get();
  }

  std::vector<std::string> order;
  for (const auto& lex : result.scenario.lexicon.all()) order.push_back(lex.surface);
  for (std::size_t j = 0; j < jobs.size(); ++j) result.runs[jobs[j].model].push_back(std::move(out[j]));
  for (const auto& [model, runs] : result.runs) result.summaries[model] = aggregate(runs, order);
  return result;
}

ExperimentResult run_and_report(const RunConfig& cfg, std::optional<Scenario> scenario) {
  auto result = run_experiment(cfg, std::move(scenario));
  for (const auto& [model, summary] : result.summaries) emit_reports(summary, cfg.output_dir / model);
  return result;
}

}  // namespace cslg
