// csl-ground: scenario generation, experiment runs and report rendering.

#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cslg/experiment.hpp"
#include "cslg/io.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

std::array<int, 3> parse_dims(const std::string& text) {
  std::array<int, 3> dims{};
  std::istringstream in(text);
  std::string part;
  std::size_t i = 0;
  while (std::getline(in, part, ',')) {
    if (i >= 3) throw cslg::ConfigError("--dims expects S,C,A");
    try {
      dims[i++] = std::stoi(part);
    } catch (const std::exception&) {
      throw cslg::ConfigError("--dims: '" + part + "' is not an integer");
    }
  }
  if (i != 3) throw cslg::ConfigError("--dims expects S,C,A");
  return dims;
}

cslg::RunConfig load_config(const std::string& path) {
  cslg::RunConfig cfg;
  if (path.empty()) return cfg;
  if (!std::filesystem::is_regular_file(path)) throw cslg::ConfigError("config file '" + path + "' not found");
  cfg = cslg::run_config_from_json(cslg::read_json_file(path));
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-situational word grounding simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string dims;
  std::optional<double> noise;
  std::optional<double> split;
  std::string model;
  std::string scenario_path;
  std::optional<std::size_t> sequences;
  std::optional<unsigned> threads;
  std::string snapshots_path;
  std::string model_dump_path;
  std::string summary_path;

  auto* gen = app.add_subcommand("generate", "Generate a 125-situation scenario as JSON");
  gen->add_option("--config", config_path, "Experiment config (JSON)");
  gen->add_option("--seed", seed, "Scenario seed");
  gen->add_option("--out", out, "Output scenario.json")->required();
  gen->add_option("--dims", dims, "Feature dimensions S,C,A");
  gen->add_option("--noise", noise, "Per-coordinate noise scale");

  auto* run = app.add_subcommand("run", "Run the experiment and write reports");
  run->add_option("--config", config_path, "Experiment config (JSON)");
  run->add_option("--seed", seed, "Scenario seed");
  run->add_option("--split", split, "Training fraction: 1.0 (train = test) or e.g. 0.6");
  run->add_option("--model", model, "csl, baseline or both")->check(CLI::IsMember({"csl", "baseline", "both"}));
  run->add_option("--out", out, "Output directory");
  run->add_option("--scenario", scenario_path, "Use a scenario.json instead of generating one");
  run->add_option("--sequences", sequences, "Number of shuffled sequences");
  run->add_option("--threads", threads, "Worker threads (0 = all cores)");
  run->add_option("--snapshots", snapshots_path, "Write per-situation CSL mapping snapshots of sequence 0");
  run->add_option("--dump-model", model_dump_path, "Write the fitted baseline model of sequence 0");

  auto* rep = app.add_subcommand("report", "Render CSV reports from a summary.json");
  rep->add_option("--summary", summary_path, "summary.json written by run")->required();
  rep->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      cslg::RunConfig cfg = load_config(config_path);
      if (seed) cfg.scenario.seed = *seed;
      if (!dims.empty()) cfg.scenario.dims = parse_dims(dims);
      if (noise) cfg.scenario.noise_scale = *noise;
      cfg.scenario.validate();
      cslg::Rng rng(cfg.scenario.seed);
      const auto sc = cslg::generate_scenario(cfg.scenario, cslg::build_lexicon(), rng);
      cslg::write_json_file(out, cslg::scenario_to_json(sc));
      std::cout << "wrote " << sc.situations.size() << " situations to " << out << "\n";
      return 0;
    }

    if (*run) {
      cslg::RunConfig cfg = load_config(config_path);
      if (seed) cfg.scenario.seed = *seed;
      if (split) cfg.split = cslg::SplitSpec::from_fraction(*split);
      if (model == "csl") cfg.model = cslg::ModelChoice::Csl;
      if (model == "baseline") cfg.model = cslg::ModelChoice::Baseline;
      if (model == "both") cfg.model = cslg::ModelChoice::Both;
      if (!out.empty()) cfg.output_dir = out;
      if (sequences) cfg.n_sequences = *sequences;
      if (threads) cfg.threads = *threads;
      cfg.validate();

      std::optional<cslg::Scenario> scenario;
      if (!scenario_path.empty()) {
        try {
          scenario = cslg::scenario_from_json(cslg::read_json_file(scenario_path));
        } catch (const cslg::Error& e) {
          throw cslg::ConfigError(std::string("--scenario: ") + e.what());
        }
      }

      const auto result = cslg::run_and_report(cfg, scenario);
      for (const auto& [name, s] : result.summaries) {
        std::cout << name << " (" << s.runs << " sequences, train fraction " << s.train_fraction << ")\n";
        for (const auto& [m, stat] : s.per_modality)
          if (stat) std::cout << "  " << cslg::to_string(m) << ": " << stat->mean << " +- " << stat->std << "\n";
        if (s.sentence_accuracy)
          std::cout << "  sentence: " << s.sentence_accuracy->mean << " +- " << s.sentence_accuracy->std << "\n";
      }
      std::cout << "reports in " << cfg.output_dir.string() << "\n";

      if (!snapshots_path.empty() || !model_dump_path.empty()) {
        cslg::Rng shuffle_rng = cslg::Rng(result.scenario.config.seed).derive(1);
        const auto seqs = cslg::shuffle_sequences(result.scenario.situations, 1, shuffle_rng);
        if (!snapshots_path.empty()) {
          cslg::RunConfig c = cfg;
          c.scenario = result.scenario.config;
          cslg::Json trace = cslg::Json::array();
          const auto snaps = cslg::csl_snapshots(seqs[0], cfg.split, c.learner());
          for (std::size_t i = 0; i < snaps.size(); ++i) trace.push_back(cslg::snapshot_to_json(snaps[i], i));
          cslg::write_json_file(snapshots_path, trace);
        }
        if (!model_dump_path.empty()) {
          cslg::Rng rng = cslg::Rng(result.scenario.config.seed).derive(100);
          const auto n_train = cfg.split.train_size(seqs[0].size());
          const auto corpus = cslg::bayes::make_corpus(std::span(seqs[0]).subspan(0, n_train));
          const auto state = cslg::bayes::fit(corpus, cslg::bayes::default_hyperparams(corpus, cfg.bayes),
                                              cfg.bayes.iterations, rng);
          cslg::write_json_file(model_dump_path, cslg::model_to_json(state));
        }
      }
      return 0;
    }

    if (*rep) {
      const auto summary = cslg::summary_from_json(cslg::read_json_file(summary_path));
      cslg::emit_reports(summary, out);
      std::cout << "reports in " << out << "\n";
      return 0;
    }
  } catch (const cslg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const cslg::UnknownToken& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
