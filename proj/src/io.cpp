#include "cslg/io.hpp"

#include <fstream>
#include <set>

namespace cslg {

namespace {

Json vec_to_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const Json& a) {
  if (!a.is_array()) throw ConfigError("expected a numeric array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

Json mat_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_to_json(m.row(r).transpose()));
  return rows;
}

Json stat_to_json(const std::optional<Stat>& s) {
  if (!s) return nullptr;
  return Json{{"mean", s->mean}, {"std", s->std}, {"n", s->n}};
}

std::optional<Stat> stat_from_json(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return Stat{j.at("mean").get<double>(), j.at("std").get<double>(), j.at("n").get<std::size_t>()};
}

void reject_unknown(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.contains(k)) throw ConfigError("unknown config key '" + where + k + "'");
}

template <typename T>
T get_as(const Json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

Json scenario_config_to_json(const ScenarioConfig& cfg) {
  return Json{{"seed", cfg.seed},
              {"dims", {cfg.dims[0], cfg.dims[1], cfg.dims[2]}},
              {"noise_scale", cfg.noise_scale},
              {"separation_factor", cfg.separation_factor},
              {"please_prob", cfg.please_prob}};
}

ScenarioConfig scenario_config_from_json(const Json& j, ScenarioConfig cfg) {
  reject_unknown(j, {"seed", "dims", "noise_scale", "separation_factor", "please_prob"}, "scenario.");
  if (j.contains("seed")) cfg.seed = get_as<std::uint64_t>(j["seed"], "scenario.seed");
  if (j.contains("dims")) {
    const auto d = get_as<std::vector<int>>(j["dims"], "scenario.dims");
    if (d.size() != 3) throw ConfigError("scenario.dims must have three entries");
    cfg.dims = {d[0], d[1], d[2]};
  }
  if (j.contains("noise_scale")) cfg.noise_scale = get_as<double>(j["noise_scale"], "scenario.noise_scale");
  if (j.contains("separation_factor"))
    cfg.separation_factor = get_as<double>(j["separation_factor"], "scenario.separation_factor");
  if (j.contains("please_prob")) cfg.please_prob = get_as<double>(j["please_prob"], "scenario.please_prob");
  cfg.validate();
  return cfg;
}

Json scenario_to_json(const Scenario& sc) {
  Json lex;
  for (Modality m : kPerceptModalities) {
    Json cats = Json::array();
    for (const auto& row : sc.lexicon.synonyms[index_of(m)]) {
      Json words = Json::array();
      for (const auto& l : row) words.push_back(l.surface);
      cats.push_back(words);
    }
    lex[std::string(to_string(m))] = cats;
  }
  Json aux = Json::array();
  for (const auto& l : sc.lexicon.auxiliary) aux.push_back(l.surface);
  lex["auxiliary"] = aux;

  Json protos;
  for (Modality m : kPerceptModalities) {
    Json rows = Json::array();
    for (const auto& p : sc.prototypes[index_of(m)]) rows.push_back(vec_to_json(p.mean));
    protos[std::string(to_string(m))] = rows;
  }

  Json sits = Json::array();
  for (const auto& s : sc.situations) {
    Json toks = Json::array();
    for (const auto& t : s.tokens) toks.push_back(t.surface);
    Json feats;
    for (Modality m : kPerceptModalities) feats[std::string(to_string(m))] = vec_to_json(s.feature(m));
    sits.push_back(Json{{"index", s.index},
                        {"sentence", s.sentence()},
                        {"tokens", toks},
                        {"truth", {{"shape", s.truth[0]}, {"color", s.truth[1]}, {"action", s.truth[2]}}},
                        {"features", feats}});
  }
  return Json{{"format", "csl-ground/scenario/1"},
              {"config", scenario_config_to_json(sc.config)},
              {"lexicon", lex},
              {"prototypes", protos},
              {"situations", sits}};
}

Scenario scenario_from_json(const Json& j) {
  try {
    if (j.value("format", std::string()) != "csl-ground/scenario/1")
      throw ConfigError("scenario: expected format \"csl-ground/scenario/1\"");
    Scenario sc;
    sc.config = scenario_config_from_json(j.at("config"));
    const auto& lex = j.at("lexicon");
    for (Modality m : kPerceptModalities) {
      int c = 0;
      for (const auto& row : lex.at(std::string(to_string(m)))) {
        std::vector<Lexeme> words;
        for (const auto& w : row) words.push_back({w.get<std::string>(), Category{m, c}});
        sc.lexicon.synonyms[index_of(m)].push_back(std::move(words));
        ++c;
      }
    }
    int a = 0;
    for (const auto& w : lex.at("auxiliary"))
      sc.lexicon.auxiliary.push_back({w.get<std::string>(), Category{Modality::Auxiliary, a++}});

    if (j.contains("prototypes")) {
      for (Modality m : kPerceptModalities) {
        int c = 0;
        for (const auto& row : j["prototypes"].at(std::string(to_string(m))))
          sc.prototypes[index_of(m)].push_back({m, c++, vec_from_json(row), sc.config.noise_scale});
      }
    }

    const LexiconSet vocab = sc.lexicon.as_set();
    for (const auto& js : j.at("situations")) {
      Situation s;
      s.index = js.at("index").get<std::size_t>();
      for (const auto& t : js.at("tokens")) {
        const auto it = vocab.find(Lexeme{t.get<std::string>(), std::nullopt});
        if (it == vocab.end()) throw UnknownToken(t.get<std::string>(), s.tokens.size());
        s.tokens.push_back(*it);
      }
      const auto& truth = js.at("truth");
      s.truth = {truth.at("shape").get<int>(), truth.at("color").get<int>(), truth.at("action").get<int>()};
      for (Modality m : kPerceptModalities) {
        s.features[index_of(m)] = vec_from_json(js.at("features").at(std::string(to_string(m))));
        if (s.features[index_of(m)].size() != sc.config.dim(m))
          throw DimensionMismatch("scenario situation " + std::to_string(s.index) + ": " +
                                  std::string(to_string(m)) + " feature has wrong dimension");
      }
      sc.situations.push_back(std::move(s));
    }
    return sc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
}

RunConfig run_config_from_json(const Json& j, RunConfig cfg) {
  reject_unknown(j, {"scenario", "n_sequences", "split", "model", "output_dir", "threads", "clustering", "csl", "bayes"}, "");
  if (j.contains("scenario")) cfg.scenario = scenario_config_from_json(j["scenario"], cfg.scenario);
  if (j.contains("n_sequences")) cfg.n_sequences = get_as<std::size_t>(j["n_sequences"], "n_sequences");
  if (j.contains("split")) cfg.split = SplitSpec::from_fraction(get_as<double>(j["split"], "split"));
  if (j.contains("model")) {
    const auto m = get_as<std::string>(j["model"], "model");
    if (m == "csl")
      cfg.model = ModelChoice::Csl;
    else if (m == "baseline")
      cfg.model = ModelChoice::Baseline;
    else if (m == "both")
      cfg.model = ModelChoice::Both;
    else
      throw ConfigError("model must be csl, baseline or both");
  }
  if (j.contains("output_dir")) cfg.output_dir = get_as<std::string>(j["output_dir"], "output_dir");
  if (j.contains("threads")) cfg.threads = get_as<unsigned>(j["threads"], "threads");

  if (j.contains("clustering")) {
    const auto& c = j["clustering"];
    reject_unknown(c, {"eps", "min_samples"}, "clustering.");
    if (c.contains("eps")) {
      reject_unknown(c["eps"], {"shape", "color", "action"}, "clustering.eps.");
      for (Modality m : kPerceptModalities) {
        const std::string key(to_string(m));
        if (c["eps"].contains(key)) cfg.eps[index_of(m)] = get_as<double>(c["eps"][key], "clustering.eps." + key);
      }
    }
    if (c.contains("min_samples")) cfg.min_samples = get_as<int>(c["min_samples"], "clustering.min_samples");
  }
  if (j.contains("csl")) {
    const auto& c = j["csl"];
    reject_unknown(c, {"freeze_after", "aux_factor"}, "csl.");
    if (c.contains("freeze_after")) {
      if (c["freeze_after"].is_null())
        cfg.freeze_after.reset();
      else
        cfg.freeze_after = get_as<std::size_t>(c["freeze_after"], "csl.freeze_after");
    }
    if (c.contains("aux_factor")) cfg.aux_factor = get_as<double>(c["aux_factor"], "csl.aux_factor");
  }
  if (j.contains("bayes")) {
    const auto& b = j["bayes"];
    reject_unknown(b, {"iterations", "K", "lambda", "alpha", "gamma", "kappa0", "psi_scale", "nu0_offset"}, "bayes.");
    auto& bc = cfg.bayes;
    if (b.contains("iterations")) bc.iterations = get_as<int>(b["iterations"], "bayes.iterations");
    if (b.contains("K")) {
      if (b["K"].is_array()) {
        const auto k = get_as<std::vector<int>>(b["K"], "bayes.K");
        if (k.size() != 3) throw ConfigError("bayes.K must be an integer or three integers");
        bc.components = {k[0], k[1], k[2]};
      } else {
        const int k = get_as<int>(b["K"], "bayes.K");
        bc.components = {k, k, k};
      }
    }
    if (b.contains("lambda")) bc.lambda = get_as<double>(b["lambda"], "bayes.lambda");
    if (b.contains("alpha")) bc.alpha = get_as<double>(b["alpha"], "bayes.alpha");
    if (b.contains("gamma")) bc.gamma = get_as<double>(b["gamma"], "bayes.gamma");
    if (b.contains("kappa0")) bc.kappa0 = get_as<double>(b["kappa0"], "bayes.kappa0");
    if (b.contains("psi_scale")) bc.psi_scale = get_as<double>(b["psi_scale"], "bayes.psi_scale");
    if (b.contains("nu0_offset")) bc.nu0_offset = get_as<double>(b["nu0_offset"], "bayes.nu0_offset");
  }
  cfg.validate();
  return cfg;
}

Json run_config_to_json(const RunConfig& cfg) {
  Json eps;
  for (Modality m : kPerceptModalities) {
    const auto& e = cfg.eps[index_of(m)];
    eps[std::string(to_string(m))] = e ? Json(*e) : Json(cfg.clustering()[m].eps);
  }
  const char* model = cfg.model == ModelChoice::Csl ? "csl" : cfg.model == ModelChoice::Baseline ? "baseline" : "both";
  const auto& b = cfg.bayes;
  return Json{{"scenario", scenario_config_to_json(cfg.scenario)},
              {"n_sequences", cfg.n_sequences},
              {"split", cfg.split.train_fraction},
              {"model", model},
              {"output_dir", cfg.output_dir.string()},
              {"clustering", {{"eps", eps}, {"min_samples", cfg.clustering()[Modality::Shape].min_samples}}},
              {"csl", {{"freeze_after", cfg.freeze_after ? Json(*cfg.freeze_after) : Json(nullptr)},
                       {"aux_factor", cfg.aux_factor}}},
              {"bayes", {{"iterations", b.iterations},
                         {"K", {b.components[0], b.components[1], b.components[2]}},
                         {"lambda", b.lambda},
                         {"alpha", b.alpha},
                         {"gamma", b.gamma},
                         {"kappa0", b.kappa0},
                         {"psi_scale", b.psi_scale},
                         {"nu0_offset", b.nu0_offset}}}};
}

Json snapshot_to_json(std::span<const MappingRecord> snapshot, std::size_t situation_index) {
  Json records = Json::array();
  for (const auto& r : snapshot) {
    Json rec{{"lexeme", r.lexeme}};
    if (r.percept)
      rec["percept"] = {{"modality", to_string(r.percept->modality)}, {"cluster", r.percept->cluster_id}};
    else
      rec["percept"] = nullptr;
    rec["count"] = r.count;
    rec["auxiliary"] = r.auxiliary;
    rec["correct"] = r.correct ? Json(*r.correct) : Json(nullptr);
    records.push_back(std::move(rec));
  }
  return Json{{"situation", situation_index}, {"mappings", records}};
}

Json model_to_json(const bayes::ModelState& s) {
  Json theta, phi, pi, z;
  for (Modality m : kPerceptModalities) {
    const auto i = index_of(m);
    const std::string key(to_string(m));
    theta[key] = mat_to_json(s.theta[i]);
    Json comps = Json::array();
    for (const auto& g : s.phi[i]) comps.push_back(Json{{"mean", vec_to_json(g.mean)}, {"cov", mat_to_json(g.cov)}});
    phi[key] = comps;
    pi[key] = vec_to_json(s.pi[i]);
    z[key] = s.component[i];
  }
  theta["auxiliary"] = vec_to_json(s.theta_aux);
  Json m_assign = Json::array();
  for (const auto& row : s.token_modality) {
    Json r = Json::array();
    for (Modality m : row) r.push_back(to_string(m));
    m_assign.push_back(r);
  }
  return Json{{"vocabulary", s.corpus.vocabulary},
              {"pi_w", vec_to_json(s.pi_w)},
              {"pi", pi},
              {"theta", theta},
              {"phi", phi},
              {"Z", z},
              {"m", m_assign},
              {"words", s.corpus.words}};
}

Json summary_to_json(const Summary& s) {
  Json words = Json::array();
  for (const auto& w : s.words)
    words.push_back(Json{{"word", w.word},
                         {"modality", to_string(w.modality)},
                         {"accuracy", stat_to_json(w.accuracy)},
                         {"train_count", w.train_count},
                         {"test_count", w.test_count},
                         {"total_count", w.total_count},
                         {"auxiliary_rate", w.auxiliary_rate}});
  Json mod;
  for (Modality m : kAllModalities) {
    const auto it = s.per_modality.find(m);
    mod[std::string(to_string(m))] = stat_to_json(it == s.per_modality.end() ? std::nullopt : it->second);
  }
  Json traj = Json::array();
  for (const auto& [good, bad] : s.trajectory)
    traj.push_back(Json{{"correct", stat_to_json(good)}, {"false", stat_to_json(bad)}});
  return Json{{"model", s.model},
              {"seed", s.seed},
              {"train_fraction", s.train_fraction},
              {"runs", s.runs},
              {"per_modality", mod},
              {"sentence_accuracy", stat_to_json(s.sentence_accuracy)},
              {"words", words},
              {"mapping_trajectory", traj}};
}

Summary summary_from_json(const Json& j) {
  try {
    Summary s;
    s.model = j.at("model").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train_fraction = j.at("train_fraction").get<double>();
    s.runs = j.at("runs").get<std::size_t>();
    for (Modality m : kAllModalities) s.per_modality[m] = stat_from_json(j.at("per_modality").at(std::string(to_string(m))));
    s.sentence_accuracy = stat_from_json(j.at("sentence_accuracy"));
    for (const auto& w : j.at("words")) {
      WordSummary ws;
      ws.word = w.at("word").get<std::string>();
      ws.modality = modality_from_string(w.at("modality").get<std::string>());
      ws.accuracy = stat_from_json(w.at("accuracy"));
      ws.train_count = w.at("train_count").get<double>();
      ws.test_count = w.at("test_count").get<double>();
      ws.total_count = w.at("total_count").get<double>();
      ws.auxiliary_rate = w.at("auxiliary_rate").get<double>();
      s.words.push_back(std::move(ws));
    }
    for (const auto& t : j.at("mapping_trajectory"))
      s.trajectory.push_back({*stat_from_json(t.at("correct")), *stat_from_json(t.at("false"))});
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed summary: ") + e.what());
  }
}

}  // namespace cslg
