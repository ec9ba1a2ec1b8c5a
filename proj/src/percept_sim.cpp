#include "cslg/percept_sim.hpp"

#include <cmath>

namespace cslg {

void ScenarioConfig::validate() const {
  for (int d : dims)
    if (d < 2) throw ConfigError("scenario dims must all be >= 2");
  if (!(noise_scale > 0.0) || !std::isfinite(noise_scale))
    throw ConfigError("scenario noise_scale must be positive");
  if (!(separation_factor > 0.0)) throw ConfigError("scenario separation_factor must be positive");
  if (!(please_prob >= 0.0 && please_prob <= 1.0))
    throw ConfigError("scenario please_prob must lie in [0, 1]");
}

std::vector<Lexeme> Lexicon::all() const {
  std::vector<Lexeme> out = content();
  out.insert(out.end(), auxiliary.begin(), auxiliary.end());
  return out;
}

std::vector<Lexeme> Lexicon::content() const {
  std::vector<Lexeme> out;
  for (const auto& per_modality : synonyms)
    for (const auto& per_category : per_modality)
      out.insert(out.end(), per_category.begin(), per_category.end());
  return out;
}

LexiconSet Lexicon::as_set() const {
  const auto lexemes = all();
  return LexiconSet(lexemes.begin(), lexemes.end());
}

Lexicon build_lexicon() {
  const std::array<std::vector<std::vector<std::string>>, 3> words{{
      {{"coca cola", "soda", "pepsi", "coke", "lemonade"},
       {"latte", "milk", "milk tea", "coffee", "espresso"},
       {"candy", "chocolate", "confection", "sweets", "dark chocolate"},
       {"audi", "toyota", "mercedes", "bmw", "honda"},
       {"harry potter", "narnia", "lord of the rings", "dracula", "frankenstein"}},
      {{"yellow", "yellowish"},
       {"pink", "pinkish"},
       {"brown", "brownish"},
       {"red", "reddish"},
       {"white", "whitish"}},
      {{"lift up", "raise"}, {"grab", "take"}, {"push", "poke"}, {"pull", "drag"}, {"move", "shift"}},
  }};

  Lexicon lex;
  for (Modality m : kPerceptModalities) {
    auto& dst = lex.synonyms[index_of(m)];
    const auto& src = words[index_of(m)];
    for (std::size_t c = 0; c < src.size(); ++c) {
      std::vector<Lexeme> row;
      for (const auto& w : src[c]) row.push_back({w, Category{m, static_cast<int>(c)}});
      dst.push_back(std::move(row));
    }
  }
  lex.auxiliary = {{"the", Category{Modality::Auxiliary, 0}},
                   {"please", Category{Modality::Auxiliary, 1}}};
  return lex;
}

std::vector<CategoryPrototype> draw_prototypes(Modality m, const ScenarioConfig& cfg, Rng& rng) {
  const int dim = cfg.dim(m);
  const double radius = cfg.separation_factor * cfg.noise_scale * std::sqrt(static_cast<double>(dim));

  constexpr int kMaxAttempts = 1'000'000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<CategoryPrototype> protos;
    for (int c = 0; c < kCategoriesPerModality; ++c) {
      FeatureVector v = rng.normal_vector(dim);
      protos.push_back({m, c, radius * v.normalized(), cfg.noise_scale});
    }
    bool separated = true;
    for (std::size_t i = 0; i < protos.size() && separated; ++i)
      for (std::size_t j = i + 1; j < protos.size() && separated; ++j)
        separated = (protos[i].mean - protos[j].mean).norm() >= radius;
    if (separated) return protos;
  }
  throw Error("could not place separated prototypes for modality " + std::string(to_string(m)));
}

Scenario generate_scenario(const ScenarioConfig& cfg, const Lexicon& lexicon, Rng& rng) {
  cfg.validate();
  Scenario sc{cfg, lexicon, {}, {}};
  for (Modality m : kPerceptModalities) sc.prototypes[index_of(m)] = draw_prototypes(m, cfg, rng);

  const LexiconSet vocabulary = lexicon.as_set();

  // Synonym choices per slot are uniform, redrawn as a whole until every
  // lexeme occurs at least once so the full vocabulary can be learned.
  struct Choice {
    bool please;
    std::array<std::size_t, 3> synonym;  // shape, color, action
  };
  std::vector<Choice> choices(kScenarioSize);
  for (;;) {
    std::array<std::vector<std::vector<int>>, 3> used;
    for (Modality m : kPerceptModalities)
      for (int c = 0; c < kCategoriesPerModality; ++c)
        used[index_of(m)].emplace_back(lexicon.of(m, c).size(), 0);
    std::size_t k = 0;
    for (int s = 0; s < kCategoriesPerModality; ++s)
      for (int c = 0; c < kCategoriesPerModality; ++c)
        for (int a = 0; a < kCategoriesPerModality; ++a, ++k) {
          Choice& ch = choices[k];
          ch.please = rng.bernoulli(cfg.please_prob);
          const std::array<int, 3> cat{s, c, a};
          for (Modality m : {Modality::Action, Modality::Color, Modality::Shape}) {
            const auto i = index_of(m);
            ch.synonym[i] = rng.uniform_int(lexicon.of(m, cat[i]).size());
            ++used[i][static_cast<std::size_t>(cat[i])][ch.synonym[i]];
          }
        }
    bool covered = true;
    for (const auto& per_modality : used)
      for (const auto& per_category : per_modality)
        for (int n : per_category) covered = covered && n > 0;
    if (covered) break;
  }

  sc.situations.reserve(kScenarioSize);
  std::size_t k = 0;
  for (int s = 0; s < kCategoriesPerModality; ++s) {
    for (int c = 0; c < kCategoriesPerModality; ++c) {
      for (int a = 0; a < kCategoriesPerModality; ++a, ++k) {
        const Choice& ch = choices[k];
        const Lexeme& action = lexicon.of(Modality::Action, a)[ch.synonym[2]];
        const Lexeme& color = lexicon.of(Modality::Color, c)[ch.synonym[1]];
        const Lexeme& shape = lexicon.of(Modality::Shape, s)[ch.synonym[0]];

        std::string sentence = ch.please ? lexicon.please().surface + " " : std::string{};
        sentence += action.surface + " " + lexicon.the().surface + " " + color.surface + " " +
                    shape.surface;

        Situation sit;
        sit.index = sc.situations.size();
        sit.tokens = tokenize(sentence, vocabulary);
        sit.truth = {s, c, a};
        for (Modality m : kPerceptModalities) {
          const auto& proto = sc.prototypes[index_of(m)][static_cast<std::size_t>(sit.truth[index_of(m)])];
          sit.features[index_of(m)] = proto.mean + cfg.noise_scale * rng.normal_vector(proto.mean.size());
        }
        sc.situations.push_back(std::move(sit));
      }
    }
  }
  return sc;
}

}  // namespace cslg
