#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cslg/core.hpp"
#include "cslg/rng.hpp"

namespace cslg {

inline constexpr int kCategoriesPerModality = 5;
inline constexpr std::size_t kScenarioSize = 125;

struct ScenarioConfig {
  std::array<int, 3> dims{8, 8, 30};  // shape, color, action (action: flattened 6x5)
  double noise_scale = 0.05;
  double separation_factor = 10.0;
  double please_prob = 0.5;
  std::uint64_t seed = 0;

  int dim(Modality m) const { return dims.at(index_of(m)); }
  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

/// Synonym lists for every (modality, category) plus the auxiliary words.
struct Lexicon {
  std::array<std::vector<std::vector<Lexeme>>, 3> synonyms;  // [modality][category]
  std::vector<Lexeme> auxiliary;                              // the, please

  const std::vector<Lexeme>& of(Modality m, int category) const {
    return synonyms.at(index_of(m)).at(static_cast<std::size_t>(category));
  }
  const Lexeme& the() const { return auxiliary.at(0); }
  const Lexeme& please() const { return auxiliary.at(1); }

  /// All lexemes in canonical order: shape, color, action categories, then auxiliaries.
  std::vector<Lexeme> all() const;
  std::vector<Lexeme> content() const;
  LexiconSet as_set() const;
};

/// The 5x5 / 5x2 / 5x2 tutoring vocabulary with auxiliaries "the" and "please".
Lexicon build_lexicon();

struct CategoryPrototype {
  Modality modality = Modality::Shape;
  int category_index = 0;
  FeatureVector mean;
  double noise_scale = 0.0;
};

struct Scenario {
  ScenarioConfig config;
  Lexicon lexicon;
  std::array<std::vector<CategoryPrototype>, 3> prototypes;
  std::vector<Situation> situations;
};

/// Prototype means on a hypersphere of radius separation*noise*sqrt(dim),
/// redrawn until every pair is at least that radius apart.
std::vector<CategoryPrototype> draw_prototypes(Modality m, const ScenarioConfig& cfg, Rng& rng);

/// One situation per (shape, color, action) triple, in lexicographic triple order.
/// Synonyms are uniform per slot, conditioned on every lexeme occurring at least once.
Scenario generate_scenario(const ScenarioConfig& cfg, const Lexicon& lexicon, Rng& rng);

/// n_sequences independent reorderings of the scenario. Any source with
/// `permutation(n)` works (Rng in production, stubs in tests).
template <typename PermutationSource>
std::vector<std::vector<Situation>> shuffle_sequences(const std::vector<Situation>& situations,
                                                      std::size_t n_sequences,
                                                      PermutationSource& rng) {
  if (n_sequences < 1) throw ConfigError("n_sequences must be >= 1");
  std::vector<std::vector<Situation>> out;
  out.reserve(n_sequences);
  for (std::size_t k = 0; k < n_sequences; ++k) {
    std::vector<Situation> seq;
    seq.reserve(situations.size());
    for (std::size_t i : rng.permutation(situations.size())) seq.push_back(situations.at(i));
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace cslg
