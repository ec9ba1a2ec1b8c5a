#include "cslg/grounding.hpp"

#include <algorithm>
#include <tuple>

namespace cslg {

void CooccurrenceTables::add_situation(std::span<const std::string> words,
                                       std::span<const PerceptSymbol> percepts) {
  for (const auto& w : words) ++wo[w];
  for (const auto& p : percepts) ++po[p];
  const std::set<std::string> distinct(words.begin(), words.end());
  for (const auto& w : distinct) {
    for (const auto& p : percepts) {
      ++wp[{w, p}];
      ++pw[{p, w}];
    }
  }
}

int CooccurrenceTables::count(const std::string& word, const PerceptSymbol& p) const {
  auto it = wp.find({word, p});
  return it == wp.end() ? 0 : it->second;
}

int CooccurrenceTables::max_percept_occurrence() const {
  int hi = 0;
  for (const auto& [p, n] : po) hi = std::max(hi, n);
  return hi;
}

namespace {

// Greedy selection shared by both phases. `Pairs` are (count, key, value) with
// key the side being grounded.
template <typename Key, typename Value>
struct GreedyResult {
  std::map<Key, Value> chosen;
  std::vector<std::pair<Key, Value>> order;
  std::size_t before_reset = 0;
};

template <typename Key, typename Value>
GreedyResult<Key, Value> greedy(std::vector<std::tuple<int, Key, Value>> pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
    return std::get<2>(a) < std::get<2>(b);
  });

  GreedyResult<Key, Value> out;
  std::set<Value> used;
  bool restricted = true;
  for (;;) {
    const auto it = std::find_if(pairs.begin(), pairs.end(), [&](const auto& t) {
      return !out.chosen.contains(std::get<1>(t)) &&
             (!restricted || !used.contains(std::get<2>(t)));
    });
    if (it == pairs.end()) {
      if (!restricted) break;
      restricted = false;
      out.before_reset = out.order.size();
      continue;
    }
    const auto& [n, key, value] = *it;
    out.chosen.emplace(key, value);
    out.order.emplace_back(key, value);
    if (restricted) used.insert(value);
  }
  if (restricted) out.before_reset = out.order.size();
  return out;
}

}  // namespace

Grounding ground(const std::set<std::string>& words, const CooccurrenceTables& tables) {
  std::vector<std::tuple<int, std::string, PerceptSymbol>> word_pairs;
  for (const auto& [key, n] : tables.wp)
    if (n > 0 && words.contains(key.first)) word_pairs.emplace_back(n, key.first, key.second);

  std::vector<std::tuple<int, PerceptSymbol, std::string>> percept_pairs;
  for (const auto& [key, n] : tables.pw)
    if (n > 0 && words.contains(key.second)) percept_pairs.emplace_back(n, key.first, key.second);

  auto phase1 = greedy(std::move(word_pairs));
  auto phase2 = greedy(std::move(percept_pairs));

  Grounding g;
  g.words = std::move(phase1.chosen);
  g.word_order = std::move(phase1.order);
  g.selections_before_reset = phase1.before_reset;
  g.percepts = std::move(phase2.chosen);
  return g;
}

std::set<std::string> detect_auxiliary(const CooccurrenceTables& tables,
                                       std::set<std::string> auxiliary, double factor) {
  const double threshold = factor * tables.max_percept_occurrence();
  for (const auto& [w, n] : tables.wo)
    if (n > threshold) auxiliary.insert(w);
  return auxiliary;
}

std::vector<std::string> substitute_phrases(const std::vector<std::string>& words,
                                            const std::vector<std::vector<std::string>>& phrases) {
  if (phrases.empty()) return words;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < words.size();) {
    const std::vector<std::string>* best = nullptr;
    for (const auto& ph : phrases) {
      if (ph.empty() || i + ph.size() > words.size()) continue;
      if (!std::equal(ph.begin(), ph.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) continue;
      if (!best || ph.size() > best->size()) best = &ph;
    }
    if (best && best->size() > 1) {
      std::string joined = (*best)[0];
      for (std::size_t k = 1; k < best->size(); ++k) joined += ' ' + (*best)[k];
      out.push_back(std::move(joined));
      i += best->size();
    } else {
      out.push_back(words[i++]);
    }
  }
  return out;
}

CooccurrenceTables rebuild_tables(const std::vector<HistoryEntry>& history,
                                  const std::array<std::vector<PerceptSymbol>, 3>& labels,
                                  const std::vector<std::vector<std::string>>& phrases) {
  CooccurrenceTables t;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const std::array<PerceptSymbol, 3> percepts{labels[0].at(i), labels[1].at(i), labels[2].at(i)};
    const auto words = substitute_phrases(history[i].words, phrases);
    t.add_situation(words, percepts);
  }
  return t;
}

std::map<PerceptSymbol, int> majority_truth(const GroundingState& state) {
  std::map<PerceptSymbol, std::map<int, int>> votes;
  for (std::size_t i = 0; i < state.history.size(); ++i) {
    const auto& truth = state.history[i].truth;
    if (!truth) continue;
    for (Modality m : kPerceptModalities)
      ++votes[state.labels[index_of(m)].at(i)][(*truth)[index_of(m)]];
  }
  std::map<PerceptSymbol, int> out;
  for (const auto& [p, tally] : votes) {
    auto best = std::max_element(tally.begin(), tally.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
    out.emplace(p, best->first);
  }
  return out;
}

GroundingState observe(GroundingState state, const Situation& situation, const LearnerConfig& cfg) {
  if (state.frozen) return state;

  HistoryEntry entry;
  for (const auto& tok : situation.tokens) {
    entry.words.push_back(tok.surface);
    state.vocabulary.emplace(tok.surface, tok.truth);
  }
  entry.features = situation.features;
  entry.truth = situation.truth;
  state.history.push_back(std::move(entry));

  for (Modality m : kPerceptModalities) {
    std::vector<FeatureVector> column;
    column.reserve(state.history.size());
    for (const auto& h : state.history) column.push_back(h.features[index_of(m)]);
    state.labels[index_of(m)] = recluster_all(m, column, cfg.clustering[m]);
  }

  state.tables = rebuild_tables(state.history, state.labels, cfg.permanent_phrases);
  state.auxiliary = detect_auxiliary(state.tables, std::move(state.auxiliary), cfg.aux_factor);

  std::set<std::string> scope;
  for (const auto& [w, n] : state.tables.wo)
    if (!state.auxiliary.contains(w)) scope.insert(w);

  auto g = ground(scope, state.tables);
  state.grounded_words = std::move(g.words);
  state.grounded_percepts = std::move(g.percepts);
  return state;
}

std::vector<MappingRecord> snapshot_mappings(const GroundingState& state) {
  const auto majority = majority_truth(state);
  std::vector<MappingRecord> out;
  for (const auto& [word, truth] : state.vocabulary) {
    MappingRecord r;
    r.lexeme = word;
    r.auxiliary = state.auxiliary.contains(word);
    if (!r.auxiliary) {
      auto it = state.grounded_words.find(word);
      if (it == state.grounded_words.end()) continue;
      r.percept = it->second;
      r.count = state.tables.count(word, it->second);
    }
    if (truth) r.correct = grounded_correctly(state, Lexeme{word, truth}, majority);
    out.push_back(std::move(r));
  }
  return out;
}

MappingCounts count_mappings(const GroundingState& state, std::span<const MappingRecord> snapshot) {
  MappingCounts c;
  for (const auto& r : snapshot) {
    const auto it = state.vocabulary.find(r.lexeme);
    if (it == state.vocabulary.end() || !it->second || !r.correct) continue;
    if (it->second->modality == Modality::Auxiliary) continue;
    if (*r.correct)
      ++c.correct;
    else
      ++c.wrong;
  }
  return c;
}

bool grounded_correctly(const GroundingState& state, const Lexeme& lexeme,
                        const std::map<PerceptSymbol, int>& majority) {
  if (!lexeme.truth) return false;
  if (lexeme.truth->modality == Modality::Auxiliary) return state.auxiliary.contains(lexeme.surface);
  if (state.auxiliary.contains(lexeme.surface)) return false;
  const auto it = state.grounded_words.find(lexeme.surface);
  if (it == state.grounded_words.end()) return false;
  const PerceptSymbol& p = it->second;
  if (p.modality != lexeme.truth->modality) return false;
  const auto m = majority.find(p);
  return m != majority.end() && m->second == lexeme.truth->index;
}

}  // namespace cslg
