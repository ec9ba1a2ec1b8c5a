#include "cslg/metrics.hpp"

namespace cslg {

Metrics score_occurrences(std::span<const Situation> train, std::span<const Situation> test,
                          const std::function<bool(const Lexeme&)>& is_correct) {
  Metrics out;
  auto score_of = [&](const Lexeme& lex) -> WordScore& {
    auto [it, inserted] = out.words.try_emplace(lex.surface);
    if (inserted && lex.truth) it->second.modality = lex.truth->modality;
    return it->second;
  };
  for (const auto& s : train)
    for (const auto& tok : s.tokens) ++score_of(tok).train_count;

  std::map<std::string, bool> verdict;
  std::map<Modality, std::pair<int, int>> modality_tally;  // correct, total
  int sentences_correct = 0;
  for (const auto& s : test) {
    bool all = true;
    for (const auto& tok : s.tokens) {
      auto [it, inserted] = verdict.try_emplace(tok.surface, false);
      if (inserted) it->second = is_correct(tok);
      auto& ws = score_of(tok);
      ++ws.test_count;
      auto& tally = modality_tally[ws.modality];
      ++tally.second;
      if (it->second) {
        ++ws.correct;
        ++tally.first;
      } else {
        all = false;
      }
    }
    if (all) ++sentences_correct;
  }

  for (Modality m : kAllModalities) {
    const auto it = modality_tally.find(m);
    if (it == modality_tally.end() || it->second.second == 0)
      out.per_modality[m] = std::nullopt;
    else
      out.per_modality[m] = static_cast<double>(it->second.first) / it->second.second;
  }
  if (!test.empty()) out.sentence_accuracy = static_cast<double>(sentences_correct) / test.size();
  return out;
}

}  // namespace cslg
