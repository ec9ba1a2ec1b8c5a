#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cslg/core.hpp"
#include "cslg/dbscan.hpp"

namespace cslg {

/// Word/percept co-occurrence evidence. wp and pw hold the same counts keyed
/// from either side; wo counts sentence occurrences, po counts situations.
struct CooccurrenceTables {
  std::map<std::pair<std::string, PerceptSymbol>, int> wp;
  std::map<std::pair<PerceptSymbol, std::string>, int> pw;
  std::map<std::string, int> wo;
  std::map<PerceptSymbol, int> po;

  void add_situation(std::span<const std::string> words, std::span<const PerceptSymbol> percepts);
  int count(const std::string& word, const PerceptSymbol& p) const;
  int max_percept_occurrence() const;

  bool operator==(const CooccurrenceTables&) const = default;
};

/// Word-side (GW) and percept-side (GP) groundings of one pass of the greedy
/// selection, plus the Phase 1 selection trace.
struct Grounding {
  std::map<std::string, PerceptSymbol> words;
  std::map<PerceptSymbol, std::string> percepts;
  std::vector<std::pair<std::string, PerceptSymbol>> word_order;
  /// Number of Phase 1 selections made before percepts were released again.
  std::size_t selections_before_reset = 0;
};

/// Greedy synonym-aware grounding.
///
/// Phase 1 repeatedly takes the highest-count (word, percept) pair among
/// ungrounded words and unused percepts; a used percept is blocked. Once no
/// such pair remains (every percept used once), all percepts are released and
/// each remaining word takes its best pair. Phase 2 runs the same procedure from
/// the percept side. Ties: count desc, then word asc, then percept asc
/// (Phase 2: percept asc, then word asc).
Grounding ground(const std::set<std::string>& words, const CooccurrenceTables& tables);

/// Adds every word whose occurrence count exceeds factor * max(PO). Never removes.
std::set<std::string> detect_auxiliary(const CooccurrenceTables& tables,
                                       std::set<std::string> auxiliary, double factor = 2.0);

/// Merges consecutive words that form a permanent phrase into one word.
std::vector<std::string> substitute_phrases(const std::vector<std::string>& words,
                                            const std::vector<std::vector<std::string>>& phrases);

struct LearnerConfig {
  ClusteringParams clustering;
  double aux_factor = 2.0;
  std::vector<std::vector<std::string>> permanent_phrases;
};

struct HistoryEntry {
  std::vector<std::string> words;
  std::array<FeatureVector, 3> features;
  std::optional<std::array<int, 3>> truth;
};

struct GroundingState {
  CooccurrenceTables tables;
  std::set<std::string> auxiliary;                 // AW
  std::map<std::string, PerceptSymbol> grounded_words;  // GW
  std::map<PerceptSymbol, std::string> grounded_percepts;  // GP
  std::vector<HistoryEntry> history;
  std::array<std::vector<PerceptSymbol>, 3> labels;  // current clustering of history, per modality
  std::map<std::string, std::optional<Category>> vocabulary;
  bool frozen = false;
};

/// Majority truth category of each current percept symbol's member percepts.
std::map<PerceptSymbol, int> majority_truth(const GroundingState& state);

CooccurrenceTables rebuild_tables(const std::vector<HistoryEntry>& history,
                                  const std::array<std::vector<PerceptSymbol>, 3>& labels,
                                  const std::vector<std::vector<std::string>>& phrases);

/// Appends the situation, reclusters all modalities over the full history,
/// replays the history into fresh tables, updates AW and regrounds every
/// non-auxiliary word seen so far. A frozen state is returned unchanged.
GroundingState observe(GroundingState state, const Situation& situation, const LearnerConfig& cfg);

struct MappingRecord {
  std::string lexeme;
  std::optional<PerceptSymbol> percept;
  int count = 0;
  bool auxiliary = false;
  std::optional<bool> correct;
};

std::vector<MappingRecord> snapshot_mappings(const GroundingState& state);

struct MappingCounts {
  int correct = 0;
  int wrong = 0;
};

/// Correct/false content-word mappings in a snapshot. Records without truth are skipped.
MappingCounts count_mappings(const GroundingState& state, std::span<const MappingRecord> snapshot);

/// True when the learner currently grounds the lexeme correctly: auxiliary
/// lexemes must be in AW, content lexemes must map to a cluster whose
/// majority truth label is the lexeme's category.
bool grounded_correctly(const GroundingState& state, const Lexeme& lexeme,
                        const std::map<PerceptSymbol, int>& majority);

}  // namespace cslg
