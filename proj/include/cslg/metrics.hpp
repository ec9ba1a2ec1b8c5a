#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cslg/core.hpp"
#include "cslg/grounding.hpp"

namespace cslg {

struct WordScore {
  Modality modality = Modality::Shape;
  int train_count = 0;
  int test_count = 0;
  int total_count = 0;  // occurrences in the whole sequence
  int correct = 0;

  /// correct / test_count, absent when the word never occurs in the test set.
  std::optional<double> accuracy() const {
    if (test_count == 0) return std::nullopt;
    return static_cast<double>(correct) / test_count;
  }
};

struct Metrics {
  std::string model;
  std::uint64_t seed = 0;
  std::size_t sequence = 0;
  double train_fraction = 1.0;

  std::map<std::string, WordScore> words;
  std::map<Modality, std::optional<double>> per_modality;
  std::optional<double> sentence_accuracy;
  /// Correct/false content mappings after each training observation (CSL only).
  std::optional<std::vector<MappingCounts>> trajectory;
  /// Words the model treats as auxiliary at the end of training.
  std::set<std::string> auxiliary;
};

/// Occurrence-weighted scoring shared by both models. `is_correct` decides
/// whether the trained model grounds a lexeme correctly; it is evaluated per
/// test occurrence.
Metrics score_occurrences(std::span<const Situation> train, std::span<const Situation> test,
                          const std::function<bool(const Lexeme&)>& is_correct);

}  // namespace cslg
