#include "cslg/core.hpp"

#include <sstream>

namespace cslg {

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::Shape:
      return "shape";
    case Modality::Color:
      return "color";
    case Modality::Action:
      return "action";
    case Modality::Auxiliary:
      return "auxiliary";
  }
  return "?";
}

Modality modality_from_string(std::string_view s) {
  for (Modality m : kAllModalities)
    if (to_string(m) == s) return m;
  throw ConfigError("unknown modality '" + std::string(s) + "'");
}

std::string to_string(const PerceptSymbol& p) {
  return std::string(to_string(p.modality)) + ":" + std::to_string(p.cluster_id);
}

std::string Situation::sentence() const { return join_surfaces(tokens); }

std::string join_surfaces(const std::vector<Lexeme>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.surface;
  }
  return out;
}

namespace {

std::vector<std::string> split_words(std::string_view sentence) {
  std::vector<std::string> words;
  std::istringstream in{std::string(sentence)};
  for (std::string w; in >> w;) words.push_back(std::move(w));
  return words;
}

}  // namespace

std::vector<Lexeme> tokenize(std::string_view sentence, const LexiconSet& lexicon) {
  const auto words = split_words(sentence);

  std::size_t longest = 1;
  for (const auto& lex : lexicon) longest = std::max(longest, split_words(lex.surface).size());

  std::vector<Lexeme> out;
  for (std::size_t i = 0; i < words.size();) {
    bool matched = false;
    for (std::size_t len = std::min(longest, words.size() - i); len >= 1; --len) {
      std::string candidate = words[i];
      for (std::size_t k = 1; k < len; ++k) candidate += ' ' + words[i + k];
      if (auto it = lexicon.find(Lexeme{candidate, std::nullopt}); it != lexicon.end()) {
        out.push_back(*it);
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) throw UnknownToken(words[i], i);
  }
  return out;
}

}  // namespace cslg
