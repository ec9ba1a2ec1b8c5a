#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace cslg {

// ---------------------------------------------------------------------------
// Errors

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownToken : Error {
  UnknownToken(std::string span, std::size_t position)
      : Error("unknown token '" + span + "' at word " + std::to_string(position)),
        span(std::move(span)),
        position(position) {}
  std::string span;
  std::size_t position;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct NumericalError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Domain types

enum class Modality : std::uint8_t { Shape = 0, Color = 1, Action = 2, Auxiliary = 3 };

inline constexpr std::array<Modality, 3> kPerceptModalities{Modality::Shape, Modality::Color,
                                                            Modality::Action};
inline constexpr std::array<Modality, 4> kAllModalities{Modality::Shape, Modality::Color,
                                                        Modality::Action, Modality::Auxiliary};

inline constexpr std::size_t index_of(Modality m) { return static_cast<std::size_t>(m); }

std::string_view to_string(Modality m);
Modality modality_from_string(std::string_view s);

/// Ground-truth category of a lexeme or percept (simulation only).
struct Category {
  Modality modality = Modality::Shape;
  int index = 0;
  auto operator<=>(const Category&) const = default;
};

/// Atomic vocabulary token. May contain spaces ("lift up"). Identity is the
/// surface text alone.
struct Lexeme {
  std::string surface;
  std::optional<Category> truth;

  bool operator==(const Lexeme& o) const { return surface == o.surface; }
  auto operator<=>(const Lexeme& o) const { return surface <=> o.surface; }
};

using FeatureVector = Eigen::VectorXd;

/// Abstract percept id: cluster id within one modality's current clustering.
struct PerceptSymbol {
  Modality modality = Modality::Shape;
  int cluster_id = 0;
  auto operator<=>(const PerceptSymbol&) const = default;
};

std::string to_string(const PerceptSymbol& p);

/// One tutor interaction.
struct Situation {
  std::size_t index = 0;  // position in the generated scenario
  std::vector<Lexeme> tokens;
  std::array<FeatureVector, 3> features;  // indexed by Modality (Shape, Color, Action)
  std::array<int, 3> truth{0, 0, 0};

  const FeatureVector& feature(Modality m) const { return features.at(index_of(m)); }
  std::string sentence() const;
};

// ---------------------------------------------------------------------------
// Tokenization

using LexiconSet = std::set<Lexeme, std::less<>>;

/// Longest-match-first segmentation of a whitespace-separated sentence into
/// lexicon entries. Throws UnknownToken on the first word run no entry covers.
std::vector<Lexeme> tokenize(std::string_view sentence, const LexiconSet& lexicon);

std::string join_surfaces(const std::vector<Lexeme>& tokens);

}  // namespace cslg
