#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "cslg/grounding.hpp"
#include "cslg/percept_sim.hpp"

using namespace cslg;

namespace {

constexpr PerceptSymbol S0{Modality::Shape, 0}, C0{Modality::Color, 0}, A0{Modality::Action, 0};

Scenario scenario(std::uint64_t seed = 0) {
  ScenarioConfig cfg;
  cfg.seed = seed;
  Rng rng(seed);
  return generate_scenario(cfg, build_lexicon(), rng);
}

LearnerConfig learner(const ScenarioConfig& cfg) { return {default_clustering(cfg), 2.0, {}}; }

std::vector<Situation> shuffled(const Scenario& sc, std::uint64_t seed) {
  Rng rng(seed);
  return shuffle_sequences(sc.situations, 1, rng)[0];
}

std::vector<std::string> words(std::initializer_list<const char*> ws) {
  return {ws.begin(), ws.end()};
}

}  // namespace

TEST_CASE("single pair") {
  CooccurrenceTables t;
  const std::array<PerceptSymbol, 1> p{S0};
  t.add_situation(words({"w"}), p);
  const auto g = ground({"w"}, t);
  CHECK(g.words.at("w") == S0);
  CHECK(g.percepts.at(S0) == "w");
}

TEST_CASE("synonyms share a percept after the release") {
  CooccurrenceTables t;
  const std::array<PerceptSymbol, 1> p{S0};
  t.add_situation(words({"w1"}), p);
  t.add_situation(words({"w2"}), p);
  const auto g = ground({"w1", "w2"}, t);
  CHECK(g.words.at("w1") == S0);
  CHECK(g.words.at("w2") == S0);
  CHECK(g.selections_before_reset == 1);
  CHECK(g.percepts.at(S0) == "w1");  // tie on count goes to the smaller word
}

TEST_CASE("ties resolve by word then percept") {
  CooccurrenceTables t;
  const PerceptSymbol p1{Modality::Shape, 1}, p2{Modality::Shape, 2};
  const std::array<PerceptSymbol, 1> a{p2}, b{p1};
  t.add_situation(words({"b"}), a);
  t.add_situation(words({"a"}), b);
  t.add_situation(words({"a"}), a);
  // a: p1=1, p2=1; b: p2=1. "a" picks first and takes the smaller percept.
  const auto g = ground({"a", "b"}, t);
  CHECK(g.word_order.front() == std::pair<std::string, PerceptSymbol>{"a", p1});
  CHECK(g.words.at("b") == p2);
}

TEST_CASE("first situation trace") {
  const auto lex = build_lexicon();
  ScenarioConfig cfg;
  Situation s;
  s.tokens = tokenize("raise the yellow pepsi", lex.as_set());
  s.truth = {0, 0, 0};
  for (Modality m : kPerceptModalities) s.features[index_of(m)] = Eigen::VectorXd::Zero(cfg.dim(m));

  const auto st = observe({}, s, learner(cfg));
  CHECK(st.auxiliary.empty());
  CHECK(st.tables.wo.at("the") == 1);
  CHECK(st.tables.max_percept_occurrence() == 1);
  // all counts are 1: order follows word asc, percept asc, then the release
  const auto g = ground({"pepsi", "raise", "the", "yellow"}, st.tables);
  const std::vector<std::pair<std::string, PerceptSymbol>> expect{
      {"pepsi", S0}, {"raise", C0}, {"the", A0}, {"yellow", S0}};
  CHECK(g.word_order == expect);
  CHECK(g.selections_before_reset == 3);
  CHECK(st.grounded_words.size() == 4);
  CHECK(st.grounded_words.at("the") == A0);
  CHECK(st.grounded_percepts.size() == 3);
}

TEST_CASE("grounding ignores the order evidence arrived in") {
  // five situations over a handful of words with many ties
  const std::vector<std::pair<std::vector<std::string>, std::array<PerceptSymbol, 3>>> data{
      {words({"a", "x", "the"}), {S0, C0, A0}},
      {words({"b", "x", "the"}), {PerceptSymbol{Modality::Shape, 1}, C0, A0}},
      {words({"a", "y", "the"}), {S0, PerceptSymbol{Modality::Color, 1}, A0}},
      {words({"c", "y"}), {PerceptSymbol{Modality::Shape, 1}, PerceptSymbol{Modality::Color, 1}, A0}},
      {words({"b", "z"}), {S0, C0, PerceptSymbol{Modality::Action, 1}}},
  };
  std::vector<std::size_t> order{0, 1, 2, 3, 4};
  const std::set<std::string> scope{"a", "b", "c", "the", "x", "y", "z"};
  std::optional<Grounding> first;
  do {
    CooccurrenceTables t;
    for (auto i : order) t.add_situation(data[i].first, data[i].second);
    const auto g = ground(scope, t);
    if (!first) {
      first = g;
      continue;
    }
    CHECK(g.words == first->words);
    CHECK(g.percepts == first->percepts);
    CHECK(g.word_order == first->word_order);
  } while (std::next_permutation(order.begin(), order.end()));
}

TEST_CASE("auxiliary threshold") {
  CooccurrenceTables t;
  const std::array<PerceptSymbol, 3> p{S0, C0, A0};
  t.add_situation(words({"the", "x"}), p);
  CHECK(detect_auxiliary(t, {}).empty());  // 1 > 2 is false

  // three more situations with fresh percepts: WO(the)=4 > 2 * max PO(=1)... PO(S0)=1
  for (int i = 1; i <= 3; ++i) {
    const std::array<PerceptSymbol, 3> q{PerceptSymbol{Modality::Shape, i},
                                         PerceptSymbol{Modality::Color, i},
                                         PerceptSymbol{Modality::Action, i}};
    t.add_situation(words({"the"}), q);
  }
  CHECK(t.max_percept_occurrence() == 1);
  CHECK(detect_auxiliary(t, {}) == std::set<std::string>{"the"});
  CHECK(detect_auxiliary(t, {}, 4.0).empty());
  // monotone: an existing member stays even below the threshold
  CHECK(detect_auxiliary(t, {"x"}, 4.0) == std::set<std::string>{"x"});
}

TEST_CASE("auxiliary counts over a whole scenario") {
  const auto sc = scenario();
  const auto cfg = learner(sc.config);
  GroundingState st;
  for (const auto& s : shuffled(sc, 1)) st = observe(std::move(st), s, cfg);
  CHECK(st.tables.wo.at("the") == 125);
  CHECK(st.tables.max_percept_occurrence() == 25);
  CHECK(st.auxiliary.contains("the"));
  for (const auto& l : sc.lexicon.content()) {
    CHECK_FALSE(st.auxiliary.contains(l.surface));
    CHECK(st.tables.wo[l.surface] <= 25);
  }
  const auto snap = snapshot_mappings(st);
  const auto counts = count_mappings(st, snap);
  CHECK(counts.correct == 45);
  CHECK(counts.wrong == 0);
}

TEST_CASE("properties along an online run") {
  const auto sc = scenario(2);
  const auto cfg = learner(sc.config);
  const auto seq = shuffled(sc, 7);
  GroundingState st;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < 60; ++i) {
    const auto prev_aux = st.auxiliary;
    st = observe(std::move(st), seq[i], cfg);
    for (const auto& t : seq[i].tokens) seen.insert(t.surface);

    // AW never shrinks and is never grounded
    CHECK(std::includes(st.auxiliary.begin(), st.auxiliary.end(), prev_aux.begin(), prev_aux.end()));
    for (const auto& w : st.auxiliary) CHECK_FALSE(st.grounded_words.contains(w));

    // coverage of words and current percepts
    for (const auto& w : seen)
      if (!st.auxiliary.contains(w)) CHECK(st.grounded_words.contains(w));
    for (const auto& labels : st.labels)
      for (const auto& p : labels) CHECK(st.grounded_percepts.contains(p));
    for (const auto& [w, p] : st.grounded_words) {
      CHECK(std::find(st.labels[index_of(p.modality)].begin(), st.labels[index_of(p.modality)].end(),
                      p) != st.labels[index_of(p.modality)].end());
    }

    // before the release every selection uses a different percept
    std::set<std::string> scope;
    for (const auto& w : seen)
      if (!st.auxiliary.contains(w)) scope.insert(w);
    const auto g = ground(scope, st.tables);
    CHECK(g.words == st.grounded_words);
    std::set<PerceptSymbol> used;
    for (std::size_t k = 0; k < g.selections_before_reset; ++k) used.insert(g.word_order[k].second);
    CHECK(used.size() == g.selections_before_reset);

    // wp and pw agree
    for (const auto& [key, n] : st.tables.wp) CHECK(st.tables.pw.at({key.second, key.first}) == n);

    // replaying history twice gives the same tables
    CHECK(rebuild_tables(st.history, st.labels, {}) == st.tables);
    CHECK(rebuild_tables(st.history, st.labels, {}) == rebuild_tables(st.history, st.labels, {}));

    // snapshot bound
    const auto c = count_mappings(st, snapshot_mappings(st));
    std::size_t content_seen = 0;
    for (const auto& w : seen) content_seen += st.vocabulary.at(w)->modality != Modality::Auxiliary;
    CHECK(static_cast<std::size_t>(c.correct + c.wrong) <= content_seen);
  }
}

TEST_CASE("fresh state has an empty snapshot") {
  GroundingState st;
  CHECK(snapshot_mappings(st).empty());
  const auto c = count_mappings(st, snapshot_mappings(st));
  CHECK(c.correct == 0);
  CHECK(c.wrong == 0);
}

TEST_CASE("a frozen state does not learn") {
  const auto sc = scenario();
  const auto cfg = learner(sc.config);
  GroundingState st;
  for (std::size_t i = 0; i < 10; ++i) st = observe(std::move(st), sc.situations[i], cfg);
  st.frozen = true;
  const auto after = observe(st, sc.situations[10], cfg);
  CHECK(after.history.size() == 10);
  CHECK(after.tables == st.tables);
  CHECK(after.grounded_words == st.grounded_words);
}

TEST_CASE("phrase substitution") {
  const std::vector<std::vector<std::string>> pp{{"lift", "up"}, {"a", "b", "c"}, {"a", "b"}};
  CHECK(substitute_phrases(words({"lift", "up", "the", "a", "b", "c", "a", "b", "x"}), pp) ==
        words({"lift up", "the", "a b c", "a b", "x"}));
  CHECK(substitute_phrases(words({"lift"}), pp) == words({"lift"}));
  CHECK(substitute_phrases(words({"q"}), {}) == words({"q"}));
}

TEST_CASE("majority label decides correctness") {
  const auto sc = scenario();
  const auto cfg = learner(sc.config);
  GroundingState st;
  for (const auto& s : sc.situations) st = observe(std::move(st), s, cfg);
  const auto majority = majority_truth(st);
  for (const auto& l : sc.lexicon.content()) CHECK(grounded_correctly(st, l, majority));
  CHECK(grounded_correctly(st, sc.lexicon.the(), majority));
  CHECK_FALSE(grounded_correctly(st, Lexeme{"unheard", Category{Modality::Shape, 0}}, majority));
  CHECK_FALSE(grounded_correctly(st, Lexeme{"soda", std::nullopt}, majority));
  // the right modality but the wrong category
  CHECK_FALSE(grounded_correctly(st, Lexeme{"soda", Category{Modality::Shape, 3}}, majority));
}
