#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "cslg/core.hpp"
#include "cslg/percept_sim.hpp"
#include "cslg/rng.hpp"

using namespace cslg;

namespace {

std::vector<std::string> surfaces(const std::vector<Lexeme>& v) {
  std::vector<std::string> out;
  for (const auto& l : v) out.push_back(l.surface);
  return out;
}

std::vector<std::string> words_of(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// Every way of cutting `words` into lexicon entries.
void segmentations(const std::vector<std::string>& words, std::size_t from, const LexiconSet& lex,
                   std::vector<std::string>& cur, std::vector<std::vector<std::string>>& found) {
  if (from == words.size()) {
    found.push_back(cur);
    return;
  }
  std::string span;
  for (std::size_t end = from; end < words.size(); ++end) {
    span += (end == from ? "" : " ") + words[end];
    if (lex.contains(Lexeme{span, std::nullopt})) {
      cur.push_back(span);
      segmentations(words, end + 1, lex, cur, found);
      cur.pop_back();
    }
  }
}

}  // namespace

TEST_CASE("tokenize keeps multi-word lexemes whole") {
  const auto lex = build_lexicon().as_set();
  CHECK(surfaces(tokenize("please lift up the red soda", lex)) ==
        std::vector<std::string>{"please", "lift up", "the", "red", "soda"});
  CHECK(tokenize("", lex).empty());
  CHECK(tokenize("   ", lex).empty());
}

TEST_CASE("tokenize agrees with the unique full segmentation") {
  const auto lex = build_lexicon().as_set();
  const std::string s = "drag the pinkish lord of the rings";
  std::vector<std::vector<std::string>> found;
  std::vector<std::string> cur;
  segmentations(words_of(s), 0, lex, cur, found);
  REQUIRE(found.size() == 1);
  CHECK(surfaces(tokenize(s, lex)) == found[0]);
  CHECK(found[0] == std::vector<std::string>{"drag", "the", "pinkish", "lord of the rings"});
}

TEST_CASE("tokenize carries truth categories from the lexicon") {
  const auto lex = build_lexicon().as_set();
  const auto toks = tokenize("grab the reddish coke", lex);
  REQUIRE(toks.size() == 4);
  CHECK(toks[1].truth->modality == Modality::Auxiliary);
  CHECK(toks[2].truth->modality == Modality::Color);
  CHECK(toks[3].truth->modality == Modality::Shape);
  CHECK(toks[0].truth->modality == Modality::Action);
}

TEST_CASE("tokenize rejects unknown words") {
  const auto lex = build_lexicon().as_set();
  try {
    tokenize("lift up the green soda", lex);
    FAIL("expected UnknownToken");
  } catch (const UnknownToken& e) {
    CHECK(e.span == "green");
    CHECK(e.position == 3);
  }
  // "lift" alone is not an entry, only "lift up"
  CHECK_THROWS_AS(tokenize("lift the red soda", lex), UnknownToken);
}

TEST_CASE("tokenize round-trips generated sentences") {
  const auto lexicon = build_lexicon();
  const auto set = lexicon.as_set();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ScenarioConfig cfg;
    cfg.seed = seed;
    Rng rng(seed);
    const auto sc = generate_scenario(cfg, lexicon, rng);
    for (const auto& s : sc.situations) {
      const std::string text = s.sentence();
      const auto toks = tokenize(text, set);
      CHECK(join_surfaces(toks) == text);
      CHECK(surfaces(toks) == surfaces(s.tokens));
    }
  }
}

TEST_CASE("modality names round-trip") {
  for (Modality m : kAllModalities) CHECK(modality_from_string(to_string(m)) == m);
  CHECK_THROWS(modality_from_string("smell"));
}

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);
  Rng d1 = Rng(42).derive(1), d2 = Rng(42).derive(2);
  CHECK(d1.next_u64() != d2.next_u64());
  // first xoshiro256** output after splitmix64 seeding with 0, computed by hand
  CHECK(Rng(0).next_u64() == 0x99ec5f36cb75f2b4ULL);
}

TEST_CASE("rng distributions have the right moments") {
  Rng rng(7);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0, sg = 0, sg2 = 0;
  int out_of_range = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    out_of_range += u < 0.0 || u >= 1.0;
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
    const double g = rng.gamma(0.5);
    sg += g;
    sg2 += g * g;
  }
  CHECK(out_of_range == 0);
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.01));
  // Gamma(0.5, 1): mean 0.5, variance 0.5
  CHECK(sg / n == doctest::Approx(0.5).epsilon(0.02));
  CHECK(sg2 / n - (sg / n) * (sg / n) == doctest::Approx(0.5).epsilon(0.04));

  std::array<int, 3> hits{};
  for (int i = 0; i < 30000; ++i) ++hits[rng.uniform_int(3)];
  for (int h : hits) CHECK(h == doctest::Approx(10000).epsilon(0.05));

  const auto d = rng.dirichlet(Eigen::Vector3d(0.01, 0.01, 0.01));
  CHECK(d.sum() == doctest::Approx(1.0));
  CHECK((d.array() > 0.0).all());
}

TEST_CASE("categorical_log samples proportionally") {
  Rng rng(3);
  const std::vector<double> lw{std::log(1.0), std::log(3.0), -INFINITY};
  std::array<int, 3> hits{};
  for (int i = 0; i < 40000; ++i) ++hits[rng.categorical_log(lw)];
  CHECK(hits[2] == 0);
  CHECK(static_cast<double>(hits[1]) / hits[0] == doctest::Approx(3.0).epsilon(0.05));
}
