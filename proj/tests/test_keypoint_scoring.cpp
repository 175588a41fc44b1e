#include <doctest.h>

#include <random>

#include "minoseval/keypoint_scoring.hpp"
#include "test_support.hpp"

using namespace minoseval;
using testsupport::make_sample;

TEST_CASE("key point parsing handles list shapes and dedups") {
  CHECK(parse_key_points("1. Li Hua is walking on the street\n2. Huang is running around") ==
        std::vector<std::string>{"Li Hua is walking on the street",
                                 "Huang is running around"});
  CHECK(parse_key_points("1. A\n2. A\n3. B") == std::vector<std::string>{"A", "B"});
  CHECK(parse_key_points("- first\n* second\n(3) third\n4) fourth\n5: fifth") ==
        std::vector<std::string>{"first", "second", "third", "fourth", "fifth"});
  CHECK(parse_key_points("Here are some points:\n1. real one").size() == 1);
  CHECK(parse_key_points("prose with no list markers at all").empty());
  CHECK(parse_key_points("").empty());
}

TEST_CASE("extraction caps and flags oversized lists") {
  std::string text;
  for (int i = 1; i <= 25; ++i) {
    text += std::to_string(i) + ". point number " + std::to_string(i) + "\n";
  }
  std::vector<ChatScriptRule> rules{{"", {}, {text}}};
  auto backend = std::make_shared<ScriptedChatBackend>(rules, "");
  const auto sample = make_sample("s1", 2);

  const KeyPointSet set = extract_key_points(sample, *backend);
  CHECK(set.key_points.size() == 20);
  CHECK(set.truncated);
  CHECK(set.source_sample == "s1");

  KeyPointConfig small;
  small.key_point_cap = 3;
  CHECK(extract_key_points(sample, *backend, small).key_points.size() == 3);
}

TEST_CASE("empty extraction throws for the caller to handle") {
  auto backend = std::make_shared<ScriptedChatBackend>(
      std::vector<ChatScriptRule>{}, "nothing list-like in here");
  const auto sample = make_sample("s1", 2);
  try {
    extract_key_points(sample, *backend);
    FAIL("expected EmptyExtraction");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyExtraction);
  }
}

TEST_CASE("nli margin is entailment minus contradiction") {
  const auto sample = make_sample("s1", 1);
  std::vector<NliScriptRule> rules;
  rules.push_back({"", "max-entail", 1.0, 0.0, 0.0});
  rules.push_back({"", "max-contra", 0.0, 0.0, 1.0});
  rules.push_back({"", "mixed", 0.9, 0.05, 0.05});
  ScriptedNliBackend nli(rules);

  CHECK(nli_margin(sample.responses[0], "max-entail", nli) == doctest::Approx(1.0));
  CHECK(nli_margin(sample.responses[0], "max-contra", nli) == doctest::Approx(-1.0));
  CHECK(nli_margin(sample.responses[0], "mixed", nli) ==
        doctest::Approx(0.85).epsilon(1e-12));
}

TEST_CASE("score_response averages margins and keeps per-point detail") {
  const auto sample = make_sample("s1", 1);
  KeyPointSet set;
  set.key_points = {"point-a", "point-b"};

  std::vector<NliScriptRule> rules;
  rules.push_back({"", "point-a", 0.9, 0.05, 0.05});   // margin 0.85
  rules.push_back({"", "point-b", 0.25, 0.1, 0.65});   // margin -0.40
  ScriptedNliBackend nli(rules);

  const KeyPointScore score = score_response(sample.responses[0], set, nli);
  CHECK(score.mean_margin == doctest::Approx(0.225).epsilon(1e-12));
  REQUIRE(score.per_point.size() == 2);
  CHECK(score.per_point[0].margin == doctest::Approx(0.85).epsilon(1e-12));
  CHECK(score.per_point[1].margin == doctest::Approx(-0.40).epsilon(1e-12));
  CHECK(score.entail_sum == doctest::Approx(1.15).epsilon(1e-12));
  CHECK(score.contradict_sum == doctest::Approx(0.70).epsilon(1e-12));

  KeyPointSet single;
  single.key_points = {"point-a"};
  CHECK(score_response(sample.responses[0], single, nli).mean_margin ==
        doctest::Approx(0.85).epsilon(1e-12));

  std::vector<NliScriptRule> zero{{"", "", 0.0, 1.0, 0.0}};
  ScriptedNliBackend neutral(zero);
  CHECK(score_response(sample.responses[0], set, neutral).mean_margin ==
        doctest::Approx(0.0));
}

TEST_CASE("rank_factoid composes extraction, scoring and sorting") {
  auto sample = make_sample("s1", 2);
  std::vector<ChatScriptRule> chat_rules{
      {"extract key points", {}, {"1. key point one\n2. key point two"}}};
  auto chat = std::make_shared<ScriptedChatBackend>(chat_rules, "");

  std::vector<NliScriptRule> nli_rules;
  nli_rules.push_back({sample.responses[0].text, "", 0.5, 0.225, 0.275});  // 0.225
  nli_rules.push_back({sample.responses[1].text, "", 0.9, 0.1, 0.0});      // 0.9
  ScriptedNliBackend nli(nli_rules);

  const FactoidOutcome outcome = rank_factoid(sample, *chat, nli, 42);
  CHECK(outcome.ranking.order == std::vector<std::string>{"r2", "r1"});
  CHECK(outcome.ranking.provenance == Provenance::KeyPointScoring);
  CHECK(outcome.flags.empty());
  REQUIRE(outcome.scores.size() == 2);
  CHECK(outcome.scores[0].mean_margin == doctest::Approx(0.225).epsilon(1e-12));
  CHECK(outcome.scores[1].mean_margin == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(chat->call_count() == 1);  // extraction happens once for 2 responses
}

TEST_CASE("extraction runs once however many responses there are") {
  auto sample = make_sample("s1", 5);
  std::vector<ChatScriptRule> chat_rules{{"extract key points", {}, {"1. a\n2. b"}}};
  auto chat = std::make_shared<ScriptedChatBackend>(chat_rules, "");
  ScriptedNliBackend nli;
  rank_factoid(sample, *chat, nli, 42);
  CHECK(chat->call_count() == 1);
}

TEST_CASE("equal means fall to the entailment-sum rule and the trace says so") {
  auto sample = make_sample("s1", 2);
  std::vector<ChatScriptRule> chat_rules{{"extract key points", {}, {"1. only point"}}};
  auto chat = std::make_shared<ScriptedChatBackend>(chat_rules, "");

  // same margin 0.5 (exact binary fractions), different entailment mass
  std::vector<NliScriptRule> nli_rules;
  nli_rules.push_back({sample.responses[0].text, "", 0.5, 0.5, 0.0});
  nli_rules.push_back({sample.responses[1].text, "", 0.75, 0.0, 0.25});
  ScriptedNliBackend nli(nli_rules);

  const FactoidOutcome outcome = rank_factoid(sample, *chat, nli, 42);
  CHECK(outcome.ranking.order == std::vector<std::string>{"r2", "r1"});
  REQUIRE(outcome.ranking.tiebreak_trace.size() == 1);
  CHECK(outcome.ranking.tiebreak_trace[0].rule == "entailment-sum");
}

TEST_CASE("failed extraction falls back to the listwise path") {
  auto sample = make_sample("s1", 3);
  std::vector<ChatScriptRule> chat_rules;
  chat_rules.push_back({"extract key points", {}, {"no list here, sorry"}});
  chat_rules.push_back({"silver example answers",
                        {},
                        {"Level 1: bad\nLevel 2: meh\nLevel 3: ok\nLevel 4: good\n"
                         "Level 5: great"}});
  chat_rules.push_back({"ranking candidate answers", {}, {"0,1,2"}});
  auto chat = std::make_shared<ScriptedChatBackend>(chat_rules, "");
  ScriptedNliBackend nli;

  const FactoidOutcome outcome = rank_factoid(sample, *chat, nli, 42);
  CHECK_FALSE(outcome.key_points.has_value());
  REQUIRE(outcome.listwise_fallback.has_value());
  CHECK(outcome.ranking.provenance == Provenance::InstanceListwise);
  CHECK(is_permutation_of(outcome.ranking.order, sample));
  REQUIRE(!outcome.flags.empty());
  CHECK(outcome.flags[0] == "fallback-to-listwise");
}

TEST_CASE("mean margin properties over random fixtures") {
  std::mt19937_64 rng(11);
  const auto sample = make_sample("s1", 1);
  for (int iter = 0; iter < 30; ++iter) {
    const std::size_t m = 1 + rng() % 6;
    KeyPointSet set;
    std::vector<NliScriptRule> rules;
    for (std::size_t j = 0; j < m; ++j) {
      const std::string kp = "kp-" + std::to_string(iter) + "-" + std::to_string(j);
      set.key_points.push_back(kp);
      const double e = static_cast<double>(rng() % 1000) / 999.0;
      const double c = (1.0 - e) * static_cast<double>(rng() % 1000) / 999.0;
      rules.push_back({"", kp, e, 1.0 - e - c, c});
    }
    ScriptedNliBackend nli(rules);
    const KeyPointScore base = score_response(sample.responses[0], set, nli);

    CHECK(base.mean_margin >= -1.0);
    CHECK(base.mean_margin <= 1.0);

    // permutation invariance in key-point order
    KeyPointSet reversed = set;
    std::reverse(reversed.key_points.begin(), reversed.key_points.end());
    ScriptedNliBackend nli2(rules);
    CHECK(score_response(sample.responses[0], reversed, nli2).mean_margin ==
          doctest::Approx(base.mean_margin).epsilon(1e-12));

    // adding a key point whose margin equals the mean leaves it unchanged
    KeyPointSet extended = set;
    const std::string extra = "kp-extra-" + std::to_string(iter);
    extended.key_points.push_back(extra);
    auto rules3 = rules;
    const double mean = base.mean_margin;
    rules3.push_back({"", extra, (1.0 + mean) / 2.0, 0.0, (1.0 - mean) / 2.0});
    ScriptedNliBackend nli3(rules3);
    CHECK(score_response(sample.responses[0], extended, nli3).mean_margin ==
          doctest::Approx(base.mean_margin).epsilon(1e-9));

    // raising one verdict's entailment (same contradiction) raises the mean
    auto rules4 = rules;
    bool raised = false;
    for (auto& rule : rules4) {
      const double headroom = 1.0 - rule.entailment - rule.contradiction;
      if (headroom > 1e-6) {
        rule.entailment += headroom / 2.0;
        rule.neutral -= headroom / 2.0;
        raised = true;
        break;
      }
    }
    if (raised) {
      ScriptedNliBackend nli4(rules4);
      CHECK(score_response(sample.responses[0], set, nli4).mean_margin >
            base.mean_margin);
    }
  }
}
