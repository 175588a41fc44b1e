#pragma once

// Synthetic datasets plus matching chat-mock scripts, shared by the runner
// tests and the acceptance suite. Every rule keys on a prompt marker all
// builders embed (system prompt fragment) plus sample-unique text, so the
// scripted backend is deterministic under any call interleaving.

#include <algorithm>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "minoseval/backends.hpp"
#include "minoseval/baselines.hpp"
#include "minoseval/core.hpp"
#include "minoseval/dataset.hpp"
#include "minoseval/fact_detection.hpp"
#include "minoseval/keypoint_scoring.hpp"
#include "minoseval/listwise_ranking.hpp"
#include "test_support.hpp"

namespace fixtures {

// Stable fragments of each builder's system prompt, for mock matching.
inline const char* kClassifyMarker = "question-type analyst";
inline const char* kKeyPointMarker = "extract key points";
inline const char* kInstanceMarker = "silver example answers";
inline const char* kListwiseMarker = "ranking candidate answers";
inline const char* kPointwiseMarker = "scoring one candidate answer";
inline const char* kPairwiseMarker = "comparing two candidate answers";
inline const char* kPairwiseTieMarker = "previously judged equally good";

struct FixtureOptions {
  std::size_t min_responses = 2;
  std::size_t max_responses = 4;
  bool with_gold = true;
  bool with_kinds = true;
  // sabotage switches for fallback-path coverage
  bool malformed_key_points = false;
  bool malformed_permutations = false;
};

struct Fixture {
  std::vector<minoseval::EvalSample> samples;
  nlohmann::json chat_script;

  void write(const std::filesystem::path& dir) const {
    minoseval::write_dataset(dir / "dataset.jsonl", samples);
    testsupport::write_file(dir / "chat_script.json", chat_script.dump(2));
  }
};

inline std::string rotated_permutation_line(std::size_t n, std::size_t shift) {
  std::string line;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) line += ",";
    line += std::to_string((i + shift) % n);
  }
  return line;
}

inline Fixture make_fixture(std::size_t n_samples, uint64_t seed,
                            const FixtureOptions& opts = {}) {
  using nlohmann::json;
  Fixture fx;
  std::mt19937_64 rng(seed);
  json rules = json::array();

  for (std::size_t s = 0; s < n_samples; ++s) {
    const std::string id = "s" + std::to_string(s + 1);
    const std::size_t n =
        opts.min_responses +
        (opts.max_responses > opts.min_responses
             ? rng() % (opts.max_responses - opts.min_responses + 1)
             : 0);
    minoseval::EvalSample sample = testsupport::make_sample(id, n);
    sample.question = "Synthetic question " + id + " about topic " +
                      std::to_string(rng() % 1000) + "?";
    sample.reference_answers = {"Alpha fact of " + id + ". Beta fact of " + id +
                                ". Gamma fact of " + id + "."};
    for (std::size_t i = 0; i < n; ++i) {
      sample.responses[i].text = "Answer " + id + "-" + std::to_string(i + 1) +
                                 " mentions alpha fact of " + id + ".";
    }
    if (opts.with_kinds) {
      sample.kind = (s % 2 == 0) ? minoseval::QuestionKind::Factoid
                                 : minoseval::QuestionKind::NonFactoid;
    }
    if (opts.with_gold) {
      std::vector<std::string> gold = sample.response_ids();
      std::rotate(gold.begin(), gold.begin() + (s % n), gold.end());
      sample.gold_ranking = gold;
    }

    const std::string q_needle = "Question: " + sample.question;

    rules.push_back({{"system_contains", kClassifyMarker},
                     {"user_contains", json::array({q_needle})},
                     {"response", sample.kind && *sample.kind ==
                                          minoseval::QuestionKind::Factoid
                                      ? "factoid"
                                      : "non-factoid"}});

    if (opts.malformed_key_points) {
      rules.push_back({{"system_contains", kKeyPointMarker},
                       {"user_contains", json::array({q_needle})},
                       {"response", "The answer covers several things worth noting "
                                    "but I will not enumerate them."}});
    } else {
      rules.push_back({{"system_contains", kKeyPointMarker},
                       {"user_contains", json::array({q_needle})},
                       {"response", "1. Alpha fact of " + id + ".\n2. Beta fact of " +
                                        id + ".\n3. Gamma fact of " + id + "."}});
    }

    std::string levels;
    for (int level = 1; level <= 5; ++level) {
      levels += "Level " + std::to_string(level) + ": quality-" +
                std::to_string(level) + " answer for " + id + ".\n";
    }
    rules.push_back({{"system_contains", kInstanceMarker},
                     {"user_contains", json::array({q_needle})},
                     {"response", levels}});

    rules.push_back({{"system_contains", kListwiseMarker},
                     {"user_contains", json::array({q_needle})},
                     {"response", opts.malformed_permutations
                                      ? "I would rather not provide indices."
                                      : rotated_permutation_line(n, s % n)}});

    for (std::size_t i = 0; i < n; ++i) {
      const double score = 9.0 - static_cast<double>((i + s) % n) -
                           static_cast<double>(s % 7) / 100.0;
      char buffer[16];
      std::snprintf(buffer, sizeof(buffer), "%.2f", score);
      rules.push_back(
          {{"system_contains", kPointwiseMarker},
           {"user_contains",
            json::array({q_needle, "Candidate response:\n" + sample.responses[i].text})},
           {"response", std::string(buffer)}});
    }

    fx.samples.push_back(std::move(sample));
  }

  // Pairwise: a global always-A rule keeps the fixture small; win rates all
  // tie at 0.5, which drives the re-comparison chain on purpose.
  rules.push_back({{"system_contains", kPairwiseMarker}, {"response", "A"}});
  rules.push_back({{"system_contains", kPairwiseTieMarker}, {"response", "A"}});

  fx.chat_script = {{"rules", rules}, {"default_response", ""}};
  return fx;
}

}  // namespace fixtures
