#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "minoseval/backends.hpp"
#include "minoseval/core.hpp"
#include "minoseval/listwise_ranking.hpp"

namespace minoseval {

// Atomic statements extracted once per sample from the reference answer;
// each becomes an NLI hypothesis.
struct KeyPointSet {
  std::vector<std::string> key_points;  // non-empty for a successful extraction
  std::string source_sample;
  std::string raw_model_text;
  bool truncated = false;  // cap applied
};

struct PerPointScore {
  std::size_t key_point_index;
  NLIVerdict verdict;
  double margin;  // p_entail - p_contradict
};

struct KeyPointScore {
  std::string response_id;
  std::vector<PerPointScore> per_point;  // one per key point, in index order
  double mean_margin = 0.0;
  double entail_sum = 0.0;       // tie-break keys
  double contradict_sum = 0.0;
};

struct KeyPointConfig {
  std::size_t key_point_cap = 20;  // truncate beyond this, with a warning
  GenerationParams gen;
};

extern const char* const kKeyPointSystemPrompt;

ChatRequest build_key_point_request(const EvalSample& sample,
                                    const std::string& model_id,
                                    const GenerationParams& gen = {});

// Numbered / bulleted lines, trimmed, exact duplicates removed. Prose with
// no list markers yields an empty vector.
std::vector<std::string> parse_key_points(const std::string& model_text);

// One extraction per sample regardless of response count. Throws
// Error(EmptyExtraction) when nothing parseable comes back — callers fall
// back to the listwise path.
KeyPointSet extract_key_points(const EvalSample& sample, ChatBackend& backend,
                               const KeyPointConfig& config = {});

// Entailment minus contradiction in [-1, 1]; premise is always the response
// text, hypothesis the key point.
double nli_margin(const CandidateResponse& response, const std::string& key_point,
                  NLIBackend& backend);

// Mean margin across all key points, per-point verdicts retained for the
// report.
KeyPointScore score_response(const CandidateResponse& response,
                             const KeyPointSet& key_points, NLIBackend& backend);

// Secondary keys for equal mean margins: higher entailment sum, lower
// contradiction sum, then input index (appended by sort_scored).
TieBreakChain nli_tiebreak_chain(const std::vector<KeyPointScore>& scores);

struct FactoidOutcome {
  Ranking ranking;
  std::optional<KeyPointSet> key_points;  // nullopt when extraction failed
  std::vector<KeyPointScore> scores;      // input order; empty on fallback
  std::vector<std::string> flags;
  std::vector<std::string> warnings;
  std::optional<ListwiseOutcome> listwise_fallback;
};

// The factoid branch: extract once, score every response, sort. On
// EmptyExtraction the sample goes through the full instance-aware listwise
// path instead, flagged "fallback-to-listwise".
FactoidOutcome rank_factoid(const EvalSample& sample, ChatBackend& chat,
                            NLIBackend& nli, uint64_t shuffle_seed,
                            const KeyPointConfig& config = {});

}  // namespace minoseval
