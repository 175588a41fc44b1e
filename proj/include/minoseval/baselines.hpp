#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minoseval/backends.hpp"
#include "minoseval/core.hpp"
#include "minoseval/listwise_ranking.hpp"

namespace minoseval {

extern const char* const kPointwiseSystemPrompt;
extern const char* const kPairwiseSystemPrompt;
extern const char* const kPairwiseTieBreakSystemPrompt;

// Scoring dimensions named in the pointwise/pairwise prompts; configurable.
std::vector<std::string> default_dimensions();

// --- pointwise --------------------------------------------------------------

ChatRequest build_pointwise_request(const EvalSample& sample,
                                    const CandidateResponse& response,
                                    const std::vector<std::string>& dimensions,
                                    const std::string& model_id,
                                    const GenerationParams& gen = {});

// First decimal number with fractional digits in the text ("7.25", "8.1/10").
// Bare integers do not count — the prompt demands two-decimal scores.
std::optional<double> parse_pointwise_score(const std::string& text);

struct PointwiseScores {
  ScoredList scores;                   // input order
  std::vector<std::string> raw_texts;  // per response
  std::vector<std::string> warnings;   // unparseable-after-retry entries
};

// One score per response; unparseable output gets one retry, then 0.00 with
// a warning.
PointwiseScores score_pointwise(const EvalSample& sample, ChatBackend& backend,
                                const GenerationParams& gen = {},
                                const std::vector<std::string>& dimensions =
                                    default_dimensions());

struct PointwiseOutcome {
  Ranking ranking;
  PointwiseScores scores;
};

PointwiseOutcome pointwise_rank(const EvalSample& sample, ChatBackend& backend,
                                const GenerationParams& gen = {},
                                const std::vector<std::string>& dimensions =
                                    default_dimensions());

// --- pairwise ---------------------------------------------------------------

enum class PairWinner { A, B, Tie };
const char* to_string(PairWinner winner);

struct PairVerdict {
  std::string a;  // response id presented as A
  std::string b;
  PairWinner winner = PairWinner::Tie;
  std::string raw_model_text;
};

struct PairwiseOutcome {
  Ranking ranking;
  std::vector<PairVerdict> primary;        // 2 * C(n,2), deterministic order
  std::vector<PairVerdict> recomparisons;  // only for tied win rates
  std::vector<double> win_rates;           // by input index
  std::vector<std::string> warnings;
};

ChatRequest build_pairwise_request(const EvalSample& sample,
                                   const CandidateResponse& a,
                                   const CandidateResponse& b,
                                   const std::vector<std::string>& dimensions,
                                   const std::string& model_id, bool allow_tie,
                                   const GenerationParams& gen = {});

std::optional<PairWinner> parse_pair_winner(const std::string& text);

// Every unordered pair compared once in both presentation orders; rank by
// win rate. Tied win rates go through a dedicated no-tie re-comparison,
// then the head-to-head record, then input index. A failed comparison
// counts as Tie with a warning. Requires n >= 2.
PairwiseOutcome pairwise_rank(const EvalSample& sample, ChatBackend& backend,
                              const GenerationParams& gen = {},
                              const std::vector<std::string>& dimensions =
                                  default_dimensions());

// --- naive listwise ---------------------------------------------------------

// Same contract as the non-factoid ranker, with no instances in the prompt.
ListwiseOutcome naive_listwise_rank(const EvalSample& sample, ChatBackend& backend,
                                    uint64_t shuffle_seed,
                                    const GenerationParams& gen = {});

// --- token-overlap metrics --------------------------------------------------

// Unicode-whitespace split, lowercased; per-codepoint tokens when the text
// has no whitespace and at least half its codepoints are CJK.
std::vector<std::string> metric_tokens(std::string_view text);

// LCS F-measure over token sequences. Empty text scores 0.
double rouge_l(std::string_view candidate, std::string_view reference);

// Geometric mean of clipped n-gram precisions (n=1..4, add-1 smoothing on
// zero-match orders) times the brevity penalty. Empty candidate scores 0.
double bleu(std::string_view candidate, std::string_view reference);

struct TokenOverlapOutcome {
  Ranking ranking;
  ScoredList scores;
};

// provenance must be Bleu or RougeL; scores each response against the first
// reference answer.
TokenOverlapOutcome token_overlap_rank(const EvalSample& sample,
                                       Provenance provenance);

}  // namespace minoseval
