#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minoseval/errors.hpp"

namespace minoseval {

enum class QuestionKind { Factoid, NonFactoid };

const char* to_string(QuestionKind kind);
std::optional<QuestionKind> question_kind_from_string(std::string_view text);

struct CandidateResponse {
  std::string response_id;
  std::string model_name;
  std::string text;
  bool empty_text_ok = false;  // empty text is a schema violation unless flagged
};

// A question, its reference answer(s), and the candidate responses to rank.
// Immutable after construction; shared freely across worker threads.
struct EvalSample {
  std::string id;
  std::string question;
  std::vector<std::string> reference_answers;  // pipeline uses the first
  std::vector<CandidateResponse> responses;
  std::optional<std::vector<std::string>> gold_ranking;
  std::optional<QuestionKind> kind;

  const std::string& reference_answer() const { return reference_answers.front(); }
  std::vector<std::string> response_ids() const;
  std::optional<std::size_t> response_index(std::string_view response_id) const;
};

// Throws Error(SchemaViolation) naming the offending field/id.
void validate_sample(const EvalSample& sample);

// The pipeline branch that emitted a ranking. Internal fallbacks keep the
// owning branch and record the path in per-sample flags instead.
enum class Provenance {
  KeyPointScoring,
  InstanceListwise,
  Pointwise,
  Pairwise,
  NaiveListwise,
  Bleu,
  RougeL,
};

const char* to_string(Provenance p);

struct TieBreakRecord {
  std::size_t position;  // 0-based position in `order` of the element the rule placed
  std::string rule;
};

// Strict total order over a sample's response ids: a permutation by
// construction, ties unrepresentable.
struct Ranking {
  std::vector<std::string> order;  // best first
  Provenance provenance;
  std::vector<TieBreakRecord> tiebreak_trace;
};

enum class ScoreKind { NLIKeyPoint, Pointwise, WinRate, TokenOverlap };

struct ScoredList {
  struct Entry {
    std::string response_id;
    double score;
  };
  std::vector<Entry> entries;
  ScoreKind score_kind = ScoreKind::Pointwise;
};

// Ordered secondary keys consulted only when primary scores are exactly
// equal (bitwise double comparison — backends are deterministic or cached,
// so an epsilon band would only blur reproducibility). sort_scored appends
// a terminal "input-index" rule, so every chain yields a total order.
struct TieBreakChain {
  struct Rule {
    std::string name;
    std::function<double(const std::string& response_id)> key;
    bool ascending = false;
  };
  std::vector<Rule> rules;

  static TieBreakChain input_index_only();
};

extern const char* const kInputIndexRule;

// Validates that `order` is a permutation of the sample's response ids.
// Errors: UnknownId, DuplicateId, MissingId — each names the offending id.
Ranking make_ranking(std::vector<std::string> order, const EvalSample& sample,
                     Provenance provenance);

// Descending by score; exact ties resolved by the chain and recorded in
// tiebreak_trace. Deterministic: identical inputs produce identical
// rankings on every platform.
// Errors: IncompleteScores (coverage mismatch), InvalidScore (non-finite).
Ranking sort_scored(const ScoredList& scores, const TieBreakChain& tiebreak,
                    const EvalSample& sample, Provenance provenance);

bool is_permutation_of(const std::vector<std::string>& order,
                       const EvalSample& sample);

}  // namespace minoseval
