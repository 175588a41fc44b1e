#include "minoseval/core.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "minoseval/text.hpp"

namespace minoseval {

const char* const kInputIndexRule = "input-index";

const char* to_string(QuestionKind kind) {
  return kind == QuestionKind::Factoid ? "factoid" : "non-factoid";
}

std::optional<QuestionKind> question_kind_from_string(std::string_view text) {
  const std::string t = ascii_lower(trim(text));
  if (t == "non-factoid" || t == "non factoid" || t == "nonfactoid") {
    return QuestionKind::NonFactoid;
  }
  if (t == "factoid") return QuestionKind::Factoid;
  return std::nullopt;
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::KeyPointScoring: return "key-point-scoring";
    case Provenance::InstanceListwise: return "instance-listwise";
    case Provenance::Pointwise: return "pointwise";
    case Provenance::Pairwise: return "pairwise";
    case Provenance::NaiveListwise: return "listwise";
    case Provenance::Bleu: return "bleu";
    case Provenance::RougeL: return "rouge-l";
  }
  return "unknown";
}

std::vector<std::string> EvalSample::response_ids() const {
  std::vector<std::string> ids;
  ids.reserve(responses.size());
  for (const auto& r : responses) ids.push_back(r.response_id);
  return ids;
}

std::optional<std::size_t> EvalSample::response_index(
    std::string_view response_id) const {
  for (std::size_t i = 0; i < responses.size(); ++i) {
    if (responses[i].response_id == response_id) return i;
  }
  return std::nullopt;
}

void validate_sample(const EvalSample& sample) {
  if (sample.id.empty()) {
    throw Error(ErrorCode::SchemaViolation, "sample id must be non-empty");
  }
  if (sample.reference_answers.empty()) {
    throw Error(ErrorCode::SchemaViolation,
                "sample '" + sample.id + "' has no reference answer");
  }
  if (sample.responses.empty()) {
    throw Error(ErrorCode::SchemaViolation,
                "sample '" + sample.id + "' has no responses");
  }
  std::unordered_set<std::string> seen;
  for (const auto& r : sample.responses) {
    if (r.response_id.empty()) {
      throw Error(ErrorCode::SchemaViolation,
                  "sample '" + sample.id + "' has a response with empty id");
    }
    if (!seen.insert(r.response_id).second) {
      throw Error(ErrorCode::SchemaViolation,
                  "sample '" + sample.id + "' has duplicate response id '" +
                      r.response_id + "'");
    }
    if (r.text.empty() && !r.empty_text_ok) {
      throw Error(ErrorCode::SchemaViolation,
                  "sample '" + sample.id + "' response '" + r.response_id +
                      "' has empty text without the empty-text flag");
    }
  }
  if (sample.gold_ranking && !is_permutation_of(*sample.gold_ranking, sample)) {
    throw Error(ErrorCode::SchemaViolation,
                "sample '" + sample.id +
                    "' gold_ranking is not a permutation of its response ids");
  }
}

bool is_permutation_of(const std::vector<std::string>& order,
                       const EvalSample& sample) {
  if (order.size() != sample.responses.size()) return false;
  std::unordered_set<std::string> seen;
  for (const auto& id : order) {
    if (!sample.response_index(id)) return false;
    if (!seen.insert(id).second) return false;
  }
  return true;
}

TieBreakChain TieBreakChain::input_index_only() { return TieBreakChain{}; }

Ranking make_ranking(std::vector<std::string> order, const EvalSample& sample,
                     Provenance provenance) {
  std::unordered_set<std::string> seen;
  for (const auto& id : order) {
    if (!sample.response_index(id)) {
      throw Error(ErrorCode::UnknownId, "'" + id + "' is not a response id of sample '" +
                                            sample.id + "'");
    }
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::DuplicateId, "'" + id + "' appears more than once");
    }
  }
  for (const auto& r : sample.responses) {
    if (!seen.count(r.response_id)) {
      throw Error(ErrorCode::MissingId, "'" + r.response_id + "' is absent from the order");
    }
  }
  return Ranking{std::move(order), provenance, {}};
}

Ranking sort_scored(const ScoredList& scores, const TieBreakChain& tiebreak,
                    const EvalSample& sample, Provenance provenance) {
  std::unordered_map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < sample.responses.size(); ++i) {
    index_of.emplace(sample.responses[i].response_id, i);
  }

  std::unordered_set<std::string> covered;
  for (const auto& e : scores.entries) {
    if (!index_of.count(e.response_id)) {
      throw Error(ErrorCode::IncompleteScores,
                  "score for unknown id '" + e.response_id + "'");
    }
    if (!covered.insert(e.response_id).second) {
      throw Error(ErrorCode::IncompleteScores,
                  "duplicate score for id '" + e.response_id + "'");
    }
    if (!std::isfinite(e.score)) {
      throw Error(ErrorCode::InvalidScore,
                  "non-finite score for id '" + e.response_id + "'");
    }
  }
  for (const auto& r : sample.responses) {
    if (!covered.count(r.response_id)) {
      throw Error(ErrorCode::IncompleteScores,
                  "no score for id '" + r.response_id + "'");
    }
  }

  // Terminal input-index rule guarantees a strict total order; the caller's
  // rules are only ever consulted on exact primary-score ties.
  std::vector<TieBreakChain::Rule> rules = tiebreak.rules;
  if (rules.empty() || rules.back().name != kInputIndexRule) {
    rules.push_back({kInputIndexRule,
                     [&index_of](const std::string& id) {
                       return static_cast<double>(index_of.at(id));
                     },
                     /*ascending=*/true});
  }

  std::vector<const ScoredList::Entry*> sorted;
  sorted.reserve(scores.entries.size());
  for (const auto& e : scores.entries) sorted.push_back(&e);

  std::sort(sorted.begin(), sorted.end(),
            [&rules](const ScoredList::Entry* a, const ScoredList::Entry* b) {
              if (a->score != b->score) return a->score > b->score;
              for (const auto& rule : rules) {
                const double ka = rule.key(a->response_id);
                const double kb = rule.key(b->response_id);
                if (ka != kb) return rule.ascending ? ka < kb : ka > kb;
              }
              return false;
            });

  Ranking ranking;
  ranking.provenance = provenance;
  ranking.order.reserve(sorted.size());
  for (const auto* e : sorted) ranking.order.push_back(e->response_id);

  // Re-derive, per adjacent equal-score pair, which rule decided it.
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i - 1]->score != sorted[i]->score) continue;
    for (const auto& rule : rules) {
      const double ka = rule.key(sorted[i - 1]->response_id);
      const double kb = rule.key(sorted[i]->response_id);
      if (ka != kb) {
        ranking.tiebreak_trace.push_back({i, rule.name});
        break;
      }
    }
  }
  return ranking;
}

}  // namespace minoseval
