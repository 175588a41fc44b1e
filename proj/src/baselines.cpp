#include "minoseval/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

#include "minoseval/text.hpp"

namespace minoseval {

const char* const kPointwiseSystemPrompt =
    "You are scoring one candidate answer to an open-ended question against "
    "the reference answer. Judge it on the listed dimensions and give one "
    "overall score from 0 to 10. Output only the final score, with exactly "
    "two decimal places (for example 7.25), on the last line.";

const char* const kPairwiseSystemPrompt =
    "You are comparing two candidate answers (A and B) to an open-ended "
    "question against the reference answer, on the listed dimensions. Output "
    "exactly one token on the last line: A if response A is better, B if "
    "response B is better, or TIE if they are equally good.";

const char* const kPairwiseTieBreakSystemPrompt =
    "Two candidate answers to an open-ended question were previously judged "
    "equally good. Compare them once more against the reference answer, and "
    "this time you must pick a winner; TIE is not allowed. Output exactly A "
    "or B on the last line.";

std::vector<std::string> default_dimensions() {
  return {"Fluency", "Truthfulness"};
}

namespace {

std::string join_dimensions(const std::vector<std::string>& dims) {
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += ", ";
    out += dims[i];
  }
  return out;
}

}  // namespace

// --- pointwise --------------------------------------------------------------

ChatRequest build_pointwise_request(const EvalSample& sample,
                                    const CandidateResponse& response,
                                    const std::vector<std::string>& dimensions,
                                    const std::string& model_id,
                                    const GenerationParams& gen) {
  ChatRequest req;
  req.system_prompt = kPointwiseSystemPrompt;
  req.user_prompt = "Dimensions: " + join_dimensions(dimensions) +
                    "\nQuestion: " + sample.question +
                    "\nReference answer: " + sample.reference_answer() +
                    "\nCandidate response:\n" + response.text +
                    "\nScore the candidate now.";
  req.model_id = model_id;
  req.temperature = gen.temperature;
  req.seed = gen.seed;
  req.max_tokens = gen.max_tokens;
  return req;
}

std::optional<double> parse_pointwise_score(const std::string& text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) continue;
    if (i > 0 && std::isdigit(static_cast<unsigned char>(text[i - 1]))) continue;
    std::size_t j = i;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    if (j < text.size() && text[j] == '.' && j + 1 < text.size() &&
        std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
      std::size_t k = j + 1;
      while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
      return std::stod(text.substr(i, k - i));
    }
    i = j;
  }
  return std::nullopt;
}

PointwiseScores score_pointwise(const EvalSample& sample, ChatBackend& backend,
                                const GenerationParams& gen,
                                const std::vector<std::string>& dimensions) {
  PointwiseScores out;
  out.scores.score_kind = ScoreKind::Pointwise;
  for (const auto& response : sample.responses) {
    const ChatRequest req =
        build_pointwise_request(sample, response, dimensions, backend.model_id(), gen);
    double score = 0.0;
    std::string raw;
    bool parsed_ok = false;
    for (int attempt = 0; attempt < 2 && !parsed_ok; ++attempt) {
      const ChatResponse res = backend.complete(req);
      raw = res.text;
      if (auto value = parse_pointwise_score(res.text)) {
        score = *value;
        parsed_ok = true;
      }
    }
    if (!parsed_ok) {
      out.warnings.push_back("unparseable-score:" + response.response_id);
    }
    out.scores.entries.push_back({response.response_id, score});
    out.raw_texts.push_back(raw);
  }
  return out;
}

PointwiseOutcome pointwise_rank(const EvalSample& sample, ChatBackend& backend,
                                const GenerationParams& gen,
                                const std::vector<std::string>& dimensions) {
  PointwiseOutcome out;
  out.scores = score_pointwise(sample, backend, gen, dimensions);
  out.ranking = sort_scored(out.scores.scores, TieBreakChain::input_index_only(),
                            sample, Provenance::Pointwise);
  return out;
}

// --- pairwise ---------------------------------------------------------------

const char* to_string(PairWinner winner) {
  switch (winner) {
    case PairWinner::A: return "A";
    case PairWinner::B: return "B";
    case PairWinner::Tie: return "tie";
  }
  return "unknown";
}

ChatRequest build_pairwise_request(const EvalSample& sample,
                                   const CandidateResponse& a,
                                   const CandidateResponse& b,
                                   const std::vector<std::string>& dimensions,
                                   const std::string& model_id, bool allow_tie,
                                   const GenerationParams& gen) {
  ChatRequest req;
  req.system_prompt = allow_tie ? kPairwiseSystemPrompt : kPairwiseTieBreakSystemPrompt;
  req.user_prompt = "Dimensions: " + join_dimensions(dimensions) +
                    "\nQuestion: " + sample.question +
                    "\nReference answer: " + sample.reference_answer() +
                    "\nResponse A:\n" + a.text + "\nResponse B:\n" + b.text +
                    "\nWhich response is better?";
  req.model_id = model_id;
  req.temperature = gen.temperature;
  req.seed = gen.seed;
  req.max_tokens = gen.max_tokens;
  return req;
}

std::optional<PairWinner> parse_pair_winner(const std::string& text) {
  std::string last;
  for (const auto& line : split_lines(text)) {
    const std::string t = trim(line);
    if (!t.empty()) last = t;
  }
  std::string token = ascii_lower(last);
  while (!token.empty() && (token.back() == '.' || token.back() == '!')) {
    token.pop_back();
  }
  if (token == "a") return PairWinner::A;
  if (token == "b") return PairWinner::B;
  if (token == "tie") return PairWinner::Tie;
  // the verdict buried in prose: accept only an unambiguous "tie"
  if (contains_ci(text, "tie")) return PairWinner::Tie;
  return std::nullopt;
}

PairwiseOutcome pairwise_rank(const EvalSample& sample, ChatBackend& backend,
                              const GenerationParams& gen,
                              const std::vector<std::string>& dimensions) {
  const std::size_t n = sample.responses.size();
  if (n < 2) {
    throw Error(ErrorCode::NotEnoughItems, "pairwise ranking needs at least 2 responses");
  }

  PairwiseOutcome out;
  std::vector<double> wins(n, 0.0);
  // head-to-head wins from the primary round, wins[i][j] = times i beat j
  std::vector<std::vector<int>> beat(n, std::vector<int>(n, 0));

  const auto compare = [&](std::size_t first, std::size_t second,
                           bool allow_tie) -> PairVerdict {
    const auto& ra = sample.responses[first];
    const auto& rb = sample.responses[second];
    PairVerdict verdict;
    verdict.a = ra.response_id;
    verdict.b = rb.response_id;
    try {
      const ChatRequest req = build_pairwise_request(
          sample, ra, rb, dimensions, backend.model_id(), allow_tie, gen);
      const ChatResponse res = backend.complete(req);
      verdict.raw_model_text = res.text;
      if (auto winner = parse_pair_winner(res.text)) {
        verdict.winner = *winner;
      } else {
        verdict.winner = PairWinner::Tie;
        out.warnings.push_back("unparseable-comparison:" + ra.response_id + "," +
                               rb.response_id);
      }
    } catch (const Error& e) {
      verdict.winner = PairWinner::Tie;
      out.warnings.push_back("comparison-failed:" + ra.response_id + "," +
                             rb.response_id + ": " + e.what());
    }
    return verdict;
  };

  // primary round: both presentation orders per unordered pair
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (const auto& [first, second] :
           {std::pair<std::size_t, std::size_t>{i, j}, {j, i}}) {
        PairVerdict verdict = compare(first, second, /*allow_tie=*/true);
        if (verdict.winner == PairWinner::A) {
          wins[first] += 1.0;
          ++beat[first][second];
        } else if (verdict.winner == PairWinner::B) {
          wins[second] += 1.0;
          ++beat[second][first];
        }
        out.primary.push_back(std::move(verdict));
      }
    }
  }

  const double comparisons = 2.0 * static_cast<double>(n - 1);
  out.win_rates.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.win_rates[i] = wins[i] / comparisons;

  // Tie groups by exact win rate; within a group, re-compare each pair once
  // with the no-tie prompt, then fall to the group-internal head-to-head
  // record, then input index. Reducing to per-member win counts keeps the
  // comparator a total order even for groups larger than two.
  std::vector<double> recomp_wins(n, 0.0);
  std::vector<double> h2h_wins(n, 0.0);
  std::vector<bool> grouped(n, false);
  for (std::size_t lead = 0; lead < n; ++lead) {
    if (grouped[lead]) continue;
    std::vector<std::size_t> members{lead};
    for (std::size_t j = lead + 1; j < n; ++j) {
      if (!grouped[j] && out.win_rates[j] == out.win_rates[lead]) members.push_back(j);
    }
    for (std::size_t m : members) grouped[m] = true;
    if (members.size() < 2) continue;
    for (std::size_t gi = 0; gi < members.size(); ++gi) {
      for (std::size_t gj = gi + 1; gj < members.size(); ++gj) {
        const std::size_t i = members[gi];
        const std::size_t j = members[gj];
        PairVerdict verdict = compare(i, j, /*allow_tie=*/false);
        if (verdict.winner == PairWinner::A) {
          recomp_wins[i] += 1.0;
        } else if (verdict.winner == PairWinner::B) {
          recomp_wins[j] += 1.0;
        }
        out.recomparisons.push_back(std::move(verdict));
        h2h_wins[i] += beat[i][j];
        h2h_wins[j] += beat[j][i];
      }
    }
  }

  std::unordered_map<std::string, double> recomp_by_id;
  std::unordered_map<std::string, double> h2h_by_id;
  ScoredList scored;
  scored.score_kind = ScoreKind::WinRate;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = sample.responses[i].response_id;
    recomp_by_id[id] = recomp_wins[i];
    h2h_by_id[id] = h2h_wins[i];
    scored.entries.push_back({id, out.win_rates[i]});
  }

  TieBreakChain chain;
  chain.rules.push_back(
      {"re-comparison", [recomp_by_id](const std::string& id) {
         return recomp_by_id.at(id);
       }});
  chain.rules.push_back(
      {"head-to-head", [h2h_by_id](const std::string& id) {
         return h2h_by_id.at(id);
       }});

  out.ranking = sort_scored(scored, chain, sample, Provenance::Pairwise);
  return out;
}

// --- naive listwise ---------------------------------------------------------

ListwiseOutcome naive_listwise_rank(const EvalSample& sample, ChatBackend& backend,
                                    uint64_t shuffle_seed,
                                    const GenerationParams& gen) {
  return rank_listwise(sample, nullptr, backend, shuffle_seed,
                       Provenance::NaiveListwise, gen);
}

// --- token-overlap metrics --------------------------------------------------

std::vector<std::string> metric_tokens(std::string_view text) {
  const std::vector<uint32_t> cps = decode_utf8(text);
  if (cps.empty()) return {};

  bool has_space = false;
  std::size_t cjk = 0;
  for (uint32_t cp : cps) {
    if (is_unicode_space(cp)) has_space = true;
    if (is_cjk(cp)) ++cjk;
  }

  std::vector<std::string> tokens;
  if (!has_space && cjk * 2 >= cps.size()) {
    tokens.reserve(cps.size());
    for (uint32_t cp : cps) {
      std::string t;
      append_utf8(t, cp);
      tokens.push_back(std::move(t));
    }
    return tokens;
  }

  std::string current;
  for (uint32_t cp : cps) {
    if (is_unicode_space(cp)) {
      if (!current.empty()) tokens.push_back(ascii_lower(current));
      current.clear();
    } else {
      append_utf8(current, cp);
    }
  }
  if (!current.empty()) tokens.push_back(ascii_lower(current));
  return tokens;
}

namespace {

std::size_t lcs_length(const std::vector<std::string>& a,
                       const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> curr(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      curr[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                     : std::max(prev[j], curr[j - 1]);
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

std::unordered_map<std::string, int> ngram_counts(
    const std::vector<std::string>& tokens, std::size_t order) {
  std::unordered_map<std::string, int> counts;
  if (tokens.size() < order) return counts;
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < order; ++k) {
      if (k) key += '\x1f';
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

double rouge_l(std::string_view candidate, std::string_view reference) {
  const auto cand = metric_tokens(candidate);
  const auto ref = metric_tokens(reference);
  if (cand.empty() || ref.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_length(cand, ref));
  const double precision = lcs / static_cast<double>(cand.size());
  const double recall = lcs / static_cast<double>(ref.size());
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double bleu(std::string_view candidate, std::string_view reference) {
  const auto cand = metric_tokens(candidate);
  const auto ref = metric_tokens(reference);
  if (cand.empty()) return 0.0;

  double log_sum = 0.0;
  for (std::size_t order = 1; order <= 4; ++order) {
    const auto cand_counts = ngram_counts(cand, order);
    const auto ref_counts = ngram_counts(ref, order);
    long long total = 0;
    long long matched = 0;
    for (const auto& [gram, count] : cand_counts) {
      total += count;
      const auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(count, it->second);
    }
    const double p = matched > 0
                         ? static_cast<double>(matched) / static_cast<double>(total)
                         : static_cast<double>(matched + 1) /
                               static_cast<double>(total + 1);
    log_sum += std::log(p);
  }
  const double geo_mean = std::exp(log_sum / 4.0);
  const double bp = std::exp(std::min(
      0.0, 1.0 - static_cast<double>(ref.size()) / static_cast<double>(cand.size())));
  return bp * geo_mean;
}

TokenOverlapOutcome token_overlap_rank(const EvalSample& sample,
                                       Provenance provenance) {
  if (provenance != Provenance::Bleu && provenance != Provenance::RougeL) {
    throw Error(ErrorCode::Config, "token_overlap_rank requires bleu or rouge-l");
  }
  TokenOverlapOutcome out;
  out.scores.score_kind = ScoreKind::TokenOverlap;
  for (const auto& response : sample.responses) {
    const double score = provenance == Provenance::Bleu
                             ? bleu(response.text, sample.reference_answer())
                             : rouge_l(response.text, sample.reference_answer());
    out.scores.entries.push_back({response.response_id, score});
  }
  out.ranking = sort_scored(out.scores, TieBreakChain::input_index_only(), sample,
                            provenance);
  return out;
}

}  // namespace minoseval
