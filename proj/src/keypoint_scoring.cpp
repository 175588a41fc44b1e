#include "minoseval/keypoint_scoring.hpp"

#include <cctype>
#include <unordered_map>
#include <unordered_set>

#include "minoseval/text.hpp"

namespace minoseval {

const char* const kKeyPointSystemPrompt =
    "You extract key points from a reference answer so each can be checked "
    "against candidate answers. List every atomic statement the reference "
    "answer commits to, one per line, as a numbered list (1., 2., ...). Each "
    "key point must be a single self-contained statement; never merge "
    "independent facts into one item. Output only the list.";

ChatRequest build_key_point_request(const EvalSample& sample,
                                    const std::string& model_id,
                                    const GenerationParams& gen) {
  ChatRequest req;
  req.system_prompt = kKeyPointSystemPrompt;
  req.user_prompt = "Question: " + sample.question +
                    "\nReference answer: " + sample.reference_answer() +
                    "\nList the key points now.";
  req.model_id = model_id;
  req.temperature = gen.temperature;
  req.seed = gen.seed;
  req.max_tokens = gen.max_tokens;
  return req;
}

namespace {

// "1. text" / "2) text" / "(3) text" / "- text" / "* text" / "• text"
std::optional<std::string> strip_list_marker(const std::string& line) {
  std::size_t i = 0;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  if (i >= line.size()) return std::nullopt;

  if (line[i] == '-' || line[i] == '*') {
    return line.substr(i + 1);
  }
  if (line.compare(i, 3, "\xE2\x80\xA2") == 0) {  // U+2022 bullet
    return line.substr(i + 3);
  }
  bool parenthesized = false;
  if (line[i] == '(') {
    parenthesized = true;
    ++i;
  }
  if (i >= line.size() || !std::isdigit(static_cast<unsigned char>(line[i]))) {
    return std::nullopt;
  }
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i >= line.size()) return std::nullopt;
  if (parenthesized) {
    if (line[i] != ')') return std::nullopt;
    return line.substr(i + 1);
  }
  if (line[i] != '.' && line[i] != ')' && line[i] != ':') return std::nullopt;
  return line.substr(i + 1);
}

}  // namespace

std::vector<std::string> parse_key_points(const std::string& model_text) {
  std::vector<std::string> points;
  std::unordered_set<std::string> seen;
  for (const auto& line : split_lines(model_text)) {
    const auto body = strip_list_marker(line);
    if (!body) continue;
    const std::string point = trim(*body);
    if (point.empty()) continue;
    if (seen.insert(point).second) points.push_back(point);
  }
  return points;
}

KeyPointSet extract_key_points(const EvalSample& sample, ChatBackend& backend,
                               const KeyPointConfig& config) {
  const ChatRequest req =
      build_key_point_request(sample, backend.model_id(), config.gen);
  const ChatResponse res = backend.complete(req);

  KeyPointSet set;
  set.source_sample = sample.id;
  set.raw_model_text = res.text;
  set.key_points = parse_key_points(res.text);
  if (set.key_points.empty()) {
    throw Error(ErrorCode::EmptyExtraction,
                "no parseable key points for sample '" + sample.id + "'");
  }
  if (set.key_points.size() > config.key_point_cap) {
    set.key_points.resize(config.key_point_cap);
    set.truncated = true;
  }
  return set;
}

double nli_margin(const CandidateResponse& response, const std::string& key_point,
                  NLIBackend& backend) {
  const NLIVerdict v = backend.probabilities(response.text, key_point);
  return v.p_entail - v.p_contradict;
}

KeyPointScore score_response(const CandidateResponse& response,
                             const KeyPointSet& key_points, NLIBackend& backend) {
  KeyPointScore score;
  score.response_id = response.response_id;
  double margin_sum = 0.0;
  for (std::size_t j = 0; j < key_points.key_points.size(); ++j) {
    const NLIVerdict v =
        backend.probabilities(response.text, key_points.key_points[j]);
    const double margin = v.p_entail - v.p_contradict;
    score.per_point.push_back({j, v, margin});
    margin_sum += margin;
    score.entail_sum += v.p_entail;
    score.contradict_sum += v.p_contradict;
  }
  score.mean_margin = margin_sum / static_cast<double>(key_points.key_points.size());
  return score;
}

TieBreakChain nli_tiebreak_chain(const std::vector<KeyPointScore>& scores) {
  std::unordered_map<std::string, double> entail;
  std::unordered_map<std::string, double> contradict;
  for (const auto& s : scores) {
    entail[s.response_id] = s.entail_sum;
    contradict[s.response_id] = s.contradict_sum;
  }
  TieBreakChain chain;
  chain.rules.push_back(
      {"entailment-sum", [entail](const std::string& id) { return entail.at(id); }});
  chain.rules.push_back({"contradiction-sum",
                         [contradict](const std::string& id) {
                           return contradict.at(id);
                         },
                         /*ascending=*/true});
  return chain;
}

FactoidOutcome rank_factoid(const EvalSample& sample, ChatBackend& chat,
                            NLIBackend& nli, uint64_t shuffle_seed,
                            const KeyPointConfig& config) {
  FactoidOutcome out;
  try {
    out.key_points = extract_key_points(sample, chat, config);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyExtraction) throw;
    // Hand the sample to the general-purpose branch, instances and all.
    InstanceGenOutcome instances =
        generate_silver_instances(sample, chat, config.gen);
    out.listwise_fallback = rank_nonfactoid(sample, instances.instances, chat,
                                            shuffle_seed, config.gen);
    out.flags.push_back("fallback-to-listwise");
    for (const auto& w : instances.warnings) out.warnings.push_back(w);
    for (const auto& f : out.listwise_fallback->flags) out.flags.push_back(f);
    for (const auto& w : out.listwise_fallback->warnings) out.warnings.push_back(w);
    out.ranking = out.listwise_fallback->ranking;
    return out;
  }
  if (out.key_points->truncated) {
    out.warnings.push_back("key-points-truncated-to-" +
                           std::to_string(config.key_point_cap));
  }

  ScoredList scored;
  scored.score_kind = ScoreKind::NLIKeyPoint;
  for (const auto& response : sample.responses) {
    out.scores.push_back(score_response(response, *out.key_points, nli));
    scored.entries.push_back({response.response_id, out.scores.back().mean_margin});
  }

  out.ranking = sort_scored(scored, nli_tiebreak_chain(out.scores), sample,
                            Provenance::KeyPointScoring);
  return out;
}

}  // namespace minoseval
