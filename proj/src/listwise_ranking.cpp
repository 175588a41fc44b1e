#include "minoseval/listwise_ranking.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <unordered_set>

#include "minoseval/baselines.hpp"
#include "minoseval/text.hpp"

namespace minoseval {

const char* const kInstanceSystemPrompt =
    "You write silver example answers at five quality levels, used later to "
    "grade candidate answers to the same question. Produce five answers "
    "labelled Level 1 through Level 5, where Level 5 is the best possible "
    "answer and Level 1 the worst plausible one. Start each on its own line "
    "as 'Level <k>: <answer>'. Output nothing else.";

const char* const kListwiseSystemPrompt =
    "You are ranking candidate answers to an open-ended question. Study the "
    "question, the reference answer, the graded example answers when given, "
    "and every candidate response, then order the candidates from best to "
    "worst. Output one line only: the zero-based candidate indices, "
    "comma-separated, best first. Every index must appear exactly once.";

const char* to_string(RepairKind repair) {
  switch (repair) {
    case RepairKind::None: return "none";
    case RepairKind::Reparsed: return "reparsed";
    case RepairKind::Retried: return "retried";
    case RepairKind::Fallback: return "fallback";
  }
  return "unknown";
}

ChatRequest build_instance_request(const EvalSample& sample,
                                   const std::string& model_id,
                                   const GenerationParams& gen) {
  ChatRequest req;
  req.system_prompt = kInstanceSystemPrompt;
  req.user_prompt = "Question: " + sample.question +
                    "\nReference answer: " + sample.reference_answer() +
                    "\nWrite the five levels now.";
  req.model_id = model_id;
  req.temperature = gen.temperature;
  req.seed = gen.seed;
  req.max_tokens = gen.max_tokens;
  return req;
}

namespace {

// Matches "Level 3:", "[Level 3]", "L3:", "level 3 -" etc. at the start of a
// line; returns the level and the remainder of the line.
std::optional<std::pair<int, std::string>> match_level_marker(const std::string& line) {
  std::size_t i = 0;
  const auto skip_ws = [&] {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  };
  skip_ws();
  bool bracketed = false;
  if (i < line.size() && line[i] == '[') {
    bracketed = true;
    ++i;
    skip_ws();
  }
  const std::string low = ascii_lower(line.substr(i));
  std::size_t adv = 0;
  if (low.rfind("level", 0) == 0) {
    adv = 5;
  } else if (!low.empty() && low[0] == 'l' && low.size() > 1 &&
             std::isdigit(static_cast<unsigned char>(low[1]))) {
    adv = 1;
  } else {
    return std::nullopt;
  }
  i += adv;
  skip_ws();
  if (i >= line.size() || line[i] < '1' || line[i] > '5') return std::nullopt;
  const int level = line[i] - '0';
  ++i;
  skip_ws();
  // optional parenthetical like "(best)"
  if (i < line.size() && line[i] == '(') {
    const auto close = line.find(')', i);
    if (close == std::string::npos) return std::nullopt;
    i = close + 1;
    skip_ws();
  }
  if (bracketed) {
    if (i >= line.size() || line[i] != ']') return std::nullopt;
    ++i;
    skip_ws();
  }
  if (i < line.size() && (line[i] == ':' || line[i] == '.' || line[i] == '-')) {
    ++i;
  } else if (!bracketed) {
    return std::nullopt;
  }
  return std::make_pair(level, trim(line.substr(i)));
}

}  // namespace

SilverInstanceSet parse_silver_instances(const std::string& model_text) {
  std::vector<SilverInstance> found;
  int current = -1;
  for (const auto& line : split_lines(model_text)) {
    if (auto marker = match_level_marker(line)) {
      found.push_back({marker->first, marker->second});
      current = static_cast<int>(found.size()) - 1;
      continue;
    }
    if (current >= 0 && !trim(line).empty()) {
      // continuation of the current level's answer
      if (!found[current].text.empty()) found[current].text += "\n";
      found[current].text += trim(line);
    }
  }

  if (found.size() != 5) {
    throw Error(ErrorCode::MalformedInstances,
                "expected 5 levels, found " + std::to_string(found.size()));
  }
  std::unordered_set<int> levels;
  for (const auto& inst : found) {
    if (!levels.insert(inst.level).second) {
      throw Error(ErrorCode::MalformedInstances,
                  "level " + std::to_string(inst.level) + " appears twice");
    }
    if (inst.text.empty()) {
      throw Error(ErrorCode::MalformedInstances,
                  "level " + std::to_string(inst.level) + " has empty text");
    }
  }
  std::sort(found.begin(), found.end(),
            [](const SilverInstance& a, const SilverInstance& b) {
              return a.level < b.level;
            });
  return SilverInstanceSet{std::move(found), model_text};
}

InstanceGenOutcome generate_silver_instances(const EvalSample& sample,
                                             ChatBackend& backend,
                                             const GenerationParams& gen) {
  const ChatRequest req = build_instance_request(sample, backend.model_id(), gen);
  InstanceGenOutcome out;
  for (int attempt = 0; attempt < 2; ++attempt) {
    ++out.attempts;
    const ChatResponse res = backend.complete(req);
    try {
      out.instances = parse_silver_instances(res.text);
      return out;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MalformedInstances) throw;
      out.warnings.push_back(std::string("malformed-instances: ") + e.what());
    }
  }
  out.warnings.push_back("instances-dropped-after-retry");
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> shuffled_indices(std::size_t n, uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

uint64_t listwise_shuffle_seed(uint64_t global_seed, const std::string& sample_id) {
  return global_seed ^ fnv1a64(sample_id);
}

namespace {

std::optional<std::vector<std::size_t>> integers_as_permutation(
    const std::vector<long long>& values, std::size_t n) {
  if (values.size() != n) return std::nullopt;
  const auto as_perm = [&](long long offset) -> std::optional<std::vector<std::size_t>> {
    std::vector<std::size_t> order;
    std::vector<bool> seen(n, false);
    for (long long v : values) {
      const long long z = v - offset;
      if (z < 0 || z >= static_cast<long long>(n)) return std::nullopt;
      if (seen[static_cast<std::size_t>(z)]) return std::nullopt;
      seen[static_cast<std::size_t>(z)] = true;
      order.push_back(static_cast<std::size_t>(z));
    }
    return order;
  };
  if (auto zero_based = as_perm(0)) return zero_based;
  // 1-based output detected by range
  if (n > 0) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == 1 && *hi == static_cast<long long>(n)) return as_perm(1);
  }
  return std::nullopt;
}

std::vector<long long> extract_integers(const std::string& s) {
  std::vector<long long> values;
  std::size_t i = 0;
  while (i < s.size()) {
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      values.push_back(std::stoll(s.substr(i, j - i)));
      i = j;
    } else {
      ++i;
    }
  }
  return values;
}

bool is_strict_index_line(const std::string& line) {
  bool any_digit = false;
  for (char c : line) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      any_digit = true;
    } else if (c != ',' && c != ' ' && c != '\t') {
      return false;
    }
  }
  return any_digit;
}

}  // namespace

std::optional<PermutationParse> parse_permutation(const std::string& text,
                                                  std::size_t n) {
  const auto lines = split_lines(text);

  // Strict: the last non-empty line, digits and commas only, zero-based.
  std::string last;
  for (const auto& line : lines) {
    const std::string t = trim(line);
    if (!t.empty()) last = t;
  }
  if (is_strict_index_line(last)) {
    const auto values = extract_integers(last);
    if (values.size() == n) {
      std::vector<std::size_t> order;
      std::vector<bool> seen(n, false);
      bool ok = true;
      for (long long v : values) {
        if (v < 0 || v >= static_cast<long long>(n) || seen[static_cast<std::size_t>(v)]) {
          ok = false;
          break;
        }
        seen[static_cast<std::size_t>(v)] = true;
        order.push_back(static_cast<std::size_t>(v));
      }
      if (ok) return PermutationParse{std::move(order), false};
    }
  }

  // Lenient: scan lines bottom-up (bracketed lists, 1-based sequences),
  // then the whole text at once.
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    if (trim(*it).empty()) continue;
    if (auto order = integers_as_permutation(extract_integers(*it), n)) {
      return PermutationParse{std::move(*order), true};
    }
  }
  if (auto order = integers_as_permutation(extract_integers(text), n)) {
    return PermutationParse{std::move(*order), true};
  }
  return std::nullopt;
}

ChatRequest build_listwise_request(const EvalSample& sample,
                                   const SilverInstanceSet* instances,
                                   const std::vector<std::size_t>& presented,
                                   const std::string& model_id,
                                   const GenerationParams& gen) {
  std::string user = "Question: " + sample.question +
                     "\nReference answer: " + sample.reference_answer() + "\n";
  if (instances) {
    user += "\nGraded example answers:\n";
    for (auto it = instances->instances.rbegin(); it != instances->instances.rend();
         ++it) {
      user += "Level " + std::to_string(it->level) +
              (it->level == 5 ? " (best)" : it->level == 1 ? " (worst)" : "") + ": " +
              it->text + "\n";
    }
  }
  user += "\nCandidates:\n";
  for (std::size_t slot = 0; slot < presented.size(); ++slot) {
    user += "[" + std::to_string(slot) + "] " +
            sample.responses[presented[slot]].text + "\n";
  }
  user += "\nRank all " + std::to_string(presented.size()) + " candidates now.";

  ChatRequest req;
  req.system_prompt = kListwiseSystemPrompt;
  req.user_prompt = std::move(user);
  req.model_id = model_id;
  req.temperature = gen.temperature;
  req.seed = gen.seed;
  req.max_tokens = gen.max_tokens;
  return req;
}

namespace {

std::vector<std::string> map_presented_to_ids(
    const EvalSample& sample, const std::vector<std::size_t>& presented,
    const std::vector<std::size_t>& presented_order) {
  std::vector<std::string> ids;
  ids.reserve(presented_order.size());
  for (std::size_t slot : presented_order) {
    ids.push_back(sample.responses[presented[slot]].response_id);
  }
  return ids;
}

}  // namespace

ListwiseOutcome rank_listwise(const EvalSample& sample,
                              const SilverInstanceSet* instances,
                              ChatBackend& backend, uint64_t shuffle_seed,
                              Provenance provenance,
                              const GenerationParams& gen) {
  const std::size_t n = sample.responses.size();
  ListwiseOutcome out;

  if (n == 1) {
    out.ranking = make_ranking({sample.responses[0].response_id}, sample, provenance);
    out.presented_order = {0};
    return out;
  }

  out.presented_order = shuffled_indices(n, shuffle_seed);
  const ChatRequest req = build_listwise_request(sample, instances,
                                                 out.presented_order,
                                                 backend.model_id(), gen);

  // primary attempt, then one retry at the same settings
  for (int attempt = 0; attempt < 2; ++attempt) {
    const ChatResponse res = backend.complete(req);
    out.verdict.raw_model_text = res.text;
    out.verdict.retries = attempt;
    if (auto parsed = parse_permutation(res.text, n)) {
      out.verdict.order = parsed->order;
      out.verdict.repair = attempt > 0 ? RepairKind::Retried
                           : parsed->reparsed ? RepairKind::Reparsed
                                              : RepairKind::None;
      out.ranking = make_ranking(
          map_presented_to_ids(sample, out.presented_order, parsed->order), sample,
          provenance);
      return out;
    }
  }

  out.verdict.repair = RepairKind::Fallback;

  // Fallback 1: naive listwise without instances (skip when the prompt
  // already had none — it would be the same request).
  if (instances != nullptr) {
    const ChatRequest naive_req = build_listwise_request(
        sample, nullptr, out.presented_order, backend.model_id(), gen);
    const ChatResponse res = backend.complete(naive_req);
    if (auto parsed = parse_permutation(res.text, n)) {
      out.flags.push_back("fallback:naive-listwise");
      out.verdict.order = parsed->order;
      out.verdict.raw_model_text = res.text;
      out.ranking = make_ranking(
          map_presented_to_ids(sample, out.presented_order, parsed->order), sample,
          provenance);
      return out;
    }
  }

  // Fallback 2: pointwise scores from the same backend.
  try {
    PointwiseScores scores = score_pointwise(sample, backend, gen);
    out.flags.push_back("fallback:pointwise");
    for (const auto& w : scores.warnings) out.warnings.push_back(w);
    out.ranking = sort_scored(scores.scores, TieBreakChain::input_index_only(),
                              sample, provenance);
    return out;
  } catch (const Error&) {
    // Fall through to the last resort below.
  }

  // Fallback 3: input order, flagged.
  out.flags.push_back("ranking-failed");
  out.ranking = make_ranking(sample.response_ids(), sample, provenance);
  return out;
}

ListwiseOutcome rank_nonfactoid(const EvalSample& sample,
                                const std::optional<SilverInstanceSet>& instances,
                                ChatBackend& backend, uint64_t shuffle_seed,
                                const GenerationParams& gen) {
  return rank_listwise(sample, instances ? &*instances : nullptr, backend,
                       shuffle_seed, Provenance::InstanceListwise, gen);
}

}  // namespace minoseval
