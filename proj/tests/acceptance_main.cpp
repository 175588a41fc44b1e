// Acceptance suite: every criterion prints exactly one PASS/FAIL line.
// Returns nonzero if any criterion fails.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "minoseval/baselines.hpp"
#include "minoseval/fact_detection.hpp"
#include "minoseval/keypoint_scoring.hpp"
#include "minoseval/rank_metrics.hpp"
#include "minoseval/runner.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace minoseval;
using nlohmann::json;
using testsupport::TempDir;
using testsupport::read_file;

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw std::runtime_error(message);
}

void require_close(double actual, double expected, double tolerance,
                   const std::string& what) {
  if (std::abs(actual - expected) > tolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": got " << actual << ", expected " << expected;
    throw std::runtime_error(msg.str());
  }
}

std::vector<json> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open " + path.string());
  std::vector<json> records;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) records.push_back(json::parse(line));
  }
  return records;
}

bool is_permutation(const std::vector<std::string>& order, const EvalSample& sample) {
  return is_permutation_of(order, sample);
}

RunConfig scripted_config(const std::filesystem::path& dir) {
  RunConfig cfg;
  cfg.dataset = dir / "dataset.jsonl";
  cfg.output_dir = dir / "out";
  cfg.chat_backend.kind = "scripted";
  cfg.chat_backend.script = (dir / "chat_script.json").string();
  cfg.nli_backend.kind = "scripted";
  return cfg;
}

// --- criterion bodies -------------------------------------------------------

void criterion_1_metric_oracles() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(42);
  for (int iter = 0; iter < 10000; ++iter) {
    const std::size_t n = 2 + rng() % 5;  // n in {2..6}
    const auto a = testsupport::random_permutation(n, rng);
    const auto b = testsupport::random_permutation(n, rng);
    require_close(kendall_tau(a, b), oracles::kendall(a, b), 1e-12, "kendall");
    require_close(spearman_rho(a, b), oracles::spearman(a, b), 1e-12, "spearman");
    require_close(rbo(a, b, 0.5), oracles::rbo_ext(a, b, 0.5), 1e-12, "rbo p=0.5");
    require_close(rbo(a, b, 0.9), oracles::rbo_ext(a, b, 0.9), 1e-12, "rbo p=0.9");
  }
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  require(elapsed < 10000,
          "10k-pair sweep took " + std::to_string(elapsed) + " ms (budget 10 s)");
}

void criterion_2_closed_form() {
  std::mt19937_64 rng(43);
  for (std::size_t n = 2; n <= 6; ++n) {
    const auto order = testsupport::random_permutation(n, rng);
    require_close(kendall_tau(order, order), 1.0, 1e-15, "identical K");
    require_close(spearman_rho(order, order), 1.0, 1e-15, "identical S");
    require_close(rbo(order, order, 0.5), 1.0, 1e-12, "identical RBO p=0.5");
    require_close(rbo(order, order, 0.9), 1.0, 1e-12, "identical RBO p=0.9");
    auto reversed = order;
    std::reverse(reversed.begin(), reversed.end());
    require_close(kendall_tau(order, reversed), -1.0, 1e-15, "reversed K");
    require_close(spearman_rho(order, reversed), -1.0, 1e-15, "reversed S");
  }
  const std::vector<std::string> a = {"r1", "r2", "r3"};
  const std::vector<std::string> b = {"r1", "r3", "r2"};
  require_close(kendall_tau(a, b), 1.0 / 3.0, 1e-15, "single-swap K");
  require_close(spearman_rho(a, b), 0.5, 1e-15, "single-swap S");
}

void criterion_3_keypoint_scoring() {
  std::mt19937_64 rng(44);
  const auto sample = testsupport::make_sample("kp", 1);
  for (int iter = 0; iter < 50; ++iter) {
    const std::size_t m = 1 + rng() % 8;
    KeyPointSet set;
    std::vector<NliScriptRule> rules;
    double margin_sum = 0.0;
    // 64ths make every verdict an exact binary fraction summing to 1.0,
    // so the simplex check divides by exactly 1 and the hand arithmetic
    // below is the same arithmetic the backend sees.
    for (std::size_t j = 0; j < m; ++j) {
      const std::string kp =
          "kp-" + std::to_string(iter) + "-" + std::to_string(j);
      const int e64 = static_cast<int>(rng() % 65);
      const int c64 = static_cast<int>(rng() % (65 - e64));
      const double e = e64 / 64.0;
      const double c = c64 / 64.0;
      set.key_points.push_back(kp);
      rules.push_back({"", kp, e, 1.0 - e - c, c});
      margin_sum += e - c;
    }
    const double expected_mean = margin_sum / static_cast<double>(m);

    ScriptedNliBackend nli(rules);
    const KeyPointScore score = score_response(sample.responses[0], set, nli);
    require_close(score.mean_margin, expected_mean, 1e-12, "mean margin");
    require(score.mean_margin >= -1.0 && score.mean_margin <= 1.0,
            "mean margin outside [-1,1]");
    require(score.per_point.size() == m, "per-point size");

    // permutation invariance in key-point order
    KeyPointSet shuffled = set;
    for (std::size_t i = shuffled.key_points.size(); i > 1; --i) {
      std::swap(shuffled.key_points[i - 1], shuffled.key_points[rng() % i]);
    }
    ScriptedNliBackend nli2(rules);
    require_close(score_response(sample.responses[0], shuffled, nli2).mean_margin,
                  score.mean_margin, 1e-12, "permutation invariance");

    // monotonicity: strictly more entailment, same contradiction
    auto raised = rules;
    for (auto& rule : raised) {
      if (rule.neutral > 1.0 / 64.0) {
        rule.entailment += 1.0 / 64.0;
        rule.neutral -= 1.0 / 64.0;
        ScriptedNliBackend nli3(raised);
        const double after =
            score_response(sample.responses[0], set, nli3).mean_margin;
        require(after > score.mean_margin, "monotonicity violated");
        break;
      }
    }
  }
}

void criterion_4_no_ties_everywhere() {
  const auto start = std::chrono::steady_clock::now();
  TempDir dir("accept-no-ties");
  fixtures::FixtureOptions opts;
  opts.min_responses = 2;
  opts.max_responses = 6;
  const auto fx = fixtures::make_fixture(200, 4242, opts);
  fx.write(dir.path());

  const Method methods[] = {Method::MinosEval, Method::Pointwise, Method::Pairwise,
                            Method::Listwise, Method::Bleu, Method::RougeL};
  std::size_t checked = 0;
  for (const Method method : methods) {
    RunConfig cfg = scripted_config(dir.path());
    cfg.method = method;
    cfg.classification_mode = ClassificationMode::Llm;
    cfg.output_dir = dir.path() / ("out-" + std::string(to_string(method)));
    std::ostringstream sink;
    const int code = cmd_evaluate(cfg, sink);
    require(code == 0, std::string(to_string(method)) + " exited " +
                           std::to_string(code));
    const auto records = read_records(cfg.output_dir / "rankings.jsonl");
    require(records.size() == fx.samples.size(), "record count");
    for (std::size_t i = 0; i < records.size(); ++i) {
      std::vector<std::string> order;
      for (const auto& id : records[i]["ranking"]) order.push_back(id);
      require(is_permutation(order, fx.samples[i]),
              std::string(to_string(method)) + " emitted a non-permutation for " +
                  fx.samples[i].id);
      ++checked;
    }
  }
  require(checked == 200 * 6, "expected 1200 rankings");
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  require(elapsed < 60000,
          "six-method sweep took " + std::to_string(elapsed) + " ms (budget 60 s)");
}

int run_cli(const std::string& bin, const std::string& args) {
  const std::string command = bin + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

void criterion_5_determinism() {
  TempDir dir("accept-determinism");
  fixtures::FixtureOptions opts;
  opts.min_responses = 2;
  opts.max_responses = 5;
  const auto fx = fixtures::make_fixture(30, 777, opts);
  fx.write(dir.path());

  const char* bin = std::getenv("MINOSEVAL_BIN");
  for (const char* method : {"minoseval", "pairwise"}) {
    const auto run_dir = [&](const std::string& tag) {
      return (dir.path() / (std::string(method) + "-" + tag)).string();
    };
    if (bin != nullptr) {
      const std::string common =
          "evaluate --dataset " + (dir.path() / "dataset.jsonl").string() +
          " --chat-script " + (dir.path() / "chat_script.json").string() +
          " --nli-kind scripted --classification-mode manual --method " + method +
          " --concurrency 2 --cache-dir " + (dir.path() / "cache").string();
      require(run_cli(bin, common + " --output-dir " + run_dir("1")) == 0,
              "first CLI run failed");
      require(run_cli(bin, common + " --output-dir " + run_dir("2")) == 0,
              "second CLI run failed");
    } else {
      RunConfig cfg = scripted_config(dir.path());
      cfg.method = *method_from_string(method);
      cfg.classification_mode = ClassificationMode::Manual;
      cfg.concurrency = 2;
      cfg.cache_dir = dir.path() / "cache";
      std::ostringstream sink;
      cfg.output_dir = run_dir("1");
      require(cmd_evaluate(cfg, sink) == 0, "first run failed");
      cfg.output_dir = run_dir("2");
      require(cmd_evaluate(cfg, sink) == 0, "second run failed");
    }
    const std::string rankings1 = read_file(run_dir("1") + "/rankings.jsonl");
    require(rankings1 == read_file(run_dir("2") + "/rankings.jsonl"),
            std::string(method) + " rankings differ across runs");
    require(read_file(run_dir("1") + "/summary.json") ==
                read_file(run_dir("2") + "/summary.json"),
            std::string(method) + " summaries differ across runs");
    if (std::string(method) == "pairwise") {
      // the always-A fixture ties every win rate, so traces must be present
      require(rankings1.find("\"rule\":") != std::string::npos,
              "expected tiebreak traces in the pairwise run");
    }
  }
}

void criterion_6_pairwise_budget() {
  const auto sample = testsupport::make_sample("budget", 4);
  // decisive everywhere except the injected r2/r3 tie
  std::vector<ChatScriptRule> rules;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i == j) continue;
      const bool injected_tie = (i == 1 && j == 2) || (i == 2 && j == 1);
      rules.push_back({"comparing two candidate answers",
                       {"Response A:\n" + sample.responses[i].text,
                        "Response B:\n" + sample.responses[j].text},
                       {injected_tie ? "TIE" : (i < j ? "A" : "B")}});
    }
  }
  rules.push_back({"previously judged equally good", {}, {"A"}});
  auto backend = std::make_shared<ScriptedChatBackend>(rules, "");

  const PairwiseOutcome outcome = pairwise_rank(sample, *backend);
  std::size_t primary = 0;
  std::size_t recomparisons = 0;
  for (const auto& call : backend->calls()) {
    if (call.system_prompt.find("comparing two candidate answers") !=
        std::string::npos) {
      ++primary;
    } else if (call.system_prompt.find("previously judged equally good") !=
               std::string::npos) {
      ++recomparisons;
    }
  }
  require(primary == 12, "expected 12 primary comparisons, saw " +
                             std::to_string(primary));
  require(recomparisons == 1, "expected exactly 1 re-comparison, saw " +
                                  std::to_string(recomparisons));
  require(outcome.primary.size() == 12, "primary verdicts recorded");
  require(outcome.recomparisons.size() == 1, "re-comparison recorded");
  require(is_permutation(outcome.ranking.order, sample), "valid permutation");
  // r1 dominates, the injected tie resolves r2 over r3, r4 trails
  require(outcome.ranking.order ==
              std::vector<std::string>{"r1", "r2", "r3", "r4"},
          "unexpected final order");
}

void criterion_7_routing() {
  TempDir dir("accept-routing");
  const auto fx = fixtures::make_fixture(20, 999);  // kinds alternate: 10 + 10
  fx.write(dir.path());

  RunConfig cfg = scripted_config(dir.path());
  cfg.classification_mode = ClassificationMode::Manual;
  std::ostringstream sink;
  require(cmd_evaluate(cfg, sink) == 0, "manual run failed");
  std::size_t factoid_seen = 0;
  std::size_t nonfactoid_seen = 0;
  const auto records = read_records(cfg.output_dir / "rankings.jsonl");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const bool factoid = fx.samples[i].kind == QuestionKind::Factoid;
    const std::string provenance = records[i]["provenance"];
    if (factoid) {
      require(provenance == "key-point-scoring",
              fx.samples[i].id + " mis-routed to " + provenance);
      ++factoid_seen;
    } else {
      require(provenance == "instance-listwise",
              fx.samples[i].id + " mis-routed to " + provenance);
      ++nonfactoid_seen;
    }
  }
  require(factoid_seen == 10 && nonfactoid_seen == 10, "expected a 10/10 split");

  for (const bool forced_factoid : {true, false}) {
    RunConfig forced = scripted_config(dir.path());
    forced.classification_mode = forced_factoid
                                     ? ClassificationMode::ForcedFactoid
                                     : ClassificationMode::ForcedNonFactoid;
    forced.output_dir = dir.path() / (forced_factoid ? "out-ff" : "out-fnf");
    std::ostringstream forced_sink;
    require(cmd_evaluate(forced, forced_sink) == 0, "forced run failed");
    for (const auto& record : read_records(forced.output_dir / "rankings.jsonl")) {
      require(record["provenance"] == (forced_factoid ? "key-point-scoring"
                                                      : "instance-listwise"),
              "forced mode leaked to the other branch");
    }
  }
}

void criterion_8_fallback_totality() {
  TempDir dir("accept-fallback");
  fixtures::FixtureOptions opts;
  opts.malformed_key_points = true;
  opts.malformed_permutations = true;
  const auto fx = fixtures::make_fixture(20, 555, opts);
  fx.write(dir.path());

  RunConfig cfg = scripted_config(dir.path());
  cfg.classification_mode = ClassificationMode::Manual;
  std::ostringstream sink;
  const int code = cmd_evaluate(cfg, sink);
  require(code == 0, "fallbacks must keep the run total, exit was " +
                         std::to_string(code));

  const auto records = read_records(cfg.output_dir / "rankings.jsonl");
  require(records.size() == fx.samples.size(), "record count");
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::vector<std::string> order;
    for (const auto& id : records[i]["ranking"]) order.push_back(id);
    require(is_permutation(order, fx.samples[i]),
            fx.samples[i].id + " fallback emitted a non-permutation");
    const auto& flags = records[i]["flags"];
    const bool factoid = fx.samples[i].kind == QuestionKind::Factoid;
    bool has_listwise_fallback = false;
    bool has_chain_fallback = false;
    for (const auto& flag : flags) {
      const std::string f = flag;
      if (f == "fallback-to-listwise") has_listwise_fallback = true;
      if (f.rfind("fallback:", 0) == 0) has_chain_fallback = true;
    }
    if (factoid) {
      require(has_listwise_fallback,
              fx.samples[i].id + " missing the extraction-fallback flag");
    }
    require(has_chain_fallback,
            fx.samples[i].id + " missing a listwise-fallback flag");
  }
}

void criterion_9_token_metrics() {
  require_close(rouge_l("same tokens here", "same tokens here"), 1.0, 1e-15,
                "identical ROUGE-L");
  require_close(bleu("w x y z a b c", "w x y z a b c"), 1.0, 1e-12,
                "identical BLEU");
  require_close(rouge_l("a b c d", "a c d e"), 0.75, 1e-12, "LCS fixture");

  const std::vector<std::pair<std::string, std::string>> fixtures = {
      {"the cat sat", "the cat sat down"},
      {"a b c d", "a c d e"},
      {"one two three four five six", "one two three x five six"},
      {"alpha beta", "gamma delta"},
  };
  for (const auto& [cand, ref] : fixtures) {
    require_close(bleu(cand, ref),
                  oracles::bleu(metric_tokens(cand), metric_tokens(ref)), 1e-12,
                  "BLEU vs n-gram oracle (" + cand + ")");
  }
}

void criterion_10_accuracy_plumbing() {
  // 10 gold-labelled samples; the scripted judge is right on 9.
  std::vector<std::pair<ClassificationResult, QuestionKind>> pairs;
  std::vector<ChatScriptRule> rules;
  std::vector<EvalSample> samples;
  for (int i = 0; i < 10; ++i) {
    auto sample = testsupport::make_sample("acc" + std::to_string(i), 2);
    sample.question = "Accuracy probe " + std::to_string(i) + "?";
    const QuestionKind gold =
        i % 2 ? QuestionKind::Factoid : QuestionKind::NonFactoid;
    const QuestionKind predicted =
        i == 0 ? QuestionKind::Factoid : gold;  // one deliberate miss
    rules.push_back({"question-type analyst",
                     {"Question: " + sample.question},
                     {std::string(to_string(predicted))}});
    samples.push_back(sample);
    pairs.push_back({{predicted, "", ParseStatus::Clean}, gold});
  }
  require_close(classification_accuracy(pairs), 90.0, 1e-12, "direct accuracy");

  auto backend = std::make_shared<ScriptedChatBackend>(rules, "");
  std::size_t correct = 0;
  for (int i = 0; i < 10; ++i) {
    const QuestionKind gold =
        i % 2 ? QuestionKind::Factoid : QuestionKind::NonFactoid;
    if (classify_question(samples[i], {}, *backend).kind == gold) ++correct;
  }
  require(correct == 9, "scripted judge should hit 9/10");
  // The published few-shot accuracies (e.g. 97.70 on the larger benchmark)
  // need a hosted judge model; they are documented targets, not assertions.
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* label;
    std::function<void()> body;
  };
  const std::vector<Criterion> criteria = {
      {1, "metric oracle equivalence, 10k seeded pairs within 1e-12, under 10 s",
       criterion_1_metric_oracles},
      {2, "closed-form spot values for identical / reversed / single-swap rankings",
       criterion_2_closed_form},
      {3, "key-point scoring matches hand arithmetic and its properties",
       criterion_3_keypoint_scoring},
      {4, "200-sample run under all six methods emits only strict permutations, under 60 s",
       criterion_4_no_ties_everywhere},
      {5, "consecutive evaluate runs are byte-identical, traces included",
       criterion_5_determinism},
      {6, "pairwise issues exactly 2*C(4,2) primary calls plus injected-tie re-comparisons",
       criterion_6_pairwise_budget},
      {7, "manual and forced classification route every sample to the right branch",
       criterion_7_routing},
      {8, "malformed mock output still yields flagged, valid rankings for every sample",
       criterion_8_fallback_totality},
      {9, "token-metric spot values and BLEU oracle equivalence",
       criterion_9_token_metrics},
      {10, "classification accuracy plumbing reports 90.0 on the 9-of-10 fixture",
       criterion_10_accuracy_plumbing},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    try {
      criterion.body();
      std::cout << "PASS  criterion " << criterion.id << ": " << criterion.label
                << "\n";
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "FAIL  criterion " << criterion.id << ": " << criterion.label
                << " -- " << e.what() << "\n";
    }
  }
  if (failures > 0) {
    std::cout << failures << " of " << criteria.size() << " criteria failed\n";
    return 1;
  }
  std::cout << "all " << criteria.size() << " criteria passed\n";
  return 0;
}
