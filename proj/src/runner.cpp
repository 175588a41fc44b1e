#include "minoseval/runner.hpp"

#include <atomic>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "minoseval/baselines.hpp"
#include "minoseval/fact_detection.hpp"
#include "minoseval/keypoint_scoring.hpp"
#include "minoseval/listwise_ranking.hpp"
#include "minoseval/text.hpp"

namespace minoseval {

using json = nlohmann::json;

const char* to_string(Method method) {
  switch (method) {
    case Method::MinosEval: return "minoseval";
    case Method::Pointwise: return "pointwise";
    case Method::Pairwise: return "pairwise";
    case Method::Listwise: return "listwise";
    case Method::Bleu: return "bleu";
    case Method::RougeL: return "rouge-l";
  }
  return "unknown";
}

std::optional<Method> method_from_string(std::string_view s) {
  const std::string t = ascii_lower(trim(s));
  if (t == "minoseval") return Method::MinosEval;
  if (t == "pointwise") return Method::Pointwise;
  if (t == "pairwise") return Method::Pairwise;
  if (t == "listwise") return Method::Listwise;
  if (t == "bleu") return Method::Bleu;
  if (t == "rouge-l" || t == "rougel" || t == "rouge_l") return Method::RougeL;
  return std::nullopt;
}

const char* to_string(ClassificationMode mode) {
  switch (mode) {
    case ClassificationMode::Llm: return "llm";
    case ClassificationMode::Manual: return "manual";
    case ClassificationMode::ForcedFactoid: return "forced-factoid";
    case ClassificationMode::ForcedNonFactoid: return "forced-nonfactoid";
  }
  return "unknown";
}

std::optional<ClassificationMode> classification_mode_from_string(
    std::string_view s) {
  const std::string t = ascii_lower(trim(s));
  if (t == "llm") return ClassificationMode::Llm;
  if (t == "manual") return ClassificationMode::Manual;
  if (t == "forced-factoid") return ClassificationMode::ForcedFactoid;
  if (t == "forced-nonfactoid") return ClassificationMode::ForcedNonFactoid;
  return std::nullopt;
}

namespace {

BackendSelection parse_backend_selection(const json& doc,
                                         const BackendSelection& defaults) {
  BackendSelection sel = defaults;
  sel.kind = doc.value("kind", sel.kind);
  sel.base_url = doc.value("base_url", sel.base_url);
  sel.model_id = doc.value("model_id", sel.model_id);
  sel.api_key_env = doc.value("api_key_env", sel.api_key_env);
  sel.script = doc.value("script", sel.script);
  sel.chat_path = doc.value("chat_path", sel.chat_path);
  sel.nli_path = doc.value("nli_path", sel.nli_path);
  sel.timeout_sec = doc.value("timeout_sec", sel.timeout_sec);
  sel.retry_max_attempts = doc.value("retry_max_attempts", sel.retry_max_attempts);
  sel.retry_initial_backoff_ms =
      doc.value("retry_initial_backoff_ms", sel.retry_initial_backoff_ms);
  return sel;
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& config_json) {
  std::ifstream in(config_json);
  if (!in) {
    throw Error(ErrorCode::Config, "cannot open config: " + config_json.string());
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, "config is not valid JSON: " + std::string(e.what()));
  }

  RunConfig cfg;
  cfg.dataset = doc.value("dataset", "");
  cfg.output_dir = doc.value("output_dir", "out");
  if (doc.contains("method")) {
    const auto m = method_from_string(doc["method"].get<std::string>());
    if (!m) {
      throw Error(ErrorCode::Config,
                  "unknown method '" + doc["method"].get<std::string>() + "'");
    }
    cfg.method = *m;
  }
  if (doc.contains("classification_mode")) {
    const auto m = classification_mode_from_string(
        doc["classification_mode"].get<std::string>());
    if (!m) {
      throw Error(ErrorCode::Config,
                  "unknown classification_mode '" +
                      doc["classification_mode"].get<std::string>() + "'");
    }
    cfg.classification_mode = *m;
  }
  cfg.seed = doc.value("seed", cfg.seed);
  cfg.concurrency = doc.value("concurrency", cfg.concurrency);
  cfg.cache_dir = doc.value("cache_dir", "");
  cfg.key_point_cap = doc.value("key_point_cap", cfg.key_point_cap);
  if (doc.contains("rbo_p")) {
    cfg.rbo_ps.clear();
    for (const auto& p : doc["rbo_p"]) cfg.rbo_ps.push_back(p.get<double>());
  }
  cfg.demos = doc.value("demos", "");
  cfg.demo_count = doc.value("demo_count", cfg.demo_count);
  cfg.temperature = doc.value("temperature", cfg.temperature);
  cfg.max_tokens = doc.value("max_tokens", cfg.max_tokens);
  if (doc.contains("chat_backend")) {
    cfg.chat_backend = parse_backend_selection(doc["chat_backend"], cfg.chat_backend);
  }
  if (doc.contains("nli_backend")) {
    cfg.nli_backend = parse_backend_selection(doc["nli_backend"], cfg.nli_backend);
  }
  for (double p : cfg.rbo_ps) {
    if (!(p > 0.0 && p < 1.0)) {
      throw Error(ErrorCode::Config, "rbo_p values must lie in (0,1)");
    }
  }
  return cfg;
}

BackendSet build_backends(const RunConfig& config) {
  BackendSet set;

  std::shared_ptr<ChatBackend> chat;
  if (config.chat_backend.kind == "scripted") {
    chat = config.chat_backend.script.empty()
               ? std::make_shared<ScriptedChatBackend>(std::vector<ChatScriptRule>{})
               : ScriptedChatBackend::from_file(config.chat_backend.script);
  } else if (config.chat_backend.kind == "http") {
    HttpBackendConfig http;
    http.base_url = config.chat_backend.base_url;
    http.chat_path = config.chat_backend.chat_path;
    http.model_id = config.chat_backend.model_id;
    http.api_key_env = config.chat_backend.api_key_env;
    http.timeout_sec = config.chat_backend.timeout_sec;
    http.retry.max_attempts = config.chat_backend.retry_max_attempts;
    http.retry.initial_backoff_ms = config.chat_backend.retry_initial_backoff_ms;
    chat = std::make_shared<HttpChatBackend>(http);
  } else {
    throw Error(ErrorCode::Config,
                "chat backend kind must be http or scripted, got '" +
                    config.chat_backend.kind + "'");
  }

  std::shared_ptr<NLIBackend> nli;
  if (config.nli_backend.kind == "scripted") {
    nli = config.nli_backend.script.empty()
              ? std::make_shared<ScriptedNliBackend>()
              : ScriptedNliBackend::from_file(config.nli_backend.script);
  } else if (config.nli_backend.kind == "http") {
    HttpBackendConfig http;
    http.base_url = config.nli_backend.base_url;
    http.nli_path = config.nli_backend.nli_path;
    http.api_key_env = config.nli_backend.api_key_env;
    http.timeout_sec = config.nli_backend.timeout_sec;
    http.retry.max_attempts = config.nli_backend.retry_max_attempts;
    http.retry.initial_backoff_ms = config.nli_backend.retry_initial_backoff_ms;
    nli = std::make_shared<HttpNliBackend>(http);
  } else {
    throw Error(ErrorCode::Config,
                "nli backend kind must be http or scripted, got '" +
                    config.nli_backend.kind + "'");
  }

  if (!config.cache_dir.empty()) {
    set.cache = std::make_shared<ResponseCache>(config.cache_dir);
    set.chat = std::make_shared<CachingChatBackend>(chat, set.cache);
    set.nli = std::make_shared<CachingNliBackend>(nli, set.cache);
  } else {
    set.chat = chat;
    set.nli = nli;
  }
  return set;
}

std::string format_x100(double value) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << value * 100.0;
  return out.str();
}

namespace {

std::string format_std(double value) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << value;
  return out.str();
}

std::string format_p(double p) {
  std::ostringstream out;
  out << p;
  return out.str();
}

GenerationParams generation_params(const RunConfig& config) {
  GenerationParams gen;
  gen.temperature = config.temperature;
  gen.seed = static_cast<int>(config.seed);
  gen.max_tokens = config.max_tokens;
  return gen;
}

// Bounded worker pool; results land by index, so output order never depends
// on scheduling.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const std::size_t count = std::min(workers, n);
  pool.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::vector<Demonstration> load_demos_if_configured(const RunConfig& config) {
  if (config.demos.empty()) return {};
  auto demos = load_demonstrations(config.demos);
  if (demos.size() > config.demo_count) demos.resize(config.demo_count);
  return demos;
}

json trace_to_json(const Ranking& ranking) {
  json arr = json::array();
  for (const auto& t : ranking.tiebreak_trace) {
    arr.push_back({{"position", t.position}, {"rule", t.rule}});
  }
  return arr;
}

json agreement_to_json(const AgreementReport& report) {
  json rbo_obj = json::object();
  for (const auto& [p, v] : report.rbo) rbo_obj[format_p(p)] = v;
  return {{"kendall_tau", report.kendall_tau},
          {"spearman_rho", report.spearman_rho},
          {"rbo", rbo_obj},
          {"n", report.n}};
}

json instances_to_json(const SilverInstanceSet& set) {
  json arr = json::array();
  for (const auto& inst : set.instances) {
    arr.push_back({{"level", inst.level}, {"text", inst.text}});
  }
  return arr;
}

json listwise_interp(const EvalSample& sample, const ListwiseOutcome& outcome,
                     const std::optional<SilverInstanceSet>& instances) {
  json interp;
  if (instances) {
    interp["instances"] = instances_to_json(*instances);
    interp["instances_raw"] = instances->raw_model_text;
  }
  json presented = json::array();
  for (std::size_t original : outcome.presented_order) {
    presented.push_back(sample.responses[original].response_id);
  }
  interp["presented_order"] = presented;
  interp["ranking_raw"] = outcome.verdict.raw_model_text;
  interp["repair"] = to_string(outcome.verdict.repair);
  interp["retries"] = outcome.verdict.retries;
  return interp;
}

json keypoint_interp(const FactoidOutcome& outcome) {
  json interp;
  interp["key_points"] = outcome.key_points->key_points;
  interp["extraction_truncated"] = outcome.key_points->truncated;
  json scores = json::array();
  for (const auto& s : outcome.scores) {
    json per_point = json::array();
    for (const auto& pp : s.per_point) {
      per_point.push_back({{"key_point_index", pp.key_point_index},
                           {"entailment", pp.verdict.p_entail},
                           {"neutral", pp.verdict.p_neutral},
                           {"contradiction", pp.verdict.p_contradict},
                           {"margin", pp.margin}});
    }
    scores.push_back({{"response_id", s.response_id},
                      {"mean_margin", s.mean_margin},
                      {"entailment_sum", s.entail_sum},
                      {"contradiction_sum", s.contradict_sum},
                      {"per_point", per_point}});
  }
  interp["response_scores"] = scores;
  return interp;
}

json scored_list_interp(const ScoredList& scores) {
  json arr = json::array();
  for (const auto& e : scores.entries) {
    arr.push_back({{"response_id", e.response_id}, {"score", e.score}});
  }
  return {{"scores", arr}};
}

struct SampleResult {
  json record;
  bool ranking_failed = false;
  bool defaulted_classification = false;
  std::optional<AgreementReport> agreement;
  bool gold_singleton = false;  // has gold but n == 1
  std::vector<std::string> flags;
};

Provenance branch_provenance(Method method, QuestionKind kind) {
  switch (method) {
    case Method::MinosEval:
      return kind == QuestionKind::Factoid ? Provenance::KeyPointScoring
                                           : Provenance::InstanceListwise;
    case Method::Pointwise: return Provenance::Pointwise;
    case Method::Pairwise: return Provenance::Pairwise;
    case Method::Listwise: return Provenance::NaiveListwise;
    case Method::Bleu: return Provenance::Bleu;
    case Method::RougeL: return Provenance::RougeL;
  }
  return Provenance::NaiveListwise;
}

SampleResult evaluate_one(const EvalSample& sample, const RunConfig& config,
                          const BackendSet& backends,
                          const std::vector<Demonstration>& demos) {
  SampleResult result;
  json& record = result.record;
  record["sample_id"] = sample.id;
  record["method"] = to_string(config.method);

  std::vector<std::string> warnings;
  std::vector<std::string> notes;
  if (sample.reference_answers.size() > 1) {
    notes.push_back("used-first-of-" + std::to_string(sample.reference_answers.size()) +
                    "-references");
  }

  const GenerationParams gen = generation_params(config);
  QuestionKind kind = QuestionKind::NonFactoid;

  const uint64_t shuffle_seed = listwise_shuffle_seed(config.seed, sample.id);
  Ranking ranking;
  json interp = json::object();

  try {
    if (config.method == Method::MinosEval) {
      switch (config.classification_mode) {
        case ClassificationMode::Manual:
          if (sample.kind) {
            kind = *sample.kind;
          } else {
            warnings.push_back("kind-missing-defaulted");
          }
          break;
        case ClassificationMode::ForcedFactoid:
          kind = QuestionKind::Factoid;
          break;
        case ClassificationMode::ForcedNonFactoid:
          kind = QuestionKind::NonFactoid;
          break;
        case ClassificationMode::Llm: {
          const ClassificationResult cr =
              classify_question(sample, demos, *backends.chat, gen);
          kind = cr.kind;
          result.defaulted_classification = cr.parse_status == ParseStatus::Defaulted;
          record["classification"] = {{"parse_status", to_string(cr.parse_status)},
                                      {"raw_model_text", cr.raw_model_text}};
          break;
        }
      }
      record["kind"] = to_string(kind);
    } else if (sample.kind) {
      record["kind"] = to_string(*sample.kind);
    }

    if (sample.responses.size() == 1) {
      ranking = make_ranking({sample.responses.front().response_id}, sample,
                             branch_provenance(config.method, kind));
      result.flags.push_back("singleton");
    } else {
      switch (config.method) {
        case Method::MinosEval: {
          if (kind == QuestionKind::Factoid) {
            KeyPointConfig kp_config;
            kp_config.key_point_cap = config.key_point_cap;
            kp_config.gen = gen;
            FactoidOutcome outcome = rank_factoid(sample, *backends.chat,
                                                  *backends.nli, shuffle_seed,
                                                  kp_config);
            ranking = outcome.ranking;
            for (const auto& f : outcome.flags) result.flags.push_back(f);
            for (const auto& w : outcome.warnings) warnings.push_back(w);
            if (outcome.key_points) {
              interp = keypoint_interp(outcome);
            } else if (outcome.listwise_fallback) {
              interp = listwise_interp(sample, *outcome.listwise_fallback,
                                       std::nullopt);
            }
          } else {
            InstanceGenOutcome instances =
                generate_silver_instances(sample, *backends.chat, gen);
            for (const auto& w : instances.warnings) warnings.push_back(w);
            ListwiseOutcome outcome = rank_nonfactoid(
                sample, instances.instances, *backends.chat, shuffle_seed, gen);
            ranking = outcome.ranking;
            for (const auto& f : outcome.flags) result.flags.push_back(f);
            for (const auto& w : outcome.warnings) warnings.push_back(w);
            interp = listwise_interp(sample, outcome, instances.instances);
          }
          break;
        }
        case Method::Pointwise: {
          PointwiseOutcome outcome = pointwise_rank(sample, *backends.chat, gen);
          ranking = outcome.ranking;
          for (const auto& w : outcome.scores.warnings) warnings.push_back(w);
          interp = scored_list_interp(outcome.scores.scores);
          break;
        }
        case Method::Pairwise: {
          PairwiseOutcome outcome = pairwise_rank(sample, *backends.chat, gen);
          ranking = outcome.ranking;
          for (const auto& w : outcome.warnings) warnings.push_back(w);
          json rates = json::array();
          for (std::size_t i = 0; i < sample.responses.size(); ++i) {
            rates.push_back({{"response_id", sample.responses[i].response_id},
                             {"win_rate", outcome.win_rates[i]}});
          }
          interp["win_rates"] = rates;
          interp["primary_comparisons"] = outcome.primary.size();
          interp["recomparisons"] = outcome.recomparisons.size();
          break;
        }
        case Method::Listwise: {
          ListwiseOutcome outcome =
              naive_listwise_rank(sample, *backends.chat, shuffle_seed, gen);
          ranking = outcome.ranking;
          for (const auto& f : outcome.flags) result.flags.push_back(f);
          for (const auto& w : outcome.warnings) warnings.push_back(w);
          interp = listwise_interp(sample, outcome, std::nullopt);
          break;
        }
        case Method::Bleu:
        case Method::RougeL: {
          TokenOverlapOutcome outcome = token_overlap_rank(
              sample, config.method == Method::Bleu ? Provenance::Bleu
                                                    : Provenance::RougeL);
          ranking = outcome.ranking;
          interp = scored_list_interp(outcome.scores);
          break;
        }
      }
    }
  } catch (const std::exception& e) {
    // Per-sample totality: keep the batch going with an input-order ranking.
    ranking = make_ranking(sample.response_ids(), sample,
                           branch_provenance(config.method, kind));
    result.flags.push_back("ranking-failed");
    warnings.push_back(std::string("sample-error: ") + e.what());
    result.ranking_failed = true;
  }
  if (!result.ranking_failed) {
    for (const auto& f : result.flags) {
      if (f == "ranking-failed") result.ranking_failed = true;
    }
  }

  record["provenance"] = to_string(ranking.provenance);
  record["ranking"] = ranking.order;
  record["tiebreak_trace"] = trace_to_json(ranking);
  record["flags"] = result.flags;
  record["warnings"] = warnings;
  record["notes"] = notes;
  record["interpretability"] = interp;

  if (sample.gold_ranking) {
    if (sample.responses.size() >= 2) {
      const Ranking gold{*sample.gold_ranking, ranking.provenance, {}};
      result.agreement = agreement(ranking, gold, config.rbo_ps);
      record["agreement"] = agreement_to_json(*result.agreement);
    } else {
      result.gold_singleton = true;
    }
  }
  return result;
}

std::string render_table(
    const std::vector<double>& rbo_ps,
    const std::vector<std::pair<std::string, AggregateReport>>& rows) {
  std::vector<std::string> headers = {"method", "n", "K", "S"};
  for (double p : rbo_ps) headers.push_back("RBO(p=" + format_p(p) + ")");

  std::vector<std::vector<std::string>> cells;
  for (const auto& [label, report] : rows) {
    std::vector<std::string> row = {label, std::to_string(report.sample_count)};
    const auto render = [](const MetricStat& stat) {
      std::string s = format_x100(stat.mean);
      if (stat.std_dev) s += "+/-" + format_std(*stat.std_dev);
      return s;
    };
    row.push_back(render(report.kendall_tau));
    row.push_back(render(report.spearman_rho));
    for (double p : rbo_ps) {
      const auto it = report.rbo.find(p);
      row.push_back(it != report.rbo.end() ? render(it->second) : "-");
    }
    cells.push_back(std::move(row));
  }

  std::vector<std::size_t> widths(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) widths[c] = headers[c].size();
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      widths[c] = std::max(widths[c], row[c].size());
    }
  }

  std::ostringstream out;
  const auto emit_row = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << "  ";
      out << (c == 0 ? std::left : std::right) << std::setw(static_cast<int>(widths[c]))
          << row[c];
    }
    out << "\n";
  };
  emit_row(headers);
  for (const auto& row : cells) emit_row(row);
  return out.str();
}

}  // namespace

int cmd_classify(const RunConfig& config, std::ostream& out) {
  const std::vector<EvalSample> samples = load_dataset(config.dataset);
  if (samples.empty()) throw Error(ErrorCode::EmptyDataset, config.dataset.string());
  const BackendSet backends = build_backends(config);
  const std::vector<Demonstration> demos = load_demos_if_configured(config);
  const GenerationParams gen = generation_params(config);

  std::vector<ClassificationResult> results(samples.size());
  parallel_for(samples.size(), config.concurrency, [&](std::size_t i) {
    switch (config.classification_mode) {
      case ClassificationMode::Manual:
        results[i] = {samples[i].kind.value_or(QuestionKind::NonFactoid), "",
                      samples[i].kind ? ParseStatus::Clean : ParseStatus::Defaulted};
        break;
      case ClassificationMode::ForcedFactoid:
        results[i] = {QuestionKind::Factoid, "", ParseStatus::Clean};
        break;
      case ClassificationMode::ForcedNonFactoid:
        results[i] = {QuestionKind::NonFactoid, "", ParseStatus::Clean};
        break;
      case ClassificationMode::Llm: {
        EvalSample stripped = samples[i];
        stripped.kind.reset();  // the preset kind is the gold label here
        results[i] = classify_question(stripped, demos, *backends.chat, gen);
        break;
      }
    }
  });

  std::filesystem::create_directories(config.output_dir);
  std::ofstream kinds_file(config.output_dir / "kinds.jsonl",
                           std::ios::binary | std::ios::trunc);
  bool any_defaulted = false;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    json record = {{"id", samples[i].id},
                   {"kind", to_string(results[i].kind)},
                   {"parse_status", to_string(results[i].parse_status)},
                   {"raw_model_text", results[i].raw_model_text}};
    kinds_file << record.dump() << "\n";
    if (results[i].parse_status == ParseStatus::Defaulted) any_defaulted = true;
  }

  out << "classified " << samples.size() << " samples -> "
      << (config.output_dir / "kinds.jsonl").string() << "\n";

  if (config.classification_mode == ClassificationMode::Llm) {
    std::vector<std::pair<ClassificationResult, QuestionKind>> gold_pairs;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].kind) gold_pairs.emplace_back(results[i], *samples[i].kind);
    }
    if (!gold_pairs.empty()) {
      std::ostringstream acc;
      acc << std::fixed << std::setprecision(2)
          << classification_accuracy(gold_pairs);
      out << "accuracy vs gold kinds: " << acc.str() << " (" << gold_pairs.size()
          << " labelled samples)\n";
    }
  }
  return any_defaulted ? 2 : 0;
}

int cmd_evaluate(const RunConfig& config, std::ostream& out) {
  const std::vector<EvalSample> samples = load_dataset(config.dataset);
  if (samples.empty()) throw Error(ErrorCode::EmptyDataset, config.dataset.string());
  const BackendSet backends = build_backends(config);
  const std::vector<Demonstration> demos = load_demos_if_configured(config);

  std::vector<SampleResult> results(samples.size());
  parallel_for(samples.size(), config.concurrency, [&](std::size_t i) {
    results[i] = evaluate_one(samples[i], config, backends, demos);
  });

  std::filesystem::create_directories(config.output_dir);
  {
    std::ofstream rankings_file(config.output_dir / "rankings.jsonl",
                                std::ios::binary | std::ios::trunc);
    for (const auto& r : results) rankings_file << r.record.dump() << "\n";
  }

  std::vector<AgreementReport> agreements;
  std::size_t gold_singletons = 0;
  std::size_t failed = 0;
  std::size_t defaulted = 0;
  std::map<std::string, std::size_t> flag_totals;
  std::size_t warning_total = 0;
  for (const auto& r : results) {
    if (r.agreement) agreements.push_back(*r.agreement);
    if (r.gold_singleton) ++gold_singletons;
    if (r.ranking_failed) ++failed;
    if (r.defaulted_classification) ++defaulted;
    for (const auto& f : r.flags) ++flag_totals[f];
    warning_total += r.record["warnings"].size();
  }

  json summary;
  summary["method"] = to_string(config.method);
  summary["classification_mode"] = to_string(config.classification_mode);
  summary["seed"] = config.seed;
  const DatasetManifest manifest =
      dataset_stats(samples, config.dataset.filename().string());
  summary["dataset"] = json::parse(manifest_to_json(manifest));
  summary["ranked"] = results.size();
  summary["ranking_failed"] = failed;
  summary["defaulted_classifications"] = defaulted;
  summary["gold_singletons_excluded"] = gold_singletons;
  json flags_json = json::object();
  for (const auto& [flag, count] : flag_totals) flags_json[flag] = count;
  summary["flag_totals"] = flags_json;
  summary["warning_total"] = warning_total;

  if (!agreements.empty()) {
    const AggregateReport agg = aggregate(agreements);
    json rbo_obj = json::object();
    for (const auto& [p, stat] : agg.rbo) rbo_obj[format_p(p)] = stat.mean;
    summary["agreement"] = {{"kendall_tau", agg.kendall_tau.mean},
                            {"spearman_rho", agg.spearman_rho.mean},
                            {"rbo", rbo_obj},
                            {"samples", agg.sample_count}};
    out << render_table(config.rbo_ps, {{to_string(config.method), agg}});
  } else {
    out << "no gold rankings present; agreement metrics skipped\n";
  }

  {
    std::ofstream summary_file(config.output_dir / "summary.json",
                               std::ios::binary | std::ios::trunc);
    summary_file << summary.dump(2) << "\n";
  }
  out << "wrote " << (config.output_dir / "rankings.jsonl").string() << " and "
      << (config.output_dir / "summary.json").string() << "\n";

  return failed > 0 ? 2 : 0;
}

int cmd_report(const std::vector<std::filesystem::path>& rankings_files,
               const std::filesystem::path& gold_dataset,
               const std::vector<double>& rbo_ps, std::ostream& out) {
  const std::vector<EvalSample> gold_samples = load_dataset(gold_dataset);
  std::map<std::string, const EvalSample*> by_id;
  for (const auto& s : gold_samples) by_id[s.id] = &s;

  struct MethodData {
    std::vector<AgreementReport> reports;
    std::vector<int> subset_ids;
    std::set<int> files;
  };
  std::map<std::string, MethodData> methods;
  std::size_t skipped_no_gold = 0;
  std::size_t skipped_singletons = 0;

  for (std::size_t file_index = 0; file_index < rankings_files.size(); ++file_index) {
    std::ifstream in(rankings_files[file_index]);
    if (!in) {
      throw Error(ErrorCode::Config,
                  "cannot open rankings file: " + rankings_files[file_index].string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      json record;
      try {
        record = json::parse(line);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedJson,
                    rankings_files[file_index].string() + " line " +
                        std::to_string(line_no) + ": " + e.what());
      }
      const std::string sample_id = record.value("sample_id", "");
      const auto it = by_id.find(sample_id);
      if (it == by_id.end()) {
        throw Error(ErrorCode::IdSetMismatch,
                    "sample id '" + sample_id + "' (" +
                        rankings_files[file_index].string() + " line " +
                        std::to_string(line_no) + ") is not in the gold dataset");
      }
      const EvalSample& sample = *it->second;
      if (!sample.gold_ranking) {
        ++skipped_no_gold;
        continue;
      }
      if (sample.responses.size() < 2) {
        ++skipped_singletons;
        continue;
      }
      std::vector<std::string> order;
      for (const auto& id : record.at("ranking")) order.push_back(id.get<std::string>());
      const Ranking produced =
          make_ranking(std::move(order), sample, Provenance::NaiveListwise);
      const Ranking gold{*sample.gold_ranking, Provenance::NaiveListwise, {}};

      const std::string method = record.value("method", "unknown");
      auto& data = methods[method];
      data.reports.push_back(agreement(produced, gold, rbo_ps));
      data.subset_ids.push_back(static_cast<int>(file_index));
      data.files.insert(static_cast<int>(file_index));
    }
  }

  if (methods.empty()) {
    throw Error(ErrorCode::EmptyInput, "no usable ranking records found");
  }

  std::vector<std::pair<std::string, AggregateReport>> rows;
  for (const auto& [method, data] : methods) {
    if (data.files.size() >= 2) {
      rows.emplace_back(method, aggregate(data.reports, &data.subset_ids));
    } else {
      rows.emplace_back(method, aggregate(data.reports));
    }
  }
  out << render_table(rbo_ps, rows);
  if (skipped_no_gold > 0) {
    out << "skipped " << skipped_no_gold << " records without gold rankings\n";
  }
  if (skipped_singletons > 0) {
    out << "skipped " << skipped_singletons
        << " single-response records (agreement undefined)\n";
  }
  return 0;
}

int cmd_stats(const std::filesystem::path& dataset, std::ostream& out) {
  const std::vector<EvalSample> samples = load_dataset(dataset);
  const DatasetManifest manifest =
      dataset_stats(samples, dataset.filename().string());
  out << manifest_to_json(manifest) << "\n";
  return 0;
}

}  // namespace minoseval
