#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minoseval/backends.hpp"
#include "minoseval/core.hpp"
#include "minoseval/dataset.hpp"
#include "minoseval/rank_metrics.hpp"

namespace minoseval {

enum class Method { MinosEval, Pointwise, Pairwise, Listwise, Bleu, RougeL };
const char* to_string(Method method);
std::optional<Method> method_from_string(std::string_view s);

enum class ClassificationMode { Llm, Manual, ForcedFactoid, ForcedNonFactoid };
const char* to_string(ClassificationMode mode);
std::optional<ClassificationMode> classification_mode_from_string(std::string_view s);

struct BackendSelection {
  std::string kind = "scripted";  // "http" | "scripted"
  std::string base_url;
  std::string model_id;
  std::string api_key_env;  // env var holding the bearer token; never in config
  std::string script;       // scripted backends: rules file (optional)
  std::string chat_path = "/chat/completions";
  std::string nli_path = "/nli";
  int timeout_sec = 60;
  int retry_max_attempts = 3;
  int retry_initial_backoff_ms = 1000;
};

struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path output_dir = "out";
  Method method = Method::MinosEval;
  ClassificationMode classification_mode = ClassificationMode::Llm;
  uint64_t seed = 42;
  std::size_t concurrency = 1;
  std::filesystem::path cache_dir;  // empty = caching off
  std::size_t key_point_cap = 20;
  std::vector<double> rbo_ps = {0.5, 0.9};
  std::filesystem::path demos;  // optional demonstrations JSONL
  std::size_t demo_count = 5;
  double temperature = 0.0;
  int max_tokens = 2048;
  BackendSelection chat_backend;
  BackendSelection nli_backend;
};

// JSON config file; flags layered on top by the CLI.
RunConfig load_run_config(const std::filesystem::path& config_json);

struct BackendSet {
  std::shared_ptr<ChatBackend> chat;  // caching wrapper when cache_dir set
  std::shared_ptr<NLIBackend> nli;
  std::shared_ptr<ResponseCache> cache;
};

BackendSet build_backends(const RunConfig& config);

// x100, two decimals: 0.4528 -> "45.28".
std::string format_x100(double value);

// Commands. Exit codes: 0 success, 1 fatal (thrown Error), 2 partial.
int cmd_classify(const RunConfig& config, std::ostream& out);
int cmd_evaluate(const RunConfig& config, std::ostream& out);
int cmd_report(const std::vector<std::filesystem::path>& rankings_files,
               const std::filesystem::path& gold_dataset,
               const std::vector<double>& rbo_ps, std::ostream& out);
int cmd_stats(const std::filesystem::path& dataset, std::ostream& out);

}  // namespace minoseval
