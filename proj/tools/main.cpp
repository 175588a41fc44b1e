#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "minoseval/runner.hpp"

namespace {

using minoseval::RunConfig;

// Shared config plumbing: --config loads the JSON file, explicit flags win.
struct ConfigFlags {
  std::string config_path;
  std::string dataset;
  std::string output_dir;
  std::string method;
  std::string classification_mode;
  uint64_t seed = 0;
  std::size_t concurrency = 0;
  std::string cache_dir;
  std::size_t key_point_cap = 0;
  std::vector<double> rbo_ps;
  std::string demos;
  std::size_t demo_count = 0;
  double temperature = 0.0;
  int max_tokens = 0;

  std::string chat_kind, chat_url, chat_model, chat_key_env, chat_script, chat_path;
  std::string nli_kind, nli_url, nli_script, nli_path;
};

void add_config_options(CLI::App* cmd, ConfigFlags& flags, bool ranking_options) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  cmd->add_option("--dataset", flags.dataset, "dataset JSONL");
  cmd->add_option("--output-dir", flags.output_dir, "output directory");
  if (ranking_options) {
    cmd->add_option("--method", flags.method,
                    "minoseval | pointwise | pairwise | listwise | bleu | rouge-l");
    cmd->add_option("--rbo-p", flags.rbo_ps, "RBO persistence values in (0,1)");
    cmd->add_option("--key-point-cap", flags.key_point_cap,
                    "max key points per sample");
  }
  cmd->add_option("--classification-mode", flags.classification_mode,
                  "llm | manual | forced-factoid | forced-nonfactoid");
  cmd->add_option("--seed", flags.seed, "global random seed");
  cmd->add_option("--concurrency", flags.concurrency, "sample-level worker count");
  cmd->add_option("--cache-dir", flags.cache_dir, "response cache directory");
  cmd->add_option("--demos", flags.demos, "demonstrations JSONL for classification");
  cmd->add_option("--demo-count", flags.demo_count, "demonstrations to use (0 = zero-shot)");
  cmd->add_option("--temperature", flags.temperature, "sampling temperature");
  cmd->add_option("--max-tokens", flags.max_tokens, "completion token limit");

  cmd->add_option("--chat-kind", flags.chat_kind, "chat backend: http | scripted");
  cmd->add_option("--chat-url", flags.chat_url, "chat backend base URL");
  cmd->add_option("--chat-model", flags.chat_model, "chat model id");
  cmd->add_option("--chat-key-env", flags.chat_key_env,
                  "env var holding the chat bearer token");
  cmd->add_option("--chat-script", flags.chat_script, "scripted chat rules JSON");
  cmd->add_option("--chat-path", flags.chat_path, "chat completions path");
  cmd->add_option("--nli-kind", flags.nli_kind, "NLI backend: http | scripted");
  cmd->add_option("--nli-url", flags.nli_url, "NLI backend base URL");
  cmd->add_option("--nli-script", flags.nli_script, "scripted NLI rules JSON");
  cmd->add_option("--nli-path", flags.nli_path, "NLI endpoint path");
}

RunConfig resolve_config(const CLI::App* cmd, const ConfigFlags& flags) {
  RunConfig cfg;
  if (!flags.config_path.empty()) cfg = minoseval::load_run_config(flags.config_path);

  const auto given = [cmd](const std::string& name) {
    return cmd->count(name) > 0;
  };
  if (given("--dataset")) cfg.dataset = flags.dataset;
  if (given("--output-dir")) cfg.output_dir = flags.output_dir;
  if (cmd->get_option_no_throw("--method") != nullptr && given("--method")) {
    const auto m = minoseval::method_from_string(flags.method);
    if (!m) throw minoseval::Error(minoseval::ErrorCode::Config,
                                   "unknown method '" + flags.method + "'");
    cfg.method = *m;
  }
  if (given("--classification-mode")) {
    const auto m = minoseval::classification_mode_from_string(flags.classification_mode);
    if (!m) throw minoseval::Error(minoseval::ErrorCode::Config,
                                   "unknown classification mode '" +
                                       flags.classification_mode + "'");
    cfg.classification_mode = *m;
  }
  if (given("--seed")) cfg.seed = flags.seed;
  if (given("--concurrency")) cfg.concurrency = flags.concurrency;
  if (given("--cache-dir")) cfg.cache_dir = flags.cache_dir;
  if (cmd->get_option_no_throw("--key-point-cap") != nullptr &&
      given("--key-point-cap")) {
    cfg.key_point_cap = flags.key_point_cap;
  }
  if (cmd->get_option_no_throw("--rbo-p") != nullptr && given("--rbo-p")) {
    cfg.rbo_ps = flags.rbo_ps;
  }
  if (given("--demos")) cfg.demos = flags.demos;
  if (given("--demo-count")) cfg.demo_count = flags.demo_count;
  if (given("--temperature")) cfg.temperature = flags.temperature;
  if (given("--max-tokens")) cfg.max_tokens = flags.max_tokens;

  if (given("--chat-kind")) cfg.chat_backend.kind = flags.chat_kind;
  if (given("--chat-url")) cfg.chat_backend.base_url = flags.chat_url;
  if (given("--chat-model")) cfg.chat_backend.model_id = flags.chat_model;
  if (given("--chat-key-env")) cfg.chat_backend.api_key_env = flags.chat_key_env;
  if (given("--chat-script")) {
    cfg.chat_backend.script = flags.chat_script;
    if (!given("--chat-kind")) cfg.chat_backend.kind = "scripted";
  }
  if (given("--chat-path")) cfg.chat_backend.chat_path = flags.chat_path;
  if (given("--nli-kind")) cfg.nli_backend.kind = flags.nli_kind;
  if (given("--nli-url")) cfg.nli_backend.base_url = flags.nli_url;
  if (given("--nli-script")) {
    cfg.nli_backend.script = flags.nli_script;
    if (!given("--nli-kind")) cfg.nli_backend.kind = "scripted";
  }
  if (given("--nli-path")) cfg.nli_backend.nli_path = flags.nli_path;

  for (double p : cfg.rbo_ps) {
    if (!(p > 0.0 && p < 1.0)) {
      throw minoseval::Error(minoseval::ErrorCode::Config,
                             "rbo p values must lie in (0,1)");
    }
  }
  if (cfg.dataset.empty()) {
    throw minoseval::Error(minoseval::ErrorCode::Config,
                           "a dataset is required (--dataset or config file)");
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batch ranking harness for open-ended QA candidate answers"};
  app.require_subcommand(1);

  ConfigFlags classify_flags;
  ConfigFlags evaluate_flags;
  std::vector<std::string> report_files;
  std::string report_gold;
  std::vector<double> report_rbo_ps;
  std::string stats_dataset;

  CLI::App* classify = app.add_subcommand(
      "classify", "classify each sample as factoid or non-factoid");
  add_config_options(classify, classify_flags, /*ranking_options=*/false);

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "rank candidate responses for every sample");
  add_config_options(evaluate, evaluate_flags, /*ranking_options=*/true);

  CLI::App* report = app.add_subcommand(
      "report", "aggregate rankings files against a gold dataset");
  report->add_option("files", report_files, "rankings JSONL files")->required();
  report->add_option("--gold", report_gold, "gold dataset JSONL")->required();
  report->add_option("--rbo-p", report_rbo_ps, "RBO persistence values");

  CLI::App* stats = app.add_subcommand("stats", "dataset statistics as JSON");
  stats->add_option("--dataset", stats_dataset, "dataset JSONL")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (classify->parsed()) {
      return minoseval::cmd_classify(resolve_config(classify, classify_flags),
                                     std::cout);
    }
    if (evaluate->parsed()) {
      return minoseval::cmd_evaluate(resolve_config(evaluate, evaluate_flags),
                                     std::cout);
    }
    if (report->parsed()) {
      std::vector<std::filesystem::path> files(report_files.begin(),
                                               report_files.end());
      const std::vector<double> ps =
          report_rbo_ps.empty() ? std::vector<double>{0.5, 0.9} : report_rbo_ps;
      return minoseval::cmd_report(files, report_gold, ps, std::cout);
    }
    if (stats->parsed()) {
      return minoseval::cmd_stats(stats_dataset, std::cout);
    }
  } catch (const minoseval::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
