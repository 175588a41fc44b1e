#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "minoseval/errors.hpp"

namespace minoseval {

// Carrier for every judge prompt in the pipeline. temperature 0 and a fixed
// seed keep hosted endpoints as reproducible as they allow.
struct ChatRequest {
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.0;
  int seed = 42;
  int max_tokens = 2048;
  std::string model_id;
};

struct TokenUsage {
  int prompt = 0;
  int completion = 0;
};

struct ChatResponse {
  std::string text;
  TokenUsage token_usage;
  int latency_ms = 0;  // never serialized into reports
};

// Entailment / neutral / contradiction probabilities for one
// (premise, hypothesis) pair. Always simplex-normalized.
struct NLIVerdict {
  double p_entail = 0.0;
  double p_neutral = 0.0;
  double p_contradict = 0.0;
  bool renormalized = false;
};

// Validates raw backend probabilities. Each must lie in [0,1]; a sum in
// [0.5, 1.5] is rescaled onto the simplex (renormalized flag set when it was
// off by more than 1e-6), anything else is MalformedBackendOutput.
NLIVerdict make_simplex_verdict(double entail, double neutral, double contradict);

struct GenerationParams {
  double temperature = 0.0;
  int seed = 42;
  int max_tokens = 2048;
};

// Shareable handle; implementations are safe for concurrent complete() calls.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse complete(const ChatRequest& req) = 0;
  virtual std::string kind() const = 0;      // cache partition name
  virtual std::string model_id() const = 0;  // filled into requests by callers
};

class NLIBackend {
 public:
  virtual ~NLIBackend() = default;
  // premise = model response text, hypothesis = key point text. The caller
  // owns that orientation; this interface never swaps it.
  virtual NLIVerdict probabilities(const std::string& premise,
                                   const std::string& hypothesis) = 0;
  virtual std::string kind() const = 0;
};

// 3 attempts total, exponential backoff, retry only on 408/429/5xx and
// transport timeouts. sleep_fn is a test seam.
struct RetryPolicy {
  int max_attempts = 3;
  int initial_backoff_ms = 1000;
  double multiplier = 2.0;
  std::function<void(int ms)> sleep_fn;  // nullptr = std::this_thread::sleep_for

  static bool retryable_status(int status) {
    return status == 408 || status == 429 || status >= 500;
  }
};

struct HttpBackendConfig {
  std::string base_url;  // http://host:port (TLS not built in)
  std::string chat_path = "/chat/completions";
  std::string nli_path = "/nli";
  std::string model_id;
  std::string api_key_env;  // name of env var holding the bearer token; empty = no auth
  int timeout_sec = 60;
  RetryPolicy retry;
};

// OpenAI-compatible chat endpoint: POST {base_url}{chat_path} with
// {model, messages, temperature, seed, max_tokens}.
class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(HttpBackendConfig config);
  ChatResponse complete(const ChatRequest& req) override;
  std::string kind() const override { return "chat-http"; }
  std::string model_id() const override { return config_.model_id; }

 private:
  HttpBackendConfig config_;
};

// POST {base_url}{nli_path} with {premise, hypothesis} ->
// {entailment, neutral, contradiction}.
class HttpNliBackend : public NLIBackend {
 public:
  explicit HttpNliBackend(HttpBackendConfig config);
  NLIVerdict probabilities(const std::string& premise,
                           const std::string& hypothesis) override;
  std::string kind() const override { return "nli-http"; }

 private:
  HttpBackendConfig config_;
};

// ---------------------------------------------------------------------------
// Scripted mocks. Rules are evaluated in order; the first rule whose
// conditions all hold wins. A rule may carry several responses, consumed one
// per matching call (the last repeats). Everything is recorded.

struct ChatScriptRule {
  std::string system_contains;             // empty = wildcard
  std::vector<std::string> user_contains;  // all must appear in the user prompt
  std::vector<std::string> responses;
};

struct ChatCallRecord {
  std::string system_prompt;
  std::string user_prompt;
  int rule_index = -1;  // -1 = default response served
};

class ScriptedChatBackend : public ChatBackend {
 public:
  explicit ScriptedChatBackend(std::vector<ChatScriptRule> rules,
                               std::string default_response = "");
  static std::shared_ptr<ScriptedChatBackend> from_file(
      const std::filesystem::path& script_json);

  ChatResponse complete(const ChatRequest& req) override;
  std::string kind() const override { return "chat-scripted"; }
  std::string model_id() const override { return "scripted"; }

  std::vector<ChatCallRecord> calls() const;
  std::size_t call_count() const;
  void reset_calls();

 private:
  std::vector<ChatScriptRule> rules_;
  std::vector<std::size_t> consumed_;
  std::string default_response_;
  mutable std::mutex mu_;
  std::vector<ChatCallRecord> calls_;
};

struct NliScriptRule {
  std::string premise_contains;
  std::string hypothesis_contains;
  double entailment = 0.0;
  double neutral = 0.0;
  double contradiction = 0.0;
};

// Unmatched pairs fall back to a verdict derived deterministically from the
// pair's content hash, so large synthetic runs never need exhaustive rules.
class ScriptedNliBackend : public NLIBackend {
 public:
  explicit ScriptedNliBackend(std::vector<NliScriptRule> rules = {});
  static std::shared_ptr<ScriptedNliBackend> from_file(
      const std::filesystem::path& script_json);

  NLIVerdict probabilities(const std::string& premise,
                           const std::string& hypothesis) override;
  std::string kind() const override { return "nli-scripted"; }

  std::size_t call_count() const;

 private:
  std::vector<NliScriptRule> rules_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

// ---------------------------------------------------------------------------
// Content-addressed disk cache: {root}/{backend}/{2-char shard}/{digest}.json.
// Writes go through a temp file + rename, so concurrent writers of the same
// key are safe (identical keys imply identical payloads under deterministic
// settings).

struct CacheKey {
  std::string digest;  // sha256 hex
};

CacheKey chat_cache_key(const std::string& backend_kind, const ChatRequest& req);
CacheKey nli_cache_key(const std::string& backend_kind, const std::string& premise,
                       const std::string& hypothesis);

class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path root);

  std::optional<std::string> load(const std::string& backend_kind,
                                  const CacheKey& key) const;
  void store(const std::string& backend_kind, const CacheKey& key,
             const std::string& payload_json) const;
  std::filesystem::path entry_path(const std::string& backend_kind,
                                   const CacheKey& key) const;

 private:
  std::filesystem::path root_;
};

class CachingChatBackend : public ChatBackend {
 public:
  CachingChatBackend(std::shared_ptr<ChatBackend> inner,
                     std::shared_ptr<ResponseCache> cache);
  ChatResponse complete(const ChatRequest& req) override;
  std::string kind() const override { return inner_->kind(); }
  std::string model_id() const override { return inner_->model_id(); }

 private:
  std::shared_ptr<ChatBackend> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

class CachingNliBackend : public NLIBackend {
 public:
  CachingNliBackend(std::shared_ptr<NLIBackend> inner,
                    std::shared_ptr<ResponseCache> cache);
  NLIVerdict probabilities(const std::string& premise,
                           const std::string& hypothesis) override;
  std::string kind() const override { return inner_->kind(); }

 private:
  std::shared_ptr<NLIBackend> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

}  // namespace minoseval
