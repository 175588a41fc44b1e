#include "minoseval/backends.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "minoseval/sha256.hpp"
#include "minoseval/text.hpp"

namespace minoseval {

using json = nlohmann::json;

namespace {

void validate_request(const ChatRequest& req) {
  if (req.temperature < 0.0) {
    throw Error(ErrorCode::Config,
                "temperature must be >= 0, got " + std::to_string(req.temperature));
  }
  if (req.max_tokens <= 0) {
    throw Error(ErrorCode::Config,
                "max_tokens must be > 0, got " + std::to_string(req.max_tokens));
  }
}

}  // namespace

NLIVerdict make_simplex_verdict(double entail, double neutral, double contradict) {
  for (double p : {entail, neutral, contradict}) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw Error(ErrorCode::MalformedBackendOutput,
                  "probability outside [0,1]: " + std::to_string(p));
    }
  }
  const double sum = entail + neutral + contradict;
  if (sum < 0.5 || sum > 1.5) {
    throw Error(ErrorCode::MalformedBackendOutput,
                "probabilities not normalizable, sum=" + std::to_string(sum));
  }
  NLIVerdict v;
  v.renormalized = std::abs(sum - 1.0) > 1e-6;
  v.p_entail = entail / sum;
  v.p_neutral = neutral / sum;
  v.p_contradict = contradict / sum;
  return v;
}

// ---------------------------------------------------------------------------
// HTTP plumbing

namespace {

struct ParsedUrl {
  std::string host_port;  // http://host:port
};

ParsedUrl parse_base_url(const std::string& base_url) {
  if (base_url.rfind("https://", 0) == 0) {
    throw Error(ErrorCode::Config,
                "https is not supported by this build; use an http endpoint: " + base_url);
  }
  if (base_url.rfind("http://", 0) != 0) {
    throw Error(ErrorCode::Config, "base_url must start with http://: " + base_url);
  }
  std::string rest = base_url;
  while (!rest.empty() && rest.back() == '/') rest.pop_back();
  return ParsedUrl{rest};
}

void backoff_sleep(const RetryPolicy& policy, int attempt) {
  const int ms = static_cast<int>(policy.initial_backoff_ms *
                                  std::pow(policy.multiplier, attempt));
  if (policy.sleep_fn) {
    policy.sleep_fn(ms);
  } else {
    std::this_thread::sleep_for(std::chrono::milliseconds(ms));
  }
}

std::string bearer_token(const std::string& api_key_env) {
  if (api_key_env.empty()) return "";
  const char* value = std::getenv(api_key_env.c_str());
  if (!value || !*value) {
    throw Error(ErrorCode::Config,
                "environment variable '" + api_key_env + "' is not set");
  }
  return value;
}

// POSTs with the config retry policy; returns the response body.
std::string post_json_with_retry(const HttpBackendConfig& config,
                                 const std::string& path,
                                 const std::string& body) {
  const ParsedUrl url = parse_base_url(config.base_url);
  const std::string token = bearer_token(config.api_key_env);

  int last_status = 0;
  bool timed_out = false;
  for (int attempt = 0; attempt < config.retry.max_attempts; ++attempt) {
    if (attempt > 0) backoff_sleep(config.retry, attempt - 1);

    httplib::Client client(url.host_port);
    client.set_connection_timeout(config.timeout_sec, 0);
    client.set_read_timeout(config.timeout_sec, 0);
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      timed_out = true;
      continue;  // connection failure / timeout: retryable
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    last_status = res->status;
    timed_out = false;
    if (!RetryPolicy::retryable_status(res->status)) {
      throw Error(ErrorCode::Transport,
                  "HTTP " + std::to_string(res->status) + " from " + path);
    }
  }
  if (timed_out) {
    throw Error(ErrorCode::ExhaustedRetries,
                "no response (refused or timed out) after " +
                    std::to_string(config.retry.max_attempts) + " attempts to " +
                    path);
  }
  if (last_status == 429) {
    throw Error(ErrorCode::RateLimited, "still rate-limited after " +
                                            std::to_string(config.retry.max_attempts) +
                                            " attempts to " + path);
  }
  throw Error(ErrorCode::ExhaustedRetries,
              "HTTP " + std::to_string(last_status) + " persisted across " +
                  std::to_string(config.retry.max_attempts) + " attempts to " + path);
}

}  // namespace

HttpChatBackend::HttpChatBackend(HttpBackendConfig config)
    : config_(std::move(config)) {
  parse_base_url(config_.base_url);  // fail fast on bad config
}

ChatResponse HttpChatBackend::complete(const ChatRequest& req) {
  validate_request(req);
  json payload = {
      {"model", req.model_id.empty() ? config_.model_id : req.model_id},
      {"messages",
       json::array({{{"role", "system"}, {"content", req.system_prompt}},
                    {{"role", "user"}, {"content", req.user_prompt}}})},
      {"temperature", req.temperature},
      {"seed", req.seed},
      {"max_tokens", req.max_tokens},
  };

  const auto start = std::chrono::steady_clock::now();
  const std::string body =
      post_json_with_retry(config_, config_.chat_path, payload.dump());
  const auto elapsed = std::chrono::steady_clock::now() - start;

  json parsed;
  try {
    parsed = json::parse(body);
  } catch (const json::exception&) {
    throw Error(ErrorCode::MalformedBackendOutput, "chat response is not JSON");
  }
  if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
      parsed["choices"].empty()) {
    throw Error(ErrorCode::MalformedBackendOutput, "chat response has no choices");
  }
  ChatResponse out;
  try {
    out.text = parsed["choices"][0].at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::MalformedBackendOutput,
                "chat response choice has no message content");
  }
  if (parsed.contains("usage")) {
    out.token_usage.prompt = parsed["usage"].value("prompt_tokens", 0);
    out.token_usage.completion = parsed["usage"].value("completion_tokens", 0);
  }
  out.latency_ms = static_cast<int>(
      std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count());
  return out;
}

HttpNliBackend::HttpNliBackend(HttpBackendConfig config)
    : config_(std::move(config)) {
  parse_base_url(config_.base_url);
}

NLIVerdict HttpNliBackend::probabilities(const std::string& premise,
                                         const std::string& hypothesis) {
  json payload = {{"premise", premise}, {"hypothesis", hypothesis}};
  const std::string body =
      post_json_with_retry(config_, config_.nli_path, payload.dump());

  json parsed;
  try {
    parsed = json::parse(body);
  } catch (const json::exception&) {
    throw Error(ErrorCode::MalformedBackendOutput, "NLI response is not JSON");
  }
  if (!parsed.contains("entailment") || !parsed.contains("neutral") ||
      !parsed.contains("contradiction")) {
    throw Error(ErrorCode::MalformedBackendOutput,
                "NLI response missing entailment/neutral/contradiction");
  }
  return make_simplex_verdict(parsed["entailment"].get<double>(),
                              parsed["neutral"].get<double>(),
                              parsed["contradiction"].get<double>());
}

// ---------------------------------------------------------------------------
// Scripted mocks

ScriptedChatBackend::ScriptedChatBackend(std::vector<ChatScriptRule> rules,
                                         std::string default_response)
    : rules_(std::move(rules)),
      consumed_(rules_.size(), 0),
      default_response_(std::move(default_response)) {}

std::shared_ptr<ScriptedChatBackend> ScriptedChatBackend::from_file(
    const std::filesystem::path& script_json) {
  std::ifstream in(script_json);
  if (!in) {
    throw Error(ErrorCode::Config, "cannot open chat script: " + script_json.string());
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config,
                "chat script is not valid JSON: " + std::string(e.what()));
  }
  std::vector<ChatScriptRule> rules;
  for (const auto& r : doc.value("rules", json::array())) {
    ChatScriptRule rule;
    rule.system_contains = r.value("system_contains", "");
    if (r.contains("user_contains")) {
      if (r["user_contains"].is_array()) {
        for (const auto& u : r["user_contains"]) {
          rule.user_contains.push_back(u.get<std::string>());
        }
      } else {
        rule.user_contains.push_back(r["user_contains"].get<std::string>());
      }
    }
    if (r.contains("responses")) {
      for (const auto& t : r["responses"]) rule.responses.push_back(t.get<std::string>());
    } else {
      rule.responses.push_back(r.value("response", ""));
    }
    rules.push_back(std::move(rule));
  }
  return std::make_shared<ScriptedChatBackend>(std::move(rules),
                                               doc.value("default_response", ""));
}

ChatResponse ScriptedChatBackend::complete(const ChatRequest& req) {
  validate_request(req);
  std::lock_guard<std::mutex> lock(mu_);
  int matched = -1;
  std::string text = default_response_;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto& rule = rules_[i];
    if (!rule.system_contains.empty() &&
        req.system_prompt.find(rule.system_contains) == std::string::npos) {
      continue;
    }
    bool user_ok = true;
    for (const auto& needle : rule.user_contains) {
      if (req.user_prompt.find(needle) == std::string::npos) {
        user_ok = false;
        break;
      }
    }
    if (!user_ok) continue;
    matched = static_cast<int>(i);
    const std::size_t used = std::min(consumed_[i], rule.responses.size() - 1);
    text = rule.responses[used];
    ++consumed_[i];
    break;
  }
  calls_.push_back({req.system_prompt, req.user_prompt, matched});
  ChatResponse out;
  out.text = text;
  return out;
}

std::vector<ChatCallRecord> ScriptedChatBackend::calls() const {
  std::lock_guard<std::mutex> lock(mu_);
  return calls_;
}

std::size_t ScriptedChatBackend::call_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return calls_.size();
}

void ScriptedChatBackend::reset_calls() {
  std::lock_guard<std::mutex> lock(mu_);
  calls_.clear();
}

ScriptedNliBackend::ScriptedNliBackend(std::vector<NliScriptRule> rules)
    : rules_(std::move(rules)) {}

std::shared_ptr<ScriptedNliBackend> ScriptedNliBackend::from_file(
    const std::filesystem::path& script_json) {
  std::ifstream in(script_json);
  if (!in) {
    throw Error(ErrorCode::Config, "cannot open NLI script: " + script_json.string());
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config,
                "NLI script is not valid JSON: " + std::string(e.what()));
  }
  std::vector<NliScriptRule> rules;
  for (const auto& r : doc.value("rules", json::array())) {
    NliScriptRule rule;
    rule.premise_contains = r.value("premise_contains", "");
    rule.hypothesis_contains = r.value("hypothesis_contains", "");
    rule.entailment = r.value("entailment", 0.0);
    rule.neutral = r.value("neutral", 0.0);
    rule.contradiction = r.value("contradiction", 0.0);
    rules.push_back(std::move(rule));
  }
  return std::make_shared<ScriptedNliBackend>(std::move(rules));
}

NLIVerdict ScriptedNliBackend::probabilities(const std::string& premise,
                                             const std::string& hypothesis) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    ++calls_;
  }
  for (const auto& rule : rules_) {
    if (!rule.premise_contains.empty() &&
        premise.find(rule.premise_contains) == std::string::npos) {
      continue;
    }
    if (!rule.hypothesis_contains.empty() &&
        hypothesis.find(rule.hypothesis_contains) == std::string::npos) {
      continue;
    }
    return make_simplex_verdict(rule.entailment, rule.neutral, rule.contradiction);
  }
  // Hash-derived verdict: deterministic, simplex-valid, spread over the pair.
  const uint64_t h = fnv1a64(premise + "\x1f" + hypothesis);
  const double e = static_cast<double>(h % 1000) / 999.0;
  const double rest = 1.0 - e;
  const double c = rest * static_cast<double>((h >> 20) % 1000) / 999.0;
  return make_simplex_verdict(e, rest - c, c);
}

std::size_t ScriptedNliBackend::call_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return calls_;
}

// ---------------------------------------------------------------------------
// Cache

CacheKey chat_cache_key(const std::string& backend_kind, const ChatRequest& req) {
  json payload = {
      {"backend", backend_kind},
      {"model_id", req.model_id},
      {"system_prompt", req.system_prompt},
      {"user_prompt", req.user_prompt},
      {"temperature", req.temperature},
      {"seed", req.seed},
      {"max_tokens", req.max_tokens},
  };
  return CacheKey{sha256_hex(payload.dump())};
}

CacheKey nli_cache_key(const std::string& backend_kind, const std::string& premise,
                       const std::string& hypothesis) {
  json payload = {
      {"backend", backend_kind},
      {"premise", premise},
      {"hypothesis", hypothesis},
  };
  return CacheKey{sha256_hex(payload.dump())};
}

ResponseCache::ResponseCache(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path ResponseCache::entry_path(const std::string& backend_kind,
                                                const CacheKey& key) const {
  return root_ / backend_kind / key.digest.substr(0, 2) / (key.digest + ".json");
}

std::optional<std::string> ResponseCache::load(const std::string& backend_kind,
                                               const CacheKey& key) const {
  std::ifstream in(entry_path(backend_kind, key), std::ios::binary);
  if (!in) return std::nullopt;
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return data;
}

void ResponseCache::store(const std::string& backend_kind, const CacheKey& key,
                          const std::string& payload_json) const {
  const auto path = entry_path(backend_kind, key);
  std::filesystem::create_directories(path.parent_path());
  // Temp file + rename keeps concurrent writers of the same key safe.
  const auto tmp = path.string() + "." + std::to_string(fnv1a64(payload_json)) + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << payload_json;
  }
  std::filesystem::rename(tmp, path);
}

CachingChatBackend::CachingChatBackend(std::shared_ptr<ChatBackend> inner,
                                       std::shared_ptr<ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

ChatResponse CachingChatBackend::complete(const ChatRequest& req) {
  const CacheKey key = chat_cache_key(inner_->kind(), req);
  if (auto hit = cache_->load(inner_->kind(), key)) {
    try {
      json doc = json::parse(*hit);
      ChatResponse out;
      out.text = doc.at("text").get<std::string>();
      out.token_usage.prompt = doc.value("prompt_tokens", 0);
      out.token_usage.completion = doc.value("completion_tokens", 0);
      return out;
    } catch (const json::exception&) {
      // corrupt entry: fall through and overwrite
    }
  }
  ChatResponse fresh = inner_->complete(req);
  json doc = {
      {"text", fresh.text},
      {"prompt_tokens", fresh.token_usage.prompt},
      {"completion_tokens", fresh.token_usage.completion},
  };
  cache_->store(inner_->kind(), key, doc.dump());
  return fresh;
}

CachingNliBackend::CachingNliBackend(std::shared_ptr<NLIBackend> inner,
                                     std::shared_ptr<ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

NLIVerdict CachingNliBackend::probabilities(const std::string& premise,
                                            const std::string& hypothesis) {
  const CacheKey key = nli_cache_key(inner_->kind(), premise, hypothesis);
  if (auto hit = cache_->load(inner_->kind(), key)) {
    try {
      json doc = json::parse(*hit);
      NLIVerdict v;
      v.p_entail = doc.at("entailment").get<double>();
      v.p_neutral = doc.at("neutral").get<double>();
      v.p_contradict = doc.at("contradiction").get<double>();
      v.renormalized = doc.value("renormalized", false);
      return v;
    } catch (const json::exception&) {
    }
  }
  NLIVerdict fresh = inner_->probabilities(premise, hypothesis);
  json doc = {
      {"entailment", fresh.p_entail},
      {"neutral", fresh.p_neutral},
      {"contradiction", fresh.p_contradict},
      {"renormalized", fresh.renormalized},
  };
  cache_->store(inner_->kind(), key, doc.dump());
  return fresh;
}

}  // namespace minoseval
