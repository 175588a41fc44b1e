#include "minoseval/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "minoseval/text.hpp"

namespace minoseval {

using json = nlohmann::json;

namespace {

std::string require_string(const json& doc, const char* field, std::size_t line) {
  if (!doc.contains(field) || !doc[field].is_string()) {
    throw Error(ErrorCode::SchemaViolation,
                "line " + std::to_string(line) + ": field '" + field +
                    "' must be a string");
  }
  return doc[field].get<std::string>();
}

EvalSample parse_sample(const json& doc, std::size_t line) {
  EvalSample sample;
  sample.id = require_string(doc, "id", line);
  sample.question = require_string(doc, "question", line);

  if (!doc.contains("reference_answer")) {
    throw Error(ErrorCode::SchemaViolation,
                "line " + std::to_string(line) + ": field 'reference_answer' is required");
  }
  const auto& ref = doc["reference_answer"];
  if (ref.is_string()) {
    sample.reference_answers.push_back(ref.get<std::string>());
  } else if (ref.is_array() && !ref.empty()) {
    for (const auto& r : ref) {
      if (!r.is_string()) {
        throw Error(ErrorCode::SchemaViolation,
                    "line " + std::to_string(line) +
                        ": 'reference_answer' entries must be strings");
      }
      sample.reference_answers.push_back(r.get<std::string>());
    }
  } else {
    throw Error(ErrorCode::SchemaViolation,
                "line " + std::to_string(line) +
                    ": 'reference_answer' must be a string or non-empty array");
  }

  if (!doc.contains("responses") || !doc["responses"].is_array()) {
    throw Error(ErrorCode::SchemaViolation,
                "line " + std::to_string(line) + ": field 'responses' must be an array");
  }
  for (const auto& r : doc["responses"]) {
    CandidateResponse response;
    response.response_id = require_string(r, "response_id", line);
    response.model_name = r.value("model_name", "");
    if (!r.contains("text") || !r["text"].is_string()) {
      throw Error(ErrorCode::SchemaViolation,
                  "line " + std::to_string(line) + ": response '" +
                      response.response_id + "' field 'text' must be a string");
    }
    response.text = r["text"].get<std::string>();
    response.empty_text_ok = r.value("allow_empty", false);
    sample.responses.push_back(std::move(response));
  }

  if (doc.contains("gold_ranking")) {
    if (!doc["gold_ranking"].is_array()) {
      throw Error(ErrorCode::SchemaViolation,
                  "line " + std::to_string(line) + ": 'gold_ranking' must be an array");
    }
    std::vector<std::string> gold;
    for (const auto& id : doc["gold_ranking"]) {
      if (!id.is_string()) {
        throw Error(ErrorCode::SchemaViolation,
                    "line " + std::to_string(line) +
                        ": 'gold_ranking' entries must be strings");
      }
      gold.push_back(id.get<std::string>());
    }
    sample.gold_ranking = std::move(gold);
  }

  if (doc.contains("kind") && !doc["kind"].is_null()) {
    const auto kind = question_kind_from_string(doc["kind"].get<std::string>());
    if (!kind) {
      throw Error(ErrorCode::SchemaViolation,
                  "line " + std::to_string(line) +
                      ": 'kind' must be \"factoid\" or \"non-factoid\"");
    }
    sample.kind = kind;
  }

  try {
    validate_sample(sample);
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaViolation,
                "line " + std::to_string(line) + ": " + e.what());
  }
  return sample;
}

}  // namespace

std::vector<EvalSample> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::Config, "cannot open dataset: " + path.string());
  }
  std::vector<EvalSample> samples;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedJson,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
    EvalSample sample = parse_sample(doc, line_no);
    if (!ids.insert(sample.id).second) {
      throw Error(ErrorCode::DuplicateSampleId,
                  "line " + std::to_string(line_no) + ": sample id '" + sample.id +
                      "' already seen");
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

std::string to_jsonl_line(const EvalSample& sample) {
  json doc;
  doc["id"] = sample.id;
  doc["question"] = sample.question;
  if (sample.reference_answers.size() == 1) {
    doc["reference_answer"] = sample.reference_answers.front();
  } else {
    doc["reference_answer"] = sample.reference_answers;
  }
  json responses = json::array();
  for (const auto& r : sample.responses) {
    json entry = {{"response_id", r.response_id},
                  {"model_name", r.model_name},
                  {"text", r.text}};
    if (r.empty_text_ok) entry["allow_empty"] = true;
    responses.push_back(std::move(entry));
  }
  doc["responses"] = std::move(responses);
  if (sample.gold_ranking) doc["gold_ranking"] = *sample.gold_ranking;
  if (sample.kind) doc["kind"] = to_string(*sample.kind);
  return doc.dump();
}

void write_dataset(const std::filesystem::path& path,
                   const std::vector<EvalSample>& samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::Config, "cannot write dataset: " + path.string());
  }
  for (const auto& sample : samples) out << to_jsonl_line(sample) << "\n";
}

DatasetManifest dataset_stats(const std::vector<EvalSample>& samples,
                              const std::string& name,
                              const std::string& language) {
  if (samples.empty()) {
    throw Error(ErrorCode::EmptyDataset, "no samples");
  }
  DatasetManifest m;
  m.name = name;
  m.language = language;
  m.samples = samples.size();
  m.min_responses = samples.front().responses.size();
  m.max_responses = samples.front().responses.size();
  for (const auto& sample : samples) {
    if (!sample.kind) {
      ++m.unknown_kind_count;
    } else if (*sample.kind == QuestionKind::Factoid) {
      ++m.factoid_count;
    } else {
      ++m.nonfactoid_count;
    }
    m.min_responses = std::min(m.min_responses, sample.responses.size());
    m.max_responses = std::max(m.max_responses, sample.responses.size());
  }
  return m;
}

std::string manifest_to_json(const DatasetManifest& manifest) {
  json doc = {
      {"name", manifest.name},
      {"language", manifest.language},
      {"samples", manifest.samples},
      {"factoid_count", manifest.factoid_count},
      {"nonfactoid_count", manifest.nonfactoid_count},
      {"unknown_kind_count", manifest.unknown_kind_count},
      {"min_responses", manifest.min_responses},
      {"max_responses", manifest.max_responses},
  };
  return doc.dump(2);
}

std::vector<std::vector<EvalSample>> subset_replicates(
    const std::vector<EvalSample>& samples, std::size_t k, std::size_t replicates,
    uint64_t seed) {
  if (k > samples.size()) {
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " exceeds " +
                                          std::to_string(samples.size()) + " samples");
  }
  std::vector<std::vector<EvalSample>> subsets;
  subsets.reserve(replicates);
  for (std::size_t r = 0; r < replicates; ++r) {
    std::mt19937_64 rng(seed ^ fnv1a64("replicate-" + std::to_string(r)));
    std::vector<std::size_t> idx(samples.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    // partial Fisher-Yates; modulo keeps the draw platform-stable
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    std::vector<EvalSample> subset;
    subset.reserve(k);
    for (std::size_t i : idx) subset.push_back(samples[i]);
    subsets.push_back(std::move(subset));
  }
  return subsets;
}

}  // namespace minoseval
