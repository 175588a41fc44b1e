#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "minoseval/core.hpp"

namespace minoseval {

struct DatasetManifest {
  std::string name;
  std::string language;
  std::size_t samples = 0;
  std::size_t factoid_count = 0;
  std::size_t nonfactoid_count = 0;
  std::size_t unknown_kind_count = 0;
  std::size_t min_responses = 0;
  std::size_t max_responses = 0;
};

// JSONL, one sample per line:
//   {"id", "question", "reference_answer" (string or array of strings),
//    "responses": [{"response_id", "model_name"?, "text", "allow_empty"?}],
//    "gold_ranking": [ids]?, "kind": "factoid" | "non-factoid"?}
// The whole load is atomic: any error throws and nothing partial escapes.
// Errors: MalformedJson(line), SchemaViolation(line, field), DuplicateSampleId.
std::vector<EvalSample> load_dataset(const std::filesystem::path& path);

// Canonical one-line serialization; load(write(samples)) is a fixed point.
std::string to_jsonl_line(const EvalSample& sample);
void write_dataset(const std::filesystem::path& path,
                   const std::vector<EvalSample>& samples);

// Errors: EmptyDataset.
DatasetManifest dataset_stats(const std::vector<EvalSample>& samples,
                              const std::string& name = "",
                              const std::string& language = "");

std::string manifest_to_json(const DatasetManifest& manifest);

// `replicates` seed-deterministic subsets of size k, sampled without
// replacement; samples keep their dataset order within each subset.
// Errors: KTooLarge.
std::vector<std::vector<EvalSample>> subset_replicates(
    const std::vector<EvalSample>& samples, std::size_t k, std::size_t replicates,
    uint64_t seed);

}  // namespace minoseval
