#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "minoseval/backends.hpp"
#include "minoseval/core.hpp"

namespace minoseval {

// Five automatically generated exemplar answers, level 5 best. "Silver"
// because no human edits them.
struct SilverInstance {
  int level = 0;  // 1..5
  std::string text;
};

struct SilverInstanceSet {
  std::vector<SilverInstance> instances;  // exactly 5, levels 1..5 each once
  std::string raw_model_text;
};

struct InstanceGenOutcome {
  std::optional<SilverInstanceSet> instances;  // nullopt after a failed retry
  int attempts = 0;
  std::vector<std::string> warnings;
};

extern const char* const kInstanceSystemPrompt;
extern const char* const kListwiseSystemPrompt;

ChatRequest build_instance_request(const EvalSample& sample,
                                   const std::string& model_id,
                                   const GenerationParams& gen = {});

// Throws Error(MalformedInstances) unless exactly five non-empty levels 1..5
// are found.
SilverInstanceSet parse_silver_instances(const std::string& model_text);

// One retry on MalformedInstances, then proceeds without instances (the
// ranking prompt degrades to naive listwise) with a warning.
InstanceGenOutcome generate_silver_instances(const EvalSample& sample,
                                             ChatBackend& backend,
                                             const GenerationParams& gen = {});

// ---------------------------------------------------------------------------
// Listwise ranking core, shared by the instance-aware path and the naive
// listwise baseline.

// Deterministic Fisher-Yates over mt19937_64 (std::shuffle is
// implementation-defined and would break cross-platform reproducibility).
std::vector<std::size_t> shuffled_indices(std::size_t n, uint64_t seed);

// Presentation-order seed for one sample: global seed XOR a stable hash of
// the sample id.
uint64_t listwise_shuffle_seed(uint64_t global_seed, const std::string& sample_id);

struct PermutationParse {
  std::vector<std::size_t> order;  // permutation of 0..n-1
  bool reparsed = false;
};

// Strict grammar: one line of comma-separated zero-based indices, best
// first. The lenient pass accepts bracketed lists, 1-based sequences
// (detected by value range), and scans other lines of the output.
std::optional<PermutationParse> parse_permutation(const std::string& text,
                                                  std::size_t n);

enum class RepairKind { None, Reparsed, Retried, Fallback };
const char* to_string(RepairKind repair);

struct ListwiseVerdict {
  std::vector<std::size_t> order;  // presented-position indices; empty on fallback
  std::string raw_model_text;
  RepairKind repair = RepairKind::None;
  int retries = 0;
};

struct ListwiseOutcome {
  Ranking ranking;
  ListwiseVerdict verdict;
  std::vector<std::size_t> presented_order;  // original index per presented slot
  std::vector<std::string> flags;            // fallback path, if taken
  std::vector<std::string> warnings;
};

ChatRequest build_listwise_request(const EvalSample& sample,
                                   const SilverInstanceSet* instances,
                                   const std::vector<std::size_t>& presented,
                                   const std::string& model_id,
                                   const GenerationParams& gen = {});

// Candidates go out in a seed-deterministic shuffled order; the model's
// index permutation is mapped back to response ids. On persistent
// InvalidPermutation the fallback chain runs: naive listwise without
// instances (skipped when the prompt already had none), pointwise scores
// from the same backend, then input order flagged "ranking-failed". Every
// branch still returns a valid permutation.
ListwiseOutcome rank_listwise(const EvalSample& sample,
                              const SilverInstanceSet* instances,
                              ChatBackend& backend, uint64_t shuffle_seed,
                              Provenance provenance,
                              const GenerationParams& gen = {});

// The non-factoid branch: rank_listwise with instance-aware provenance.
ListwiseOutcome rank_nonfactoid(const EvalSample& sample,
                                const std::optional<SilverInstanceSet>& instances,
                                ChatBackend& backend, uint64_t shuffle_seed,
                                const GenerationParams& gen = {});

}  // namespace minoseval
