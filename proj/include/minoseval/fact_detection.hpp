#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "minoseval/backends.hpp"
#include "minoseval/core.hpp"

namespace minoseval {

// One in-context example for the question-type prompt.
struct Demonstration {
  std::string question;
  std::string reference_answer;
  QuestionKind label;
  std::string rationale;
};

// JSONL, one object per line: {"question", "reference_answer", "label",
// "rationale"?} with label "factoid" | "non-factoid".
std::vector<Demonstration> load_demonstrations(const std::filesystem::path& path);

enum class ParseStatus { Clean, Repaired, Defaulted };
const char* to_string(ParseStatus status);

struct ClassificationResult {
  QuestionKind kind;
  std::string raw_model_text;
  ParseStatus parse_status;
};

extern const char* const kClassifySystemPrompt;

ChatRequest build_classify_request(const EvalSample& sample,
                                   const std::vector<Demonstration>& demos,
                                   const std::string& model_id,
                                   const GenerationParams& gen = {});

// Label extraction from model text: strict match on the last non-empty line,
// then case-insensitive substring repair over the whole text, then the
// conservative default (NonFactoid — the listwise branch degrades more
// gracefully on misrouted creative questions than key-point scoring does).
ClassificationResult parse_classification(const std::string& model_text);

// A kind preset on the sample short-circuits the backend call entirely.
// Backend errors propagate; parsing never hard-fails.
ClassificationResult classify_question(const EvalSample& sample,
                                       const std::vector<Demonstration>& demos,
                                       ChatBackend& backend,
                                       const GenerationParams& gen = {});

// Percentage of exact kind matches in [0,100]. Errors: EmptyInput.
double classification_accuracy(
    const std::vector<std::pair<ClassificationResult, QuestionKind>>& results);

}  // namespace minoseval
