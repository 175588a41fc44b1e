#include "minoseval/fact_detection.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "minoseval/text.hpp"

namespace minoseval {

using json = nlohmann::json;

const char* const kClassifySystemPrompt =
    "You are a question-type analyst for open-ended QA evaluation. Decide whether "
    "a question is factoid or non-factoid. A factoid question expects explicit "
    "facts, entities, or common knowledge in its answer, or constrains the key "
    "elements of the answer to a narrow scope. A non-factoid question is judged "
    "on creative or semantic fulfilment and does not require key factual "
    "information. Extra reasoning text inside a response does not change the "
    "question's type. Reply with exactly one word on the last line: factoid or "
    "non-factoid.";

const char* to_string(ParseStatus status) {
  switch (status) {
    case ParseStatus::Clean: return "clean";
    case ParseStatus::Repaired: return "repaired";
    case ParseStatus::Defaulted: return "defaulted";
  }
  return "unknown";
}

std::vector<Demonstration> load_demonstrations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::Config, "cannot open demonstrations file: " + path.string());
  }
  std::vector<Demonstration> demos;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception&) {
      throw Error(ErrorCode::MalformedJson,
                  "demonstrations line " + std::to_string(line_no));
    }
    Demonstration d;
    d.question = doc.value("question", "");
    d.reference_answer = doc.value("reference_answer", "");
    d.rationale = doc.value("rationale", "");
    const auto kind = question_kind_from_string(doc.value("label", ""));
    if (d.question.empty() || d.reference_answer.empty() || !kind) {
      throw Error(ErrorCode::SchemaViolation,
                  "demonstrations line " + std::to_string(line_no) +
                      ": question, reference_answer and a valid label are required");
    }
    d.label = *kind;
    demos.push_back(std::move(d));
  }
  return demos;
}

ChatRequest build_classify_request(const EvalSample& sample,
                                   const std::vector<Demonstration>& demos,
                                   const std::string& model_id,
                                   const GenerationParams& gen) {
  std::string user;
  for (std::size_t i = 0; i < demos.size(); ++i) {
    const auto& d = demos[i];
    user += "Example " + std::to_string(i + 1) + ":\n";
    user += "Question: " + d.question + "\n";
    user += "Reference answer: " + d.reference_answer + "\n";
    user += "Label: " + std::string(to_string(d.label)) + "\n";
    if (!d.rationale.empty()) user += "Reason: " + d.rationale + "\n";
    user += "\n";
  }
  user += "Now classify this sample.\n";
  user += "Question: " + sample.question + "\n";
  user += "Reference answer: " + sample.reference_answer() + "\n";

  ChatRequest req;
  req.system_prompt = kClassifySystemPrompt;
  req.user_prompt = std::move(user);
  req.model_id = model_id;
  req.temperature = gen.temperature;
  req.seed = gen.seed;
  req.max_tokens = gen.max_tokens;
  return req;
}

ClassificationResult parse_classification(const std::string& model_text) {
  // Strict: the label alone on the last non-empty line.
  std::string last_line;
  for (const auto& line : split_lines(model_text)) {
    const std::string t = trim(line);
    if (!t.empty()) last_line = t;
  }
  if (auto kind = question_kind_from_string(last_line)) {
    return {*kind, model_text, ParseStatus::Clean};
  }

  // Repair: case-insensitive substring scan. "non-factoid" first — it
  // contains "factoid".
  if (contains_ci(model_text, "non-factoid") || contains_ci(model_text, "non factoid") ||
      contains_ci(model_text, "nonfactoid")) {
    return {QuestionKind::NonFactoid, model_text, ParseStatus::Repaired};
  }
  if (contains_ci(model_text, "factoid")) {
    return {QuestionKind::Factoid, model_text, ParseStatus::Repaired};
  }

  return {QuestionKind::NonFactoid, model_text, ParseStatus::Defaulted};
}

ClassificationResult classify_question(const EvalSample& sample,
                                       const std::vector<Demonstration>& demos,
                                       ChatBackend& backend,
                                       const GenerationParams& gen) {
  if (sample.kind) {
    return {*sample.kind, "", ParseStatus::Clean};
  }
  const ChatRequest req =
      build_classify_request(sample, demos, backend.model_id(), gen);
  const ChatResponse res = backend.complete(req);
  return parse_classification(res.text);
}

double classification_accuracy(
    const std::vector<std::pair<ClassificationResult, QuestionKind>>& results) {
  if (results.empty()) {
    throw Error(ErrorCode::EmptyInput, "no classification results to score");
  }
  std::size_t correct = 0;
  for (const auto& [result, gold] : results) {
    if (result.kind == gold) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(results.size());
}

}  // namespace minoseval
