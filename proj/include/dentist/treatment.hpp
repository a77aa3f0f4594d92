#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dentist/backends.hpp"
#include "dentist/templates.hpp"
#include "dentist/types.hpp"

namespace dentist {

// One verification pass: the corrected answer plus the evidence behind it.
// Perception passes carry sub_qas; reasoning passes carry cot_output.
struct TreatmentOutcome {
    std::string corrected_text;
    QueryClass class_used;
    std::vector<SubQA> sub_qas;
    std::optional<std::string> cot_output;
};

class EmptySubQuestions : public Error {
public:
    using Error::Error;
};

// A sub-question answer failed; index is the 1-based position of the failing
// question.
class SubAnswerError : public Error {
public:
    SubAnswerError(int index, int total, const std::string& cause)
        : Error("sub-question " + std::to_string(index) + " of " + std::to_string(total) +
                " failed: " + cause),
          index_(index) {}
    int index() const { return index_; }

private:
    int index_ = 0;
};

// Asks the judge for verification sub-questions about (query, answer) and
// parses one question per line, ignoring blank lines and list-numbering
// prefixes ("1.", "2)", "-", "*"). At most cap questions are kept.
// Throws EmptySubQuestions when nothing parseable remains.
std::vector<std::string> generate_sub_questions(ChatClient& judge, const TemplateSet& templates,
                                                const std::string& query,
                                                const std::string& answer, int cap);

// Asks the LVLM each question against the image, order-preserving. The LVLM is
// the same backend whose answer is under correction. A failing question aborts
// the batch with its index.
std::vector<SubQA> answer_sub_questions(VqaClient& lvlm, const std::string& image_ref,
                                        const std::vector<std::string>& questions);

// Numbered "Q:/A:" blocks, the serialization fed into the aggregation prompt.
std::string serialize_subqas(const std::vector<SubQA>& sub_qas);

// Feeds the sub-question results and the original answer to the judge and
// returns its corrected answer verbatim. Throws EmptyCompletion when the judge
// returns nothing usable.
std::string aggregate_correction(ChatClient& judge, const TemplateSet& templates,
                                 const std::vector<SubQA>& sub_qas, const std::string& original);

// The literal chain-of-thought prefix, a single space, then the query. Not
// idempotent: an already-prefixed query is prefixed again.
std::string make_cot_query(const std::string& query);

// Perception path: generate sub-questions, answer them, aggregate.
TreatmentOutcome verify_perception(ChatClient& judge, VqaClient& lvlm,
                                   const TemplateSet& templates, const std::string& image_ref,
                                   const std::string& query, const std::string& answer,
                                   const LoopConfig& config);

// Reasoning path: re-query the LVLM with the chain-of-thought prefix, then let
// the judge correct the original answer against the step-by-step response.
TreatmentOutcome verify_reasoning(ChatClient& judge, VqaClient& lvlm,
                                  const TemplateSet& templates, const std::string& image_ref,
                                  const std::string& query, const std::string& answer);

// Dispatches to exactly one path per the already-determined class.
TreatmentOutcome verify_once(ChatClient& judge, VqaClient& lvlm, const TemplateSet& templates,
                             const std::string& image_ref, const std::string& query,
                             const std::string& answer, const QueryClass& query_class,
                             const LoopConfig& config);

}  // namespace dentist
