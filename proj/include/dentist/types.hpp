#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace dentist {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One evaluation item: a query about an image, optionally with a known answer.
struct QueryRecord {
    std::string id;                           // non-empty, unique within a corpus
    std::string image_ref;                    // path or URI
    std::string query_text;                   // non-empty
    std::optional<std::string> ground_truth;
    std::optional<std::string> category;      // e.g. an ability name for per-category accuracy
};

enum class QueryVariant {
    Perception,
    Reasoning,
};

// Result of routing a query to its verification treatment.
struct QueryClass {
    QueryVariant variant = QueryVariant::Perception;
    // Raw judge output (or a fallback note) retained for audit.
    std::optional<std::string> confidence_note;
};

inline const char* to_string(QueryVariant v) {
    return v == QueryVariant::Perception ? "perception" : "reasoning";
}

enum class Provenance {
    Original,
    Corrected,
};

// A model answer with provenance. iteration == 0 iff provenance == Original.
struct Answer {
    std::string text;
    Provenance provenance = Provenance::Original;
    int iteration = 0;

    static Answer original(std::string text) {
        return Answer{std::move(text), Provenance::Original, 0};
    }
    static Answer corrected(std::string text, int iteration) {
        return Answer{std::move(text), Provenance::Corrected, iteration};
    }
};

inline const char* to_string(Provenance p) {
    return p == Provenance::Original ? "original" : "corrected";
}

// A verification sub-question together with the model's answer to it.
struct SubQA {
    std::string question;  // non-empty
    std::string answer;
};

// Knobs of the validation loop.
struct LoopConfig {
    int max_iterations = 3;     // loop cap T
    int sub_question_cap = 5;   // bound on generated sub-questions
    int judge_retry_limit = 1;  // re-asks on unparseable judge output
    // When true, convergence returns the post-check answer instead of the
    // pre-check one. Off by default: the loop returns the answer that was
    // input to the converging check.
    bool return_post_check = false;
};

}  // namespace dentist
