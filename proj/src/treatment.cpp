#include "dentist/treatment.hpp"

#include <cctype>
#include <sstream>

namespace dentist {

namespace {

constexpr const char* kCotPrefix = "Let's think step by step.";

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Strips one leading list marker: "12.", "3)", "-", "*", "•".
std::string strip_list_prefix(const std::string& line) {
    std::size_t i = 0;
    const std::size_t n = line.size();
    std::size_t digits_end = i;
    while (digits_end < n && std::isdigit(static_cast<unsigned char>(line[digits_end])) != 0) {
        ++digits_end;
    }
    if (digits_end > i && digits_end < n && (line[digits_end] == '.' || line[digits_end] == ')')) {
        i = digits_end + 1;
    } else if (i < n && (line[i] == '-' || line[i] == '*')) {
        i += 1;
    } else if (n - i >= 3 && line.compare(i, 3, "\xe2\x80\xa2") == 0) {  // U+2022 bullet
        i += 3;
    }
    while (i < n && (line[i] == ' ' || line[i] == '\t')) {
        ++i;
    }
    return line.substr(i);
}

}  // namespace

std::vector<std::string> generate_sub_questions(ChatClient& judge, const TemplateSet& templates,
                                                const std::string& query,
                                                const std::string& answer, int cap) {
    if (answer.empty()) {
        throw Error("generate_sub_questions: empty answer");
    }
    if (cap < 1) {
        throw Error("generate_sub_questions: cap must be >= 1");
    }

    const std::string prompt =
        templates.render(TemplateName::P_s, {{"query", query}, {"answer", answer}});
    const std::string raw = chat_complete(judge, prompt);

    std::vector<std::string> questions;
    std::istringstream lines(raw);
    std::string line;
    while (std::getline(lines, line) && static_cast<int>(questions.size()) < cap) {
        std::string question = strip_list_prefix(trim(line));
        if (!question.empty()) {
            questions.push_back(std::move(question));
        }
    }
    if (questions.empty()) {
        throw EmptySubQuestions("judge produced no parseable sub-questions");
    }
    return questions;
}

std::vector<SubQA> answer_sub_questions(VqaClient& lvlm, const std::string& image_ref,
                                        const std::vector<std::string>& questions) {
    if (questions.empty()) {
        throw Error("answer_sub_questions: empty question list");
    }
    std::vector<SubQA> sub_qas;
    sub_qas.reserve(questions.size());
    for (std::size_t i = 0; i < questions.size(); ++i) {
        try {
            sub_qas.push_back(SubQA{questions[i], vqa_answer(lvlm, image_ref, questions[i])});
        } catch (const Error& e) {
            throw SubAnswerError(static_cast<int>(i) + 1, static_cast<int>(questions.size()),
                                 e.what());
        }
    }
    return sub_qas;
}

std::string serialize_subqas(const std::vector<SubQA>& sub_qas) {
    std::ostringstream out;
    for (std::size_t i = 0; i < sub_qas.size(); ++i) {
        if (i != 0) {
            out << '\n';
        }
        out << (i + 1) << ". Q: " << sub_qas[i].question << "\n   A: " << sub_qas[i].answer;
    }
    return out.str();
}

std::string aggregate_correction(ChatClient& judge, const TemplateSet& templates,
                                 const std::vector<SubQA>& sub_qas, const std::string& original) {
    if (sub_qas.empty()) {
        throw Error("aggregate_correction: empty sub-QA list");
    }
    const std::string prompt = templates.render(
        TemplateName::P_a, {{"subqa_list", serialize_subqas(sub_qas)}, {"answer", original}});
    std::string corrected = chat_complete(judge, prompt);
    if (trim(corrected).empty()) {
        throw EmptyCompletion("judge returned an empty correction");
    }
    return corrected;
}

std::string make_cot_query(const std::string& query) {
    if (query.empty()) {
        throw Error("make_cot_query: empty query");
    }
    return std::string(kCotPrefix) + " " + query;
}

TreatmentOutcome verify_perception(ChatClient& judge, VqaClient& lvlm,
                                   const TemplateSet& templates, const std::string& image_ref,
                                   const std::string& query, const std::string& answer,
                                   const LoopConfig& config) {
    auto questions =
        generate_sub_questions(judge, templates, query, answer, config.sub_question_cap);
    auto sub_qas = answer_sub_questions(lvlm, image_ref, questions);
    auto corrected = aggregate_correction(judge, templates, sub_qas, answer);
    return TreatmentOutcome{std::move(corrected), QueryClass{QueryVariant::Perception, {}},
                            std::move(sub_qas), std::nullopt};
}

TreatmentOutcome verify_reasoning(ChatClient& judge, VqaClient& lvlm,
                                  const TemplateSet& templates, const std::string& image_ref,
                                  const std::string& query, const std::string& answer) {
    if (query.empty() || answer.empty()) {
        throw Error("verify_reasoning: empty query or answer");
    }
    const std::string cot_query = templates.render(TemplateName::P_t, {{"query", query}});
    std::string cot_output = vqa_answer(lvlm, image_ref, cot_query);
    const std::string prompt = templates.render(
        TemplateName::P_r,
        {{"cot_output", cot_output}, {"answer", answer}, {"query", query}});
    std::string corrected = chat_complete(judge, prompt);
    return TreatmentOutcome{std::move(corrected), QueryClass{QueryVariant::Reasoning, {}},
                            {}, std::move(cot_output)};
}

TreatmentOutcome verify_once(ChatClient& judge, VqaClient& lvlm, const TemplateSet& templates,
                             const std::string& image_ref, const std::string& query,
                             const std::string& answer, const QueryClass& query_class,
                             const LoopConfig& config) {
    TreatmentOutcome outcome =
        query_class.variant == QueryVariant::Perception
            ? verify_perception(judge, lvlm, templates, image_ref, query, answer, config)
            : verify_reasoning(judge, lvlm, templates, image_ref, query, answer);
    outcome.class_used = query_class;
    return outcome;
}

}  // namespace dentist
