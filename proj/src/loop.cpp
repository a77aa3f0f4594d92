#include "dentist/loop.hpp"

#include <cctype>

#include "dentist/classify.hpp"

namespace dentist {

const char* to_string(Termination t) {
    switch (t) {
        case Termination::Converged: return "converged";
        case Termination::MaxIterations: return "max_iterations";
        case Termination::Error: return "error";
    }
    return "?";
}

std::optional<bool> parse_yes_no(const std::string& raw) {
    std::size_t i = 0;
    while (i < raw.size() && std::isalpha(static_cast<unsigned char>(raw[i])) == 0) {
        ++i;
    }
    std::string word;
    while (i < raw.size() && std::isalpha(static_cast<unsigned char>(raw[i])) != 0) {
        word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i]))));
        ++i;
    }
    if (word == "yes") {
        return true;
    }
    if (word == "no") {
        return false;
    }
    return std::nullopt;
}

bool similar(ChatClient& judge, const TemplateSet& templates, const std::string& a,
             const std::string& b, const LoopConfig& config) {
    if (a.empty() || b.empty()) {
        throw Error("similar: empty answer");
    }
    const std::string prompt =
        templates.render(TemplateName::P_sim, {{"answer_a", a}, {"answer_b", b}});
    for (int attempt = 0; attempt <= config.judge_retry_limit; ++attempt) {
        if (auto verdict = parse_yes_no(chat_complete(judge, prompt))) {
            return *verdict;
        }
    }
    return false;
}

VerificationTranscript dentist_loop(const PipelineContext& ctx, const QueryRecord& record,
                                    const std::string& original) {
    if (original.empty()) {
        throw Error("dentist_loop: empty original answer");
    }
    if (ctx.config.max_iterations < 1) {
        throw Error("dentist_loop: max_iterations must be >= 1");
    }

    VerificationTranscript transcript;
    transcript.query_id = record.id;
    transcript.original = Answer::original(original);

    std::string current = original;     // Y_l: the last accepted answer
    int current_iteration = 0;          // which iteration produced Y_l (0 = original)
    std::string first_output;           // Y_i: the first iteration's correction

    auto answer_at = [&](const std::string& text, int iteration) {
        return iteration == 0 ? Answer::original(text) : Answer::corrected(text, iteration);
    };

    try {
        transcript.query_class =
            classify_query(ctx.judge, ctx.templates, record.query_text, ctx.config);

        for (int j = 1; j <= ctx.config.max_iterations; ++j) {
            TreatmentOutcome outcome =
                verify_once(ctx.judge, ctx.lvlm, ctx.templates, record.image_ref,
                            record.query_text, current, transcript.query_class, ctx.config);
            const std::string corrected = outcome.corrected_text;
            if (j == 1) {
                first_output = corrected;
            }
            bool converged = similar(ctx.judge, ctx.templates, current, corrected, ctx.config);
            transcript.iterations.push_back(
                IterationRecord{j, current, corrected, converged, std::move(outcome)});
            if (converged) {
                transcript.termination = Termination::Converged;
                transcript.final_answer = ctx.config.return_post_check
                                              ? Answer::corrected(corrected, j)
                                              : answer_at(current, current_iteration);
                return transcript;
            }
            current = corrected;
            current_iteration = j;
        }

        transcript.termination = Termination::MaxIterations;
        transcript.final_answer = Answer::corrected(first_output, 1);
        return transcript;
    } catch (const std::exception& e) {
        transcript.termination = Termination::Error;
        transcript.error = e.what();
        transcript.final_answer = answer_at(current, current_iteration);
        return transcript;
    }
}

}  // namespace dentist
