#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dentist/backends.hpp"
#include "dentist/templates.hpp"
#include "dentist/treatment.hpp"
#include "dentist/types.hpp"

namespace dentist {

// One pass of the validation loop: answer in, corrected answer out, plus the
// convergence verdict comparing the two.
struct IterationRecord {
    int index = 0;  // 1-based, consecutive within a transcript
    std::string input_answer;
    std::string output_answer;
    bool similar = false;
    TreatmentOutcome treatment;
};

enum class Termination {
    Converged,
    MaxIterations,
    Error,
};

const char* to_string(Termination t);

// Full audit trail of one validation-loop run.
struct VerificationTranscript {
    std::string query_id;
    QueryClass query_class;
    Answer original;
    std::vector<IterationRecord> iterations;
    Answer final_answer;
    Termination termination = Termination::Converged;
    std::optional<std::string> error;  // present iff termination == Error
};

// Everything a loop run needs besides the record itself.
struct PipelineContext {
    ChatClient& judge;
    VqaClient& lvlm;
    const TemplateSet& templates;
    LoopConfig config;
};

// Leading-token yes/no parse: the first word decides; anything else is
// unparseable.
std::optional<bool> parse_yes_no(const std::string& raw);

// Asks the judge whether two answers convey the same meaning. Unparseable
// output is re-asked up to config.judge_retry_limit times and then resolves
// to not-similar.
bool similar(ChatClient& judge, const TemplateSet& templates, const std::string& a,
             const std::string& b, const LoopConfig& config);

// The validation loop: classify once, then verify up to max_iterations times.
// Convergence returns the answer that entered the converging check (so
// first-iteration convergence returns the original), and exhaustion returns
// the first iteration's output as a guard against snowballing corrections.
// Backend failures terminate with Termination::Error and a partial transcript.
VerificationTranscript dentist_loop(const PipelineContext& ctx, const QueryRecord& record,
                                    const std::string& original);

}  // namespace dentist
