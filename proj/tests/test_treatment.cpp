#include <doctest.h>

#include "dentist/treatment.hpp"

using namespace dentist;

namespace {

const TemplateSet& templates() {
    static TemplateSet set = TemplateSet::defaults();
    return set;
}

std::string ps_prompt(const std::string& query, const std::string& answer) {
    return templates().render(TemplateName::P_s, {{"query", query}, {"answer", answer}});
}

std::string pa_prompt(const std::vector<SubQA>& sub_qas, const std::string& answer) {
    return templates().render(TemplateName::P_a,
                              {{"subqa_list", serialize_subqas(sub_qas)}, {"answer", answer}});
}

}  // namespace

TEST_CASE("generate_sub_questions parses one question per line") {
    ScriptedBackend judge(true);
    judge.script_chat(ps_prompt("Q", "A"), "1. How many apples?\n2. What color are they?");
    auto questions = generate_sub_questions(judge, templates(), "Q", "A", 5);
    REQUIRE(questions.size() == 2);
    CHECK(questions[0] == "How many apples?");
    CHECK(questions[1] == "What color are they?");
}

TEST_CASE("generate_sub_questions strips list markers and blank lines") {
    ScriptedBackend judge(true);
    judge.script_chat(ps_prompt("Q", "A"), "- first?\n\n* second?\n3) third?\n\xe2\x80\xa2 fourth?");
    auto questions = generate_sub_questions(judge, templates(), "Q", "A", 5);
    REQUIRE(questions.size() == 4);
    CHECK(questions[0] == "first?");
    CHECK(questions[1] == "second?");
    CHECK(questions[2] == "third?");
    CHECK(questions[3] == "fourth?");
}

TEST_CASE("generate_sub_questions truncates to the cap") {
    ScriptedBackend judge(true);
    judge.script_chat(ps_prompt("Q", "A"), "1. a?\n2. b?\n3. c?\n4. d?\n5. e?\n6. f?\n7. g?");
    auto questions = generate_sub_questions(judge, templates(), "Q", "A", 5);
    REQUIRE(questions.size() == 5);
    CHECK(questions.back() == "e?");
}

TEST_CASE("generate_sub_questions errors when nothing parseable remains") {
    ScriptedBackend judge(true);
    judge.script_chat(ps_prompt("Q", "A"), "");
    CHECK_THROWS_AS(generate_sub_questions(judge, templates(), "Q", "A", 5), EmptySubQuestions);
}

TEST_CASE("answer_sub_questions preserves order and cardinality") {
    ScriptedBackend lvlm(true);
    lvlm.script_vqa("img", "How many apples?", "Three apples.");
    lvlm.script_vqa("img", "What color are they?", "Green.");
    auto sub_qas =
        answer_sub_questions(lvlm, "img", {"How many apples?", "What color are they?"});
    REQUIRE(sub_qas.size() == 2);
    CHECK(sub_qas[0].question == "How many apples?");
    CHECK(sub_qas[0].answer == "Three apples.");
    CHECK(sub_qas[1].question == "What color are they?");
    CHECK(sub_qas[1].answer == "Green.");
}

TEST_CASE("answer_sub_questions aborts with the failing index") {
    ScriptedBackend lvlm(true);
    lvlm.script_vqa("img", "a?", "yes");
    lvlm.script_vqa("img", "c?", "yes");
    try {
        answer_sub_questions(lvlm, "img", {"a?", "b?", "c?"});
        FAIL("expected SubAnswerError");
    } catch (const SubAnswerError& e) {
        CHECK(e.index() == 2);
        CHECK(std::string(e.what()).find("2 of 3") != std::string::npos);
    }
}

TEST_CASE("serialize_subqas emits numbered Q/A blocks") {
    std::vector<SubQA> sub_qas = {{"How many?", "Three."}, {"What color?", "Red."}};
    CHECK(serialize_subqas(sub_qas) ==
          "1. Q: How many?\n   A: Three.\n2. Q: What color?\n   A: Red.");
}

TEST_CASE("aggregate_correction returns the judge correction verbatim") {
    // The contradicted-count case: sub-answers disagree with the original.
    std::vector<SubQA> sub_qas = {{"How many apples is the person holding?", "Three apples."}};
    std::string original = "There is a person holding two red apples in the picture";
    ScriptedBackend judge(true);
    judge.script_chat(pa_prompt(sub_qas, original),
                      "There is a person holding three red apples in the picture");
    std::string corrected = aggregate_correction(judge, templates(), sub_qas, original);
    CHECK(corrected.find("three") != std::string::npos);
}

TEST_CASE("aggregate_correction keeps confirmed answers unchanged") {
    std::vector<SubQA> sub_qas = {{"Is there a dog?", "Yes."}};
    std::string original = "A dog sits on the grass.";
    ScriptedBackend judge(true);
    judge.script_chat(pa_prompt(sub_qas, original), original);
    CHECK(aggregate_correction(judge, templates(), sub_qas, original) == original);
}

TEST_CASE("aggregate_correction rejects empty input and empty output") {
    ScriptedBackend judge(true);
    CHECK_THROWS_AS(aggregate_correction(judge, templates(), {}, "orig"), Error);

    std::vector<SubQA> sub_qas = {{"q?", "a"}};
    judge.script_chat(pa_prompt(sub_qas, "orig"), "  \n ");
    CHECK_THROWS_AS(aggregate_correction(judge, templates(), sub_qas, "orig"), EmptyCompletion);
}

TEST_CASE("make_cot_query prepends the literal prefix") {
    CHECK(make_cot_query("Is he a farmer?") == "Let's think step by step. Is he a farmer?");
}

TEST_CASE("make_cot_query is a literal prepend, not idempotent") {
    std::string once = make_cot_query("Q?");
    CHECK(make_cot_query(once) == "Let's think step by step. Let's think step by step. Q?");
    CHECK_THROWS_AS(make_cot_query(""), Error);
}

TEST_CASE("verify_reasoning corrects against the step-by-step response") {
    // The misread-occupation case: the step-by-step pass identifies a chef.
    std::string query = "What is the profession of the person?";
    std::string original = "The person is a farmer.";
    std::string cot = "The person wears a white uniform and a toque and stands at a stove, "
                      "so the person is a chef.";

    ScriptedBackend lvlm(true);
    lvlm.script_vqa("img", make_cot_query(query), cot);
    ScriptedBackend judge(true);
    judge.script_chat(
        templates().render(TemplateName::P_r,
                           {{"cot_output", cot}, {"answer", original}, {"query", query}}),
        "The person is a chef.");

    TreatmentOutcome outcome = verify_reasoning(judge, lvlm, templates(), "img", query, original);
    CHECK(outcome.corrected_text == "The person is a chef.");
    CHECK(outcome.corrected_text.find("farmer") == std::string::npos);
    REQUIRE(outcome.cot_output.has_value());
    CHECK(*outcome.cot_output == cot);
    CHECK(outcome.sub_qas.empty());
}

TEST_CASE("verify_reasoning leaves agreeing answers unchanged") {
    std::string query = "Why is the road wet?";
    std::string original = "It rained recently.";
    std::string cot = "Puddles and clouds suggest it rained recently.";
    ScriptedBackend lvlm(true);
    lvlm.script_vqa("*", make_cot_query(query), cot);
    ScriptedBackend judge(true);
    judge.script_chat(
        templates().render(TemplateName::P_r,
                           {{"cot_output", cot}, {"answer", original}, {"query", query}}),
        original);
    TreatmentOutcome outcome = verify_reasoning(judge, lvlm, templates(), "img", query, original);
    CHECK(outcome.corrected_text == original);
}

TEST_CASE("verify_reasoning propagates LVLM misses") {
    ScriptedBackend lvlm(true);
    ScriptedBackend judge(true);
    CHECK_THROWS_AS(verify_reasoning(judge, lvlm, templates(), "img", "Q?", "A"), ScriptMiss);
}

TEST_CASE("verify_once dispatches exclusively by class") {
    std::string query = "How many apples?";
    std::string answer = "Two apples.";
    LoopConfig config;

    SUBCASE("perception path never issues a chain-of-thought call") {
        ScriptedBackend backend(true);
        backend.script_chat(ps_prompt(query, answer), "1. How many apples are visible?");
        backend.script_vqa("img", "How many apples are visible?", "Three.");
        std::vector<SubQA> expected_qas = {{"How many apples are visible?", "Three."}};
        backend.script_chat(pa_prompt(expected_qas, answer), "Three apples.");

        TreatmentOutcome outcome =
            verify_once(backend, backend, templates(), "img", query, answer,
                        QueryClass{QueryVariant::Perception, {}}, config);
        CHECK(!outcome.sub_qas.empty());
        CHECK(!outcome.cot_output.has_value());
        for (const auto& call : backend.calls()) {
            if (call.kind == ScriptedBackend::Call::Kind::Vqa) {
                CHECK(call.request.find("Let's think step by step.") == std::string::npos);
            }
        }
    }

    SUBCASE("reasoning path never generates sub-questions") {
        ScriptedBackend backend(true);
        backend.script_vqa("img", make_cot_query(query), "I count three apples.");
        backend.script_chat("Step-by-step response:", "Three apples.");

        TreatmentOutcome outcome =
            verify_once(backend, backend, templates(), "img", query, answer,
                        QueryClass{QueryVariant::Reasoning, {}}, config);
        CHECK(outcome.sub_qas.empty());
        CHECK(outcome.cot_output.has_value());
        for (const auto& call : backend.calls()) {
            if (call.kind == ScriptedBackend::Call::Kind::Chat) {
                CHECK(call.request.find("generate verification sub-questions") ==
                      std::string::npos);
            }
        }
    }
}

TEST_CASE("verify_once surfaces empty sub-question batches with context") {
    ScriptedBackend backend(true);
    backend.script_chat(ps_prompt("Q?", "A"), "\n\n");
    LoopConfig config;
    CHECK_THROWS_AS(verify_once(backend, backend, templates(), "img", "Q?", "A",
                                QueryClass{QueryVariant::Perception, {}}, config),
                    EmptySubQuestions);
}

TEST_CASE("sub-question count never exceeds the configured cap") {
    ScriptedBackend backend(true);
    backend.script_chat(ps_prompt("Q?", "A"), "1. a?\n2. b?\n3. c?");
    backend.script_vqa("*", "", "yes");  // empty key matches any question
    backend.script_chat("Treat them as ground truth", "fixed");
    LoopConfig config;
    config.sub_question_cap = 2;
    TreatmentOutcome outcome = verify_once(backend, backend, templates(), "img", "Q?", "A",
                                           QueryClass{QueryVariant::Perception, {}}, config);
    CHECK(outcome.sub_qas.size() == 2);
}
