#include <doctest.h>

#include "dentist/templates.hpp"

using namespace dentist;

TEST_CASE("render substitutes placeholders verbatim") {
    PromptTemplate tpl{TemplateName::P_c, "Classify: {query}"};
    CHECK(render_template(tpl, {{"query", "What color?"}}) == "Classify: What color?");
}

TEST_CASE("render handles repeated placeholders") {
    PromptTemplate tpl{TemplateName::P_c, "{a}{a}"};
    CHECK(render_template(tpl, {{"a", "x"}}) == "xx");
}

TEST_CASE("render throws MissingBinding for unbound placeholders") {
    PromptTemplate tpl{TemplateName::P_c, "Hi {name}"};
    CHECK_THROWS_AS(render_template(tpl, {}), MissingBinding);
    try {
        render_template(tpl, {});
    } catch (const MissingBinding& e) {
        CHECK(e.placeholder() == "name");
    }
}

TEST_CASE("doubled braces render as literal braces") {
    PromptTemplate tpl{TemplateName::P_c, "{{\"k\": {v}}}"};
    CHECK(render_template(tpl, {{"v", "1"}}) == "{\"k\": 1}");
}

TEST_CASE("unterminated placeholder is a syntax error") {
    PromptTemplate tpl{TemplateName::P_c, "broken {nam"};
    CHECK_THROWS_AS(render_template(tpl, {{"nam", "x"}}), TemplateSyntaxError);
}

TEST_CASE("render is deterministic") {
    PromptTemplate tpl{TemplateName::P_s, "Q: {query}\nA: {answer}"};
    std::map<std::string, std::string> bindings{{"query", "q"}, {"answer", "a"}};
    CHECK(render_template(tpl, bindings) == render_template(tpl, bindings));
}

TEST_CASE("list_placeholders reports names in order with duplicates") {
    auto names = list_placeholders("{a} {b} {a}");
    REQUIRE(names.size() == 3);
    CHECK(names[0] == "a");
    CHECK(names[1] == "b");
    CHECK(names[2] == "a");
}

namespace {

std::map<std::string, std::string> full_bindings(TemplateName name) {
    std::map<std::string, std::string> bindings;
    for (const auto& placeholder : allowed_placeholders(name)) {
        bindings[placeholder] = "<" + placeholder + ">";
    }
    return bindings;
}

}  // namespace

TEST_CASE("defaults: all six templates render with no residual markers") {
    TemplateSet set = TemplateSet::defaults();
    for (TemplateName name : kAllTemplateNames) {
        CHECK(!set.get(name).template_text.empty());
        std::string rendered = set.render(name, full_bindings(name));
        CHECK(rendered.find('{') == std::string::npos);
        CHECK(rendered.find('}') == std::string::npos);
    }
}

TEST_CASE("default P_t is the literal step-by-step prefix") {
    TemplateSet set = TemplateSet::defaults();
    CHECK(set.render(TemplateName::P_t, {{"query", "Is he a farmer?"}}) ==
          "Let's think step by step. Is he a farmer?");
}

TEST_CASE("empty override file yields the six built-in defaults") {
    TemplateSet defaults = TemplateSet::defaults();
    TemplateSet parsed = parse_templates("");
    for (TemplateName name : kAllTemplateNames) {
        CHECK(parsed.get(name).template_text == defaults.get(name).template_text);
    }
}

TEST_CASE("per-key fallback: overriding only P_c keeps the other five defaults") {
    TemplateSet defaults = TemplateSet::defaults();
    TemplateSet parsed = parse_templates("[P_c]\nPick one: {query}\n");
    CHECK(parsed.get(TemplateName::P_c).template_text == "Pick one: {query}");
    for (TemplateName name : {TemplateName::P_s, TemplateName::P_a, TemplateName::P_t,
                              TemplateName::P_r, TemplateName::P_sim}) {
        CHECK(parsed.get(name).template_text == defaults.get(name).template_text);
    }
}

TEST_CASE("unknown section name is rejected") {
    CHECK_THROWS_AS(parse_templates("[P_x]\nwhatever\n"), UnknownTemplateName);
}

TEST_CASE("content before the first section is a parse error with line number") {
    try {
        parse_templates("# comment ok\nstray text\n[P_c]\n{query}\n");
        FAIL("expected TemplateParseError");
    } catch (const TemplateParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("override with an undocumented placeholder is rejected at load time") {
    CHECK_THROWS_AS(parse_templates("[P_c]\nClassify {query} as {answer}\n"), UnknownPlaceholder);
}

TEST_CASE("multi-line bodies keep interior lines and trim edge blanks") {
    TemplateSet parsed = parse_templates("[P_sim]\n\nFirst: {answer_a}\n\nSecond: {answer_b}\n\n");
    CHECK(parsed.get(TemplateName::P_sim).template_text ==
          "First: {answer_a}\n\nSecond: {answer_b}");
}
