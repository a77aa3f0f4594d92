#include "dentist/templates.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace dentist {

namespace {

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Shared scanner for render_template / list_placeholders. Calls on_literal for
// literal runs and on_placeholder for each {name}.
template <typename LiteralFn, typename PlaceholderFn>
void scan_template(const std::string& text, LiteralFn on_literal, PlaceholderFn on_placeholder) {
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (c == '{') {
            if (i + 1 < n && text[i + 1] == '{') {
                on_literal('{');
                i += 2;
                continue;
            }
            std::size_t j = i + 1;
            while (j < n && is_name_char(text[j])) {
                ++j;
            }
            if (j == i + 1 || j >= n || text[j] != '}') {
                throw TemplateSyntaxError("malformed placeholder near offset " +
                                          std::to_string(i) + " in: " + text.substr(i, 24));
            }
            on_placeholder(text.substr(i + 1, j - i - 1));
            i = j + 1;
            continue;
        }
        if (c == '}' && i + 1 < n && text[i + 1] == '}') {
            on_literal('}');
            i += 2;
            continue;
        }
        on_literal(c);
        ++i;
    }
}

}  // namespace

const char* to_string(TemplateName name) {
    switch (name) {
        case TemplateName::P_c: return "P_c";
        case TemplateName::P_s: return "P_s";
        case TemplateName::P_a: return "P_a";
        case TemplateName::P_t: return "P_t";
        case TemplateName::P_r: return "P_r";
        case TemplateName::P_sim: return "P_sim";
    }
    return "?";
}

TemplateName template_name_from_string(const std::string& s) {
    for (TemplateName name : kAllTemplateNames) {
        if (s == to_string(name)) {
            return name;
        }
    }
    throw UnknownTemplateName(s);
}

std::string render_template(const PromptTemplate& tpl,
                            const std::map<std::string, std::string>& bindings) {
    std::string out;
    out.reserve(tpl.template_text.size());
    scan_template(
        tpl.template_text,
        [&](char c) { out.push_back(c); },
        [&](const std::string& name) {
            auto it = bindings.find(name);
            if (it == bindings.end()) {
                throw MissingBinding(name);
            }
            out += it->second;
        });
    return out;
}

std::vector<std::string> list_placeholders(const std::string& template_text) {
    std::vector<std::string> names;
    scan_template(
        template_text, [](char) {},
        [&](const std::string& name) { names.push_back(name); });
    return names;
}

const std::vector<std::string>& allowed_placeholders(TemplateName name) {
    static const std::vector<std::string> p_c = {"query"};
    static const std::vector<std::string> p_s = {"query", "answer"};
    static const std::vector<std::string> p_a = {"subqa_list", "answer"};
    static const std::vector<std::string> p_t = {"query"};
    static const std::vector<std::string> p_r = {"cot_output", "answer", "query"};
    static const std::vector<std::string> p_sim = {"answer_a", "answer_b"};
    switch (name) {
        case TemplateName::P_c: return p_c;
        case TemplateName::P_s: return p_s;
        case TemplateName::P_a: return p_a;
        case TemplateName::P_t: return p_t;
        case TemplateName::P_r: return p_r;
        case TemplateName::P_sim: return p_sim;
    }
    return p_c;
}

namespace {

const char* kDefaultPc =
    "You are routing a visual question by the ability it requires.\n"
    "Classify the query below as either \"perception\" (it asks about directly "
    "visible content: objects, counts, colors, attributes, text, scenes) or "
    "\"reasoning\" (it requires inference beyond direct observation: relations, "
    "causes, intentions, identities, predictions).\n"
    "Respond with exactly one word: perception or reasoning.\n"
    "\n"
    "Query: {query}";

const char* kDefaultPs =
    "You are verifying a model's answer to a visual question.\n"
    "Based on the query and the answer below, generate verification sub-questions "
    "that each check one key claim of the answer (an object, a count, a color, an "
    "attribute). Every sub-question must be short and answerable from the image "
    "alone.\n"
    "Write one sub-question per line and nothing else.\n"
    "\n"
    "Query: {query}\n"
    "Answer: {answer}";

const char* kDefaultPa =
    "You are correcting a model's answer to a visual question.\n"
    "The numbered sub-question results below were obtained by asking targeted "
    "questions about the same image. Treat them as ground truth. Rewrite the "
    "original answer so that it is consistent with every result, changing only "
    "what the results contradict. Output only the corrected answer.\n"
    "\n"
    "Sub-question results:\n"
    "{subqa_list}\n"
    "\n"
    "Original answer: {answer}";

const char* kDefaultPt = "Let's think step by step. {query}";

const char* kDefaultPr =
    "You are correcting a model's answer to a visual question.\n"
    "Below is a step-by-step response produced for the same query on the same "
    "image; it exposes the reasoning and the visual details it relies on. Correct "
    "the original answer with it: keep conclusions the step-by-step response "
    "supports and fix those it contradicts. Output only the corrected answer.\n"
    "\n"
    "Query: {query}\n"
    "Step-by-step response: {cot_output}\n"
    "Original answer: {answer}";

const char* kDefaultPsim =
    "Decide whether the two answers below convey the same meaning. Ignore wording "
    "differences; differences in facts, objects, counts, or conclusions count.\n"
    "Respond with exactly one word: yes or no.\n"
    "\n"
    "Answer A: {answer_a}\n"
    "Answer B: {answer_b}";

void validate_placeholders(const PromptTemplate& tpl) {
    const auto& allowed = allowed_placeholders(tpl.name);
    for (const auto& used : list_placeholders(tpl.template_text)) {
        bool ok = false;
        for (const auto& name : allowed) {
            if (name == used) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw UnknownPlaceholder(used, to_string(tpl.name));
        }
    }
}

std::string_view rtrim(std::string_view s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace

TemplateSet TemplateSet::defaults() {
    TemplateSet set;
    set.set({TemplateName::P_c, kDefaultPc});
    set.set({TemplateName::P_s, kDefaultPs});
    set.set({TemplateName::P_a, kDefaultPa});
    set.set({TemplateName::P_t, kDefaultPt});
    set.set({TemplateName::P_r, kDefaultPr});
    set.set({TemplateName::P_sim, kDefaultPsim});
    return set;
}

TemplateSet parse_templates(const std::string& file_contents) {
    TemplateSet set = TemplateSet::defaults();

    std::istringstream in(file_contents);
    std::string line;
    int line_no = 0;

    bool in_section = false;
    TemplateName current = TemplateName::P_c;
    std::vector<std::string> body;

    auto flush = [&]() {
        if (!in_section) {
            return;
        }
        // Trim leading and trailing blank lines; interior lines are verbatim.
        std::size_t first = 0;
        std::size_t last = body.size();
        while (first < last && rtrim(body[first]).empty()) {
            ++first;
        }
        while (last > first && rtrim(body[last - 1]).empty()) {
            --last;
        }
        std::string text;
        for (std::size_t i = first; i < last; ++i) {
            if (i != first) {
                text.push_back('\n');
            }
            std::string_view l = body[i];
            if (!l.empty() && l.back() == '\r') {
                l.remove_suffix(1);
            }
            text += l;
        }
        PromptTemplate tpl{current, std::move(text)};
        validate_placeholders(tpl);
        set.set(std::move(tpl));
        body.clear();
    };

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view trimmed = rtrim(line);
        if (!trimmed.empty() && trimmed.front() == '[' && trimmed.back() == ']') {
            flush();
            std::string name(trimmed.substr(1, trimmed.size() - 2));
            current = template_name_from_string(name);
            in_section = true;
            continue;
        }
        if (!in_section) {
            if (trimmed.empty() || trimmed.front() == '#') {
                continue;
            }
            throw TemplateParseError(line_no, "content before first [section] header");
        }
        body.push_back(line);
    }
    flush();
    return set;
}

TemplateSet load_templates(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open template file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_templates(buf.str());
}

}  // namespace dentist
