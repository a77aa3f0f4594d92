#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "dentist/types.hpp"

namespace dentist {

// The six prompt roles: query classification, sub-question generation,
// sub-answer aggregation, chain-of-thought prefix, reasoning correction,
// and the convergence judge.
enum class TemplateName {
    P_c,
    P_s,
    P_a,
    P_t,
    P_r,
    P_sim,
};

constexpr std::array<TemplateName, 6> kAllTemplateNames = {
    TemplateName::P_c, TemplateName::P_s, TemplateName::P_a,
    TemplateName::P_t, TemplateName::P_r, TemplateName::P_sim,
};

const char* to_string(TemplateName name);
// Throws UnknownTemplateName for anything outside the six known names.
TemplateName template_name_from_string(const std::string& s);

// Placeholder syntax: single-brace named placeholders ({query}, {answer}, ...).
// A literal brace is written doubled: "{{" renders as "{", "}}" as "}".
struct PromptTemplate {
    TemplateName name = TemplateName::P_c;
    std::string template_text;
};

class MissingBinding : public Error {
public:
    explicit MissingBinding(const std::string& placeholder)
        : Error("missing binding for placeholder {" + placeholder + "}"),
          placeholder_(placeholder) {}
    const std::string& placeholder() const { return placeholder_; }

private:
    std::string placeholder_;
};

class UnknownPlaceholder : public Error {
public:
    UnknownPlaceholder(const std::string& placeholder, const std::string& template_name)
        : Error("unknown placeholder {" + placeholder + "} in template " + template_name),
          placeholder_(placeholder) {}
    const std::string& placeholder() const { return placeholder_; }

private:
    std::string placeholder_;
};

class UnknownTemplateName : public Error {
public:
    explicit UnknownTemplateName(const std::string& name)
        : Error("unknown template name: " + name), name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

class TemplateParseError : public Error {
public:
    TemplateParseError(int line, const std::string& message)
        : Error("template file line " + std::to_string(line) + ": " + message),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_ = 0;
};

// Malformed placeholder syntax (unterminated "{") in a template body.
class TemplateSyntaxError : public Error {
public:
    using Error::Error;
};

// Substitutes every {placeholder} in the template with its binding, verbatim.
// Deterministic; throws MissingBinding for an unbound placeholder and
// TemplateSyntaxError for an unterminated "{".
std::string render_template(const PromptTemplate& tpl,
                            const std::map<std::string, std::string>& bindings);

// Placeholder names appearing in the text, in order, duplicates included.
std::vector<std::string> list_placeholders(const std::string& template_text);

// All six templates, keyed by role.
class TemplateSet {
public:
    // Built-in defaults. They satisfy each role's contract; the exact wording
    // is this project's own and can be overridden from a file.
    static TemplateSet defaults();

    const PromptTemplate& get(TemplateName name) const { return templates_[index(name)]; }
    void set(PromptTemplate tpl) { templates_[index(tpl.name)] = std::move(tpl); }

    std::string render(TemplateName name,
                       const std::map<std::string, std::string>& bindings) const {
        return render_template(get(name), bindings);
    }

private:
    static std::size_t index(TemplateName name) { return static_cast<std::size_t>(name); }
    std::array<PromptTemplate, 6> templates_{};
};

// Parses a template override file and merges it onto the defaults: any
// template absent from the file keeps its built-in text.
//
// File format, one section per template name:
//
//   [P_c]
//   ...template text until the next section header...
//
// Blank lines and '#' comments are allowed outside sections; inside a section
// every line belongs to the template verbatim (trailing blank lines trimmed).
// Throws TemplateParseError (with line number), UnknownTemplateName, and
// UnknownPlaceholder when a section uses a placeholder its role does not
// document.
TemplateSet load_templates(const std::string& path);
TemplateSet parse_templates(const std::string& file_contents);

// The set of placeholder names documented for each role; used to validate
// override files at load time.
const std::vector<std::string>& allowed_placeholders(TemplateName name);

}  // namespace dentist
