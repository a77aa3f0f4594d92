#include "dentist/classify.hpp"

#include <algorithm>
#include <cctype>

namespace dentist {

namespace {

bool contains_word(const std::string& haystack, const std::string& word) {
    std::size_t pos = 0;
    while ((pos = haystack.find(word, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || std::isalpha(static_cast<unsigned char>(haystack[pos - 1])) == 0;
        std::size_t end = pos + word.size();
        bool right_ok =
            end >= haystack.size() || std::isalpha(static_cast<unsigned char>(haystack[end])) == 0;
        if (left_ok && right_ok) {
            return true;
        }
        pos += 1;
    }
    return false;
}

}  // namespace

std::optional<QueryVariant> parse_class_label(const std::string& raw) {
    std::string lowered(raw.size(), '\0');
    std::transform(raw.begin(), raw.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    bool perception = contains_word(lowered, "perception");
    bool reasoning = contains_word(lowered, "reasoning");
    if (perception == reasoning) {
        return std::nullopt;
    }
    return perception ? QueryVariant::Perception : QueryVariant::Reasoning;
}

QueryClass classify_query(ChatClient& judge, const TemplateSet& templates,
                          const std::string& query, const LoopConfig& config) {
    if (query.empty()) {
        throw Error("classify_query: empty query");
    }
    const std::string prompt = templates.render(TemplateName::P_c, {{"query", query}});

    std::string last_raw;
    for (int attempt = 0; attempt <= config.judge_retry_limit; ++attempt) {
        last_raw = chat_complete(judge, prompt);
        if (auto variant = parse_class_label(last_raw)) {
            return QueryClass{*variant, last_raw};
        }
    }
    return QueryClass{QueryVariant::Perception,
                      "fallback to perception: unparseable judge output: " + last_raw};
}

}  // namespace dentist
