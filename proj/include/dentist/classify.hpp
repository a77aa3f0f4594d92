#pragma once

#include <optional>
#include <string>

#include "dentist/backends.hpp"
#include "dentist/templates.hpp"
#include "dentist/types.hpp"

namespace dentist {

// Case-insensitive word-boundary search for "perception" / "reasoning".
// Exactly one token present decides the class; zero or both yield nullopt.
// Total: never throws.
std::optional<QueryVariant> parse_class_label(const std::string& raw);

// Routes a query by asking the judge to label it. Unparseable judge output is
// re-asked up to config.judge_retry_limit times and then falls back to
// Perception with the fallback recorded in confidence_note. The class is a
// function of the query alone; the validation loop calls this once per query.
QueryClass classify_query(ChatClient& judge, const TemplateSet& templates,
                          const std::string& query, const LoopConfig& config);

}  // namespace dentist
