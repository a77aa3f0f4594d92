#include "dentist/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace dentist {

namespace {

std::string lowercased(const std::string& s) {
    std::string out(s.size(), '\0');
    std::transform(s.begin(), s.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

std::vector<std::string> word_tokens(const std::string& lowered) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < lowered.size()) {
        if (!is_word_char(lowered[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < lowered.size() && is_word_char(lowered[j])) {
            ++j;
        }
        tokens.push_back(lowered.substr(i, j - i));
        i = j;
    }
    return tokens;
}

// Token-sequence matcher over the lexicon's surface forms.
class LexiconMatcher {
public:
    explicit LexiconMatcher(const ObjectLexicon& lexicon) {
        for (const auto& canonical : lexicon.canonical_objects) {
            add_surface(canonical, canonical);
        }
        for (const auto& [surface, canonical] : lexicon.synonym_map) {
            add_surface(surface, canonical);
        }
        for (auto& [first, candidates] : by_first_token_) {
            std::sort(candidates.begin(), candidates.end(), [](const Surface& a, const Surface& b) {
                if (a.tokens.size() != b.tokens.size()) {
                    return a.tokens.size() > b.tokens.size();  // longest match first
                }
                return a.tokens < b.tokens;
            });
        }
    }

    std::vector<std::string> extract(const std::string& text) const {
        std::vector<std::string> mentions;
        const auto tokens = word_tokens(lowercased(text));
        std::size_t i = 0;
        while (i < tokens.size()) {
            auto it = by_first_token_.find(tokens[i]);
            if (it != by_first_token_.end()) {
                bool matched = false;
                for (const Surface& surface : it->second) {
                    if (matches_at(tokens, i, surface.tokens)) {
                        mentions.push_back(surface.canonical);
                        i += surface.tokens.size();
                        matched = true;
                        break;
                    }
                }
                if (matched) {
                    continue;
                }
            }
            ++i;
        }
        return mentions;
    }

private:
    struct Surface {
        std::vector<std::string> tokens;
        std::string canonical;
    };

    void add_surface(const std::string& surface, const std::string& canonical) {
        auto tokens = word_tokens(lowercased(surface));
        if (tokens.empty()) {
            return;
        }
        by_first_token_[tokens.front()].push_back(Surface{std::move(tokens), canonical});
    }

    static bool matches_at(const std::vector<std::string>& tokens, std::size_t at,
                           const std::vector<std::string>& surface) {
        if (at + surface.size() > tokens.size()) {
            return false;
        }
        for (std::size_t k = 0; k < surface.size(); ++k) {
            if (tokens[at + k] != surface[k]) {
                return false;
            }
        }
        return true;
    }

    std::unordered_map<std::string, std::vector<Surface>> by_first_token_;
};

double ratio_or_zero(long numerator, long denominator) {
    return denominator == 0 ? 0.0 : static_cast<double>(numerator) / static_cast<double>(denominator);
}

// First word-boundary occurrence of `word` (letters-only boundary), or npos.
std::size_t find_word(const std::string& haystack, const std::string& word) {
    std::size_t pos = 0;
    while ((pos = haystack.find(word, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || std::isalpha(static_cast<unsigned char>(haystack[pos - 1])) == 0;
        std::size_t end = pos + word.size();
        bool right_ok =
            end >= haystack.size() || std::isalpha(static_cast<unsigned char>(haystack[end])) == 0;
        if (left_ok && right_ok) {
            return pos;
        }
        pos += 1;
    }
    return std::string::npos;
}

const std::set<std::string>& abbreviation_allowlist() {
    static const std::set<std::string> allow = {
        "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "vs", "etc", "fig", "al",
    };
    return allow;
}

}  // namespace

void ObjectLexicon::validate() const {
    for (const auto& [surface, canonical] : synonym_map) {
        if (canonical_objects.find(canonical) == canonical_objects.end()) {
            throw Error("lexicon synonym \"" + surface + "\" maps to unknown object \"" +
                        canonical + "\"");
        }
    }
}

ObjectLexicon parse_lexicon(const std::string& file_contents) {
    ObjectLexicon lexicon;
    std::istringstream in(file_contents);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') {
            continue;
        }
        std::size_t tab = stripped.find('\t');
        std::string canonical = lowercased(trim(stripped.substr(0, tab)));
        if (canonical.empty()) {
            throw Error("lexicon line " + std::to_string(line_no) + ": empty canonical object");
        }
        lexicon.canonical_objects.insert(canonical);
        if (tab == std::string::npos) {
            continue;
        }
        std::istringstream synonyms(stripped.substr(tab + 1));
        std::string synonym;
        while (std::getline(synonyms, synonym, ',')) {
            std::string surface = lowercased(trim(synonym));
            if (!surface.empty()) {
                lexicon.synonym_map[surface] = canonical;
            }
        }
    }
    lexicon.validate();
    return lexicon;
}

ObjectLexicon load_lexicon(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open lexicon file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_lexicon(buf.str());
}

std::vector<std::string> split_sentences(const std::string& caption) {
    std::vector<std::string> sentences;
    const std::size_t n = caption.size();
    std::size_t start = 0;
    std::size_t i = 0;

    auto emit = [&](std::size_t end) {
        std::string segment = trim(caption.substr(start, end - start));
        if (!segment.empty()) {
            sentences.push_back(std::move(segment));
        }
        start = end;
    };

    while (i < n) {
        char c = caption[i];
        if (c != '.' && c != '!' && c != '?') {
            ++i;
            continue;
        }
        bool boundary = true;
        if (c == '.') {
            // Decimal point
            if (i > 0 && i + 1 < n && std::isdigit(static_cast<unsigned char>(caption[i - 1])) &&
                std::isdigit(static_cast<unsigned char>(caption[i + 1]))) {
                boundary = false;
            } else {
                // Abbreviations and initials do not end a sentence.
                std::size_t w = i;
                while (w > 0 && std::isalpha(static_cast<unsigned char>(caption[w - 1])) != 0) {
                    --w;
                }
                std::size_t len = i - w;
                if (len == 1) {
                    boundary = false;
                } else if (len > 1) {
                    std::string word = lowercased(caption.substr(w, len));
                    if (abbreviation_allowlist().count(word) > 0) {
                        boundary = false;
                    }
                }
            }
        }
        if (!boundary) {
            ++i;
            continue;
        }
        // Fold a run of terminal punctuation ("?!", "...") into one boundary.
        std::size_t end = i + 1;
        while (end < n && (caption[end] == '.' || caption[end] == '!' || caption[end] == '?')) {
            ++end;
        }
        emit(end);
        i = end;
    }
    emit(n);
    return sentences;
}

std::vector<std::string> extract_objects(const std::string& text, const ObjectLexicon& lexicon) {
    lexicon.validate();
    return LexiconMatcher(lexicon).extract(text);
}

ChairReport chair_scores(const std::vector<std::pair<std::string, std::string>>& captions,
                         const std::map<std::string, ChairAnnotation>& annotations,
                         const ObjectLexicon& lexicon, const ChairOptions& options) {
    lexicon.validate();
    LexiconMatcher matcher(lexicon);
    ChairReport report;

    for (const auto& [image_id, text] : captions) {
        auto it = annotations.find(image_id);
        if (it == annotations.end()) {
            throw MissingAnnotation(image_id);
        }
        const auto& truth = it->second.ground_truth_objects;
        for (const auto& object : truth) {
            if (lexicon.canonical_objects.count(object) == 0) {
                throw Error("annotation for " + image_id + " lists non-lexicon object: " + object);
            }
        }

        auto hallucinated = [&](const std::string& object) { return truth.count(object) == 0; };

        for (const auto& mention : matcher.extract(text)) {
            report.n_mentions += 1;
            if (hallucinated(mention)) {
                report.n_hallucinated_mentions += 1;
            }
        }

        if (options.caption_level) {
            report.n_sentences += 1;
            auto mentions = matcher.extract(text);
            if (std::any_of(mentions.begin(), mentions.end(), hallucinated)) {
                report.n_hallucinated_sentences += 1;
            }
        } else {
            for (const auto& sentence : split_sentences(text)) {
                report.n_sentences += 1;
                auto mentions = matcher.extract(sentence);
                if (std::any_of(mentions.begin(), mentions.end(), hallucinated)) {
                    report.n_hallucinated_sentences += 1;
                }
            }
        }
    }

    report.chair_s = ratio_or_zero(report.n_hallucinated_sentences, report.n_sentences);
    report.chair_i = ratio_or_zero(report.n_hallucinated_mentions, report.n_mentions);
    return report;
}

YesNo normalize_yes_no(const std::string& model_text) {
    std::string lowered = lowercased(model_text);
    std::size_t yes_pos = find_word(lowered, "yes");
    if (yes_pos == std::string::npos) {
        return YesNo::No;
    }
    std::size_t no_pos = find_word(lowered, "no");
    if (no_pos != std::string::npos && no_pos < yes_pos) {
        return YesNo::No;
    }
    return YesNo::Yes;
}

const char* to_string(PopeSetting s) {
    switch (s) {
        case PopeSetting::Random: return "random";
        case PopeSetting::Popular: return "popular";
        case PopeSetting::Adversarial: return "adversarial";
    }
    return "?";
}

PopeSetting pope_setting_from_string(const std::string& s) {
    std::string lowered = lowercased(s);
    if (lowered == "random") return PopeSetting::Random;
    if (lowered == "popular") return PopeSetting::Popular;
    if (lowered == "adversarial") return PopeSetting::Adversarial;
    throw Error("unknown POPE setting: " + s);
}

PopeReport pope_from_counts(long tp, long fp, long fn, long tn) {
    PopeReport report;
    report.tp = tp;
    report.fp = fp;
    report.fn = fn;
    report.tn = tn;
    const long total = tp + fp + fn + tn;
    report.accuracy = ratio_or_zero(tp + tn, total);
    report.precision = ratio_or_zero(tp, tp + fp);
    report.recall = ratio_or_zero(tp, tp + fn);
    const double pr = report.precision + report.recall;
    report.f1 = pr == 0.0 ? 0.0 : 2.0 * report.precision * report.recall / pr;
    report.yes_rate = ratio_or_zero(tp + fp, total);
    return report;
}

PopeReport pope_scores(const std::vector<std::pair<std::string, YesNo>>& predictions,
                       const std::vector<PopeSample>& samples) {
    if (predictions.size() != samples.size()) {
        throw IdMismatch("predictions and samples differ in size: " +
                         std::to_string(predictions.size()) + " vs " +
                         std::to_string(samples.size()));
    }
    std::map<std::string, YesNo> labels;
    for (const auto& sample : samples) {
        if (!labels.emplace(sample.question_id, sample.label).second) {
            throw IdMismatch("duplicate sample question_id: " + sample.question_id);
        }
    }
    long tp = 0, fp = 0, fn = 0, tn = 0;
    std::set<std::string> seen;
    for (const auto& [question_id, predicted] : predictions) {
        auto it = labels.find(question_id);
        if (it == labels.end()) {
            throw IdMismatch("prediction for unknown question_id: " + question_id);
        }
        if (!seen.insert(question_id).second) {
            throw IdMismatch("duplicate prediction question_id: " + question_id);
        }
        YesNo label = it->second;
        if (predicted == YesNo::Yes) {
            (label == YesNo::Yes ? tp : fp) += 1;
        } else {
            (label == YesNo::Yes ? fn : tn) += 1;
        }
    }
    return pope_from_counts(tp, fp, fn, tn);
}

CategoryReport accuracy_by_category(const std::vector<std::pair<std::string, bool>>& records) {
    CategoryReport report;
    long correct_total = 0;
    for (const auto& [category, correct] : records) {
        auto& stats = report.per_category[category];
        stats.total += 1;
        if (correct) {
            stats.correct += 1;
            correct_total += 1;
        }
    }
    for (auto& [category, stats] : report.per_category) {
        stats.accuracy = ratio_or_zero(stats.correct, stats.total);
    }
    report.n_records = static_cast<long>(records.size());
    report.overall = ratio_or_zero(correct_total, report.n_records);
    return report;
}

}  // namespace dentist
