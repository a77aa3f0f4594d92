#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dentist/types.hpp"

namespace dentist {

// Canonical object vocabulary plus surface-form synonyms, both lowercased.
struct ObjectLexicon {
    std::set<std::string> canonical_objects;
    // surface form -> canonical object; multi-word surfaces allowed
    std::map<std::string, std::string> synonym_map;

    // Throws Error when a synonym maps outside canonical_objects.
    void validate() const;

    // The stock 80-object captioning vocabulary with a practical synonym
    // table; overridable via load_lexicon.
    static const ObjectLexicon& default_lexicon();
};

// Lexicon file: UTF-8 lines "canonical<TAB>synonym1,synonym2,...". Synonyms
// are optional; '#' lines and blank lines are skipped.
ObjectLexicon parse_lexicon(const std::string& file_contents);
ObjectLexicon load_lexicon(const std::string& path);

struct ChairAnnotation {
    std::string image_id;
    std::set<std::string> ground_truth_objects;  // subset of the lexicon canonicals
};

struct ChairReport {
    double chair_s = 0.0;  // hallucinated sentences / all sentences
    double chair_i = 0.0;  // hallucinated mentions / all mentions
    long n_sentences = 0;
    long n_hallucinated_sentences = 0;
    long n_mentions = 0;
    long n_hallucinated_mentions = 0;
};

struct ChairOptions {
    // The sentence-level score divides by sentences, per the formula this
    // project implements. The original captioning convention divides by
    // captions; enabling this switches to that convention (the sentence
    // counters then hold caption counts).
    bool caption_level = false;
};

class MissingAnnotation : public Error {
public:
    explicit MissingAnnotation(const std::string& image_id)
        : Error("no annotation for image_id: " + image_id), image_id_(image_id) {}
    const std::string& image_id() const { return image_id_; }

private:
    std::string image_id_;
};

class IdMismatch : public Error {
public:
    using Error::Error;
};

// Splits on terminal punctuation (. ! ?) outside a small abbreviation
// allowlist; segments are trimmed and empties dropped.
std::vector<std::string> split_sentences(const std::string& caption);

// Lowercases the text and matches lexicon surface forms with
// longest-match-first word-boundary matching; returns one canonical object per
// mention, in text order. Matched words are consumed, so "hot dog" never also
// counts a "dog".
std::vector<std::string> extract_objects(const std::string& text, const ObjectLexicon& lexicon);

// Corpus-level CHAIR scores. A mention is hallucinated iff its canonical
// object is not in the image's ground truth; a sentence is hallucinated iff it
// contains at least one hallucinated mention. 0/0 ratios are 0 and the raw
// counts are always reported.
ChairReport chair_scores(const std::vector<std::pair<std::string, std::string>>& captions,
                         const std::map<std::string, ChairAnnotation>& annotations,
                         const ObjectLexicon& lexicon, const ChairOptions& options = {});

enum class YesNo {
    Yes,
    No,
};

inline const char* to_string(YesNo v) { return v == YesNo::Yes ? "yes" : "no"; }

// Yes iff a word-boundary "yes" occurs before any word-boundary "no" in the
// lowercased text; everything else (including neither word) is No.
YesNo normalize_yes_no(const std::string& model_text);

enum class PopeSetting {
    Random,
    Popular,
    Adversarial,
};

const char* to_string(PopeSetting s);
PopeSetting pope_setting_from_string(const std::string& s);

// One yes/no object-presence probe.
struct PopeSample {
    std::string question_id;
    std::string image_ref;
    std::string question;
    YesNo label = YesNo::No;
    PopeSetting setting = PopeSetting::Random;
};

struct PopeReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double yes_rate = 0.0;
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;
};

// The metric formulas over an explicit confusion matrix; ratios with a zero
// denominator are 0.
PopeReport pope_from_counts(long tp, long fp, long fn, long tn);

// Scores predictions against samples with Yes as the positive class.
// Predictions and samples must align one-to-one on question_id.
PopeReport pope_scores(const std::vector<std::pair<std::string, YesNo>>& predictions,
                       const std::vector<PopeSample>& samples);

struct CategoryStats {
    long correct = 0;
    long total = 0;
    double accuracy = 0.0;
};

struct CategoryReport {
    std::map<std::string, CategoryStats> per_category;
    double overall = 0.0;  // micro average; 0 on empty input
    long n_records = 0;
};

CategoryReport accuracy_by_category(const std::vector<std::pair<std::string, bool>>& records);

}  // namespace dentist
