#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dentist/backends.hpp"
#include "dentist/loop.hpp"
#include "dentist/metrics.hpp"
#include "dentist/templates.hpp"
#include "dentist/types.hpp"

namespace dentist {

class CorpusParseError : public Error {
public:
    CorpusParseError(int line, const std::string& message)
        : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
    int line() const { return line_; }

private:
    int line_ = 0;
};

class DuplicateId : public Error {
public:
    explicit DuplicateId(const std::string& id) : Error("duplicate record id: " + id), id_(id) {}
    const std::string& id() const { return id_; }

private:
    std::string id_;
};

// One corpus line. original_answer, when present, lets correction run fully
// offline from recorded model outputs.
struct CorpusRecord {
    QueryRecord query;
    std::optional<std::string> original_answer;
};

// JSON-lines corpus: {"id", "image_ref", "query_text", "ground_truth"?,
// "category"?, "original_answer"?}. Ids must be unique.
std::vector<CorpusRecord> load_query_records(const std::string& path);

// ---------------------------------------------------------------------------
// Backend configuration
// ---------------------------------------------------------------------------

// All clients a run needs. When the configuration names a cache directory (or
// DENTIST_CACHE_DIR is set), judge and lvlm are cache-wrapped; lvlm_uncached
// always bypasses the cache so repeated-response baselines draw fresh samples.
struct BackendSet {
    std::shared_ptr<ChatClient> judge;
    std::shared_ptr<VqaClient> lvlm;
    std::shared_ptr<VqaClient> lvlm_uncached;
    // Set when the corresponding client is scripted; exposes call logs.
    std::shared_ptr<ScriptedBackend> scripted_judge;
    std::shared_ptr<ScriptedBackend> scripted_lvlm;
    std::shared_ptr<ResponseCache> cache;
};

// Backend config file:
//   {"judge": {"type": "http-chat"|"scripted", ...},
//    "lvlm":  {"type": "http-vqa"|"scripted", ...},
//    "cache_dir": "path"?}
// Scripted entries reference a script file ({"script": "path"}) or inline
// content ({"inline": {...}}); when judge and lvlm share a script source they
// share one backend instance.
BackendSet load_backends(const std::string& config_path);
BackendSet backends_from_json(const nlohmann::json& config, const std::string& base_dir);

// Script document: {"strict"?: bool, "identity"?: str,
//   "chat": {request-key: response | [responses...]},
//   "vqa":  [{"image_ref": "img"|"*", "question": key,
//             "response": response | [responses...]}]}
std::shared_ptr<ScriptedBackend> scripted_from_json(const nlohmann::json& script);
std::shared_ptr<ScriptedBackend> load_script(const std::string& path);

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

enum class RunMode {
    Correct,
    DirectRejection,
    RepeatedCorrection,
};

const char* to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& s);

struct RunConfig {
    std::string corpus_path;
    std::string backend_config_path;
    std::optional<std::string> template_path;
    LoopConfig loop;
    int concurrency = 1;
    std::string out_dir;
    RunMode mode = RunMode::Correct;
    int repeats = 10;  // responses drawn per sample in baseline modes
    std::optional<std::uint64_t> seed;
};

struct RunCounts {
    long processed = 0;
    long converged = 0;
    long exhausted = 0;
    long errored = 0;
};

struct RunManifest {
    std::string run_id;
    nlohmann::json config_snapshot;
    std::map<std::string, std::string> template_hashes;
    std::vector<std::string> backend_identities;
    std::string started_at;
    std::string finished_at;
    RunCounts counts;
};

nlohmann::json manifest_to_json(const RunManifest& manifest);

// Transcript lines carry a versioned schema field and round-trip losslessly.
nlohmann::json transcript_to_json(const VerificationTranscript& transcript);
VerificationTranscript transcript_from_json(const nlohmann::json& j);

// Runs the validation loop over the whole corpus. Original answers come from
// the corpus when recorded and from the LVLM otherwise. Transcript lines are
// flushed incrementally to <out>/transcripts.jsonl.partial as records finish,
// then rewritten sorted by query id as <out>/transcripts.jsonl; the manifest
// lands in <out>/manifest.json. Per-record failures terminate that record's
// transcript with an error, never the run.
RunManifest run_correction(const RunConfig& config);

// Decides whether a response is an acceptable answer for the record.
using CorrectnessOracle = std::function<bool(const QueryRecord&, const std::string&)>;

// Judges correctness by comparing normalized yes/no of response and ground
// truth; records without ground truth are rejected up front.
CorrectnessOracle yes_no_oracle();

struct BaselineReport {
    RunMode mode = RunMode::DirectRejection;
    int repeats = 0;
    long n_samples = 0;
    long n_evaluations = 0;  // DR: one per sample; RC: one per (sample, repeat)
    long n_correct = 0;
    long n_errors = 0;  // RC loops that terminated with an error
    double accuracy = 0.0;
    // The same evaluations as a yes/no confusion matrix.
    PopeReport pope;
};

// Repeated-response baselines: draws `repeats` responses per sample from the
// uncached LVLM. DirectRejection counts a sample correct iff some response is
// correct, selecting the lowest-index correct response; RepeatedCorrection
// runs the full correction loop on every response and scores each corrected
// response independently.
BaselineReport run_repeated_baseline(const RunConfig& config, const CorrectnessOracle& correct);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

enum class ReportFormat {
    Table,
    Json,
};

ReportFormat report_format_from_string(const std::string& s);

// Tagged JSON representations ("kind" selects the table layout); JSON mode
// round-trips losslessly.
nlohmann::json report_to_json(const PopeReport& report);
nlohmann::json report_to_json(const ChairReport& report);
nlohmann::json report_to_json(const CategoryReport& report);
nlohmann::json report_to_json(const BaselineReport& report);

PopeReport pope_report_from_json(const nlohmann::json& j);
ChairReport chair_report_from_json(const nlohmann::json& j);
CategoryReport category_report_from_json(const nlohmann::json& j);
BaselineReport baseline_report_from_json(const nlohmann::json& j);

// Renders any tagged report JSON in the requested format.
std::string render_report(const nlohmann::json& report, ReportFormat format);

// Writes the rendered report to a file; field ordering is deterministic.
void write_report(const nlohmann::json& report, ReportFormat format, const std::string& path);

// ---------------------------------------------------------------------------
// Evaluation-file loaders
// ---------------------------------------------------------------------------

// {"image_id": ..., "caption": ...} per line.
std::vector<std::pair<std::string, std::string>> load_captions(const std::string& path);
// {"image_id": ..., "ground_truth_objects": [...]} per line.
std::map<std::string, ChairAnnotation> load_chair_annotations(const std::string& path);
// {"question_id", "image_ref", "question", "label", "setting"} per line.
std::vector<PopeSample> load_pope_samples(const std::string& path);
// {"question_id": ..., "answer": ...} per line.
std::vector<std::pair<std::string, std::string>> load_predictions(const std::string& path);

}  // namespace dentist
