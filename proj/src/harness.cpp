#include "dentist/harness.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "dentist/classify.hpp"

namespace dentist {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Calls fn(line_no, parsed) for every non-blank line of a JSON-lines file.
template <typename Fn>
void for_each_jsonl(const std::string& path, Fn fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open file: " + path);
    }
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json parsed;
        try {
            parsed = json::parse(line);
        } catch (const json::exception& e) {
            throw CorpusParseError(line_no, path + ": " + e.what());
        }
        if (!parsed.is_object()) {
            throw CorpusParseError(line_no, path + ": expected a JSON object");
        }
        fn(line_no, parsed);
    }
}

std::string require_string(const json& j, const char* field, int line, const std::string& path) {
    if (!j.contains(field) || !j[field].is_string()) {
        throw CorpusParseError(line, path + ": missing string field \"" + field + "\"");
    }
    return j[field].get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* field, int line,
                                           const std::string& path) {
    if (!j.contains(field) || j[field].is_null()) {
        return std::nullopt;
    }
    if (!j[field].is_string()) {
        throw CorpusParseError(line, path + ": field \"" + field + "\" must be a string");
    }
    return j[field].get<std::string>();
}

std::string now_iso_utc() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

YesNo yes_no_from_json_string(const std::string& s, int line, const std::string& path) {
    std::string lowered;
    for (char c : s) {
        lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (lowered == "yes") return YesNo::Yes;
    if (lowered == "no") return YesNo::No;
    throw CorpusParseError(line, path + ": label must be \"yes\" or \"no\", got \"" + s + "\"");
}

}  // namespace

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

std::vector<CorpusRecord> load_query_records(const std::string& path) {
    std::vector<CorpusRecord> records;
    std::set<std::string> seen_ids;
    for_each_jsonl(path, [&](int line, const json& j) {
        CorpusRecord record;
        record.query.id = require_string(j, "id", line, path);
        record.query.image_ref = require_string(j, "image_ref", line, path);
        record.query.query_text = require_string(j, "query_text", line, path);
        if (record.query.id.empty()) {
            throw CorpusParseError(line, path + ": empty id");
        }
        if (record.query.query_text.empty()) {
            throw CorpusParseError(line, path + ": empty query_text");
        }
        record.query.ground_truth = optional_string(j, "ground_truth", line, path);
        record.query.category = optional_string(j, "category", line, path);
        record.original_answer = optional_string(j, "original_answer", line, path);
        if (!seen_ids.insert(record.query.id).second) {
            throw DuplicateId(record.query.id);
        }
        records.push_back(std::move(record));
    });
    return records;
}

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

std::shared_ptr<ScriptedBackend> scripted_from_json(const json& script) {
    auto backend = std::make_shared<ScriptedBackend>(script.value("strict", true),
                                                     script.value("identity", "scripted"));
    if (script.contains("default_response")) {
        backend->set_default_response(script["default_response"].get<std::string>());
    }
    if (script.contains("chat")) {
        for (const auto& [key, value] : script["chat"].items()) {
            if (value.is_array()) {
                backend->script_chat_sequence(key, value.get<std::vector<std::string>>());
            } else {
                backend->script_chat(key, value.get<std::string>());
            }
        }
    }
    if (script.contains("vqa")) {
        for (const auto& entry : script["vqa"]) {
            std::string image_ref = entry.value("image_ref", "*");
            std::string question = entry.at("question").get<std::string>();
            const auto& response = entry.at("response");
            if (response.is_array()) {
                backend->script_vqa_sequence(image_ref, question,
                                             response.get<std::vector<std::string>>());
            } else {
                backend->script_vqa(image_ref, question, response.get<std::string>());
            }
        }
    }
    return backend;
}

std::shared_ptr<ScriptedBackend> load_script(const std::string& path) {
    json script;
    try {
        script = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw Error("script file " + path + ": " + e.what());
    }
    return scripted_from_json(script);
}

namespace {

EndpointConfig endpoint_from_json(const json& j) {
    EndpointConfig config;
    config.base_url = j.at("base_url").get<std::string>();
    config.path = j.value("path", config.path);
    config.model = j.at("model").get<std::string>();
    config.temperature = j.value("temperature", 0.0);
    config.max_tokens = j.value("max_tokens", 1024);
    config.retry_limit = j.value("retry_limit", 2);
    config.initial_backoff_ms = j.value("initial_backoff_ms", 250);
    config.api_key_env = j.value("api_key_env", std::string("DENTIST_API_KEY"));
    config.timeout_s = j.value("timeout_s", 120);
    return config;
}

// Identifies a scripted config so judge and lvlm sharing a source share one
// backend instance (and one call log).
std::string scripted_source_key(const json& j, const std::string& base_dir) {
    if (j.contains("script")) {
        fs::path p = j["script"].get<std::string>();
        if (p.is_relative() && !base_dir.empty()) {
            p = fs::path(base_dir) / p;
        }
        return "file:" + p.lexically_normal().string();
    }
    return "inline:" + j.value("inline", json::object()).dump();
}

std::shared_ptr<ScriptedBackend> build_scripted(const json& j, const std::string& base_dir) {
    if (j.contains("script")) {
        fs::path p = j["script"].get<std::string>();
        if (p.is_relative() && !base_dir.empty()) {
            p = fs::path(base_dir) / p;
        }
        return load_script(p.string());
    }
    if (j.contains("inline")) {
        return scripted_from_json(j["inline"]);
    }
    throw Error("scripted backend needs \"script\" or \"inline\"");
}

}  // namespace

BackendSet backends_from_json(const json& config, const std::string& base_dir) {
    BackendSet set;

    const json& judge_json = config.at("judge");
    const json& lvlm_json = config.at("lvlm");
    const std::string judge_type = judge_json.at("type").get<std::string>();
    const std::string lvlm_type = lvlm_json.at("type").get<std::string>();

    std::shared_ptr<ScriptedBackend> shared_script;
    if (judge_type == "scripted" && lvlm_type == "scripted" &&
        scripted_source_key(judge_json, base_dir) == scripted_source_key(lvlm_json, base_dir)) {
        shared_script = build_scripted(judge_json, base_dir);
    }

    if (judge_type == "scripted") {
        set.scripted_judge = shared_script ? shared_script : build_scripted(judge_json, base_dir);
        set.judge = set.scripted_judge;
    } else if (judge_type == "http-chat") {
        set.judge = std::make_shared<HttpChatBackend>(endpoint_from_json(judge_json));
    } else {
        throw Error("unknown judge backend type: " + judge_type);
    }

    if (lvlm_type == "scripted") {
        set.scripted_lvlm = shared_script ? shared_script : build_scripted(lvlm_json, base_dir);
        set.lvlm = set.scripted_lvlm;
    } else if (lvlm_type == "http-vqa") {
        set.lvlm = std::make_shared<HttpVqaBackend>(endpoint_from_json(lvlm_json));
    } else {
        throw Error("unknown lvlm backend type: " + lvlm_type);
    }
    set.lvlm_uncached = set.lvlm;

    std::string cache_dir = config.value("cache_dir", std::string());
    if (const char* env = std::getenv("DENTIST_CACHE_DIR"); env != nullptr && *env != '\0') {
        cache_dir = env;
    }
    if (!cache_dir.empty()) {
        fs::path p = cache_dir;
        if (p.is_relative() && !base_dir.empty()) {
            p = fs::path(base_dir) / p;
        }
        set.cache = std::make_shared<ResponseCache>(p);
        set.judge = wrap_with_cache(set.judge, set.cache);
        set.lvlm = wrap_with_cache(set.lvlm, set.cache);
    }
    return set;
}

BackendSet load_backends(const std::string& config_path) {
    json config;
    try {
        config = json::parse(read_file(config_path));
    } catch (const json::exception& e) {
        throw Error("backend config " + config_path + ": " + e.what());
    }
    return backends_from_json(config, fs::path(config_path).parent_path().string());
}

// ---------------------------------------------------------------------------
// Run modes and serialization
// ---------------------------------------------------------------------------

const char* to_string(RunMode mode) {
    switch (mode) {
        case RunMode::Correct: return "correct";
        case RunMode::DirectRejection: return "dr";
        case RunMode::RepeatedCorrection: return "rc";
    }
    return "?";
}

RunMode run_mode_from_string(const std::string& s) {
    if (s == "correct") return RunMode::Correct;
    if (s == "dr" || s == "direct-rejection") return RunMode::DirectRejection;
    if (s == "rc" || s == "repeated-correction") return RunMode::RepeatedCorrection;
    throw Error("unknown run mode: " + s);
}

namespace {

json answer_to_json(const Answer& a) {
    return json{{"text", a.text}, {"provenance", to_string(a.provenance)},
                {"iteration", a.iteration}};
}

Answer answer_from_json(const json& j) {
    Answer a;
    a.text = j.at("text").get<std::string>();
    a.provenance = j.at("provenance").get<std::string>() == "original" ? Provenance::Original
                                                                       : Provenance::Corrected;
    a.iteration = j.at("iteration").get<int>();
    return a;
}

QueryVariant variant_from_string(const std::string& s) {
    if (s == "perception") return QueryVariant::Perception;
    if (s == "reasoning") return QueryVariant::Reasoning;
    throw Error("unknown query class: " + s);
}

json class_to_json(const QueryClass& c) {
    json j{{"variant", to_string(c.variant)}};
    if (c.confidence_note) {
        j["note"] = *c.confidence_note;
    }
    return j;
}

QueryClass class_from_json(const json& j) {
    QueryClass c;
    c.variant = variant_from_string(j.at("variant").get<std::string>());
    if (j.contains("note")) {
        c.confidence_note = j["note"].get<std::string>();
    }
    return c;
}

json outcome_to_json(const TreatmentOutcome& outcome) {
    json sub_qas = json::array();
    for (const auto& qa : outcome.sub_qas) {
        sub_qas.push_back(json{{"question", qa.question}, {"answer", qa.answer}});
    }
    json j{{"corrected_text", outcome.corrected_text},
           {"class_used", class_to_json(outcome.class_used)},
           {"sub_qas", std::move(sub_qas)}};
    if (outcome.cot_output) {
        j["cot_output"] = *outcome.cot_output;
    }
    return j;
}

TreatmentOutcome outcome_from_json(const json& j) {
    TreatmentOutcome outcome;
    outcome.corrected_text = j.at("corrected_text").get<std::string>();
    outcome.class_used = class_from_json(j.at("class_used"));
    for (const auto& qa : j.at("sub_qas")) {
        outcome.sub_qas.push_back(
            SubQA{qa.at("question").get<std::string>(), qa.at("answer").get<std::string>()});
    }
    if (j.contains("cot_output")) {
        outcome.cot_output = j["cot_output"].get<std::string>();
    }
    return outcome;
}

Termination termination_from_string(const std::string& s) {
    if (s == "converged") return Termination::Converged;
    if (s == "max_iterations") return Termination::MaxIterations;
    if (s == "error") return Termination::Error;
    throw Error("unknown termination: " + s);
}

}  // namespace

json transcript_to_json(const VerificationTranscript& transcript) {
    json iterations = json::array();
    for (const auto& it : transcript.iterations) {
        iterations.push_back(json{{"index", it.index},
                                  {"input_answer", it.input_answer},
                                  {"output_answer", it.output_answer},
                                  {"similar", it.similar},
                                  {"treatment", outcome_to_json(it.treatment)}});
    }
    json j{{"schema", 1},
           {"query_id", transcript.query_id},
           {"class", class_to_json(transcript.query_class)},
           {"original", answer_to_json(transcript.original)},
           {"iterations", std::move(iterations)},
           {"final", answer_to_json(transcript.final_answer)},
           {"termination", to_string(transcript.termination)}};
    if (transcript.error) {
        j["error"] = *transcript.error;
    }
    return j;
}

VerificationTranscript transcript_from_json(const json& j) {
    if (j.value("schema", 0) != 1) {
        throw Error("unsupported transcript schema");
    }
    VerificationTranscript t;
    t.query_id = j.at("query_id").get<std::string>();
    t.query_class = class_from_json(j.at("class"));
    t.original = answer_from_json(j.at("original"));
    for (const auto& it : j.at("iterations")) {
        t.iterations.push_back(IterationRecord{it.at("index").get<int>(),
                                               it.at("input_answer").get<std::string>(),
                                               it.at("output_answer").get<std::string>(),
                                               it.at("similar").get<bool>(),
                                               outcome_from_json(it.at("treatment"))});
    }
    t.final_answer = answer_from_json(j.at("final"));
    t.termination = termination_from_string(j.at("termination").get<std::string>());
    if (j.contains("error")) {
        t.error = j["error"].get<std::string>();
    }
    return t;
}

json manifest_to_json(const RunManifest& manifest) {
    return json{{"schema", 1},
                {"run_id", manifest.run_id},
                {"config", manifest.config_snapshot},
                {"template_hashes", manifest.template_hashes},
                {"backend_identities", manifest.backend_identities},
                {"started_at", manifest.started_at},
                {"finished_at", manifest.finished_at},
                {"counts",
                 json{{"processed", manifest.counts.processed},
                      {"converged", manifest.counts.converged},
                      {"exhausted", manifest.counts.exhausted},
                      {"errored", manifest.counts.errored}}}};
}

// ---------------------------------------------------------------------------
// run_correction
// ---------------------------------------------------------------------------

namespace {

json run_config_to_json(const RunConfig& config) {
    json j{{"corpus", config.corpus_path},
           {"backend_config", config.backend_config_path},
           {"max_iterations", config.loop.max_iterations},
           {"sub_question_cap", config.loop.sub_question_cap},
           {"judge_retry_limit", config.loop.judge_retry_limit},
           {"return_post_check", config.loop.return_post_check},
           {"concurrency", config.concurrency},
           {"out_dir", config.out_dir},
           {"mode", to_string(config.mode)},
           {"repeats", config.repeats}};
    if (config.template_path) {
        j["templates"] = *config.template_path;
    }
    if (config.seed) {
        j["seed"] = *config.seed;
    }
    return j;
}

std::map<std::string, std::string> template_hashes(const TemplateSet& templates) {
    std::map<std::string, std::string> hashes;
    for (TemplateName name : kAllTemplateNames) {
        hashes[to_string(name)] = sha256_hex(templates.get(name).template_text);
    }
    return hashes;
}

VerificationTranscript process_record(const CorpusRecord& record, const BackendSet& backends,
                                      const TemplateSet& templates, const LoopConfig& loop) {
    try {
        std::string original =
            record.original_answer
                ? *record.original_answer
                : vqa_answer(*backends.lvlm, record.query.image_ref, record.query.query_text);
        PipelineContext ctx{*backends.judge, *backends.lvlm, templates, loop};
        return dentist_loop(ctx, record.query, original);
    } catch (const std::exception& e) {
        VerificationTranscript t;
        t.query_id = record.query.id;
        t.original = Answer::original(record.original_answer.value_or(""));
        t.final_answer = t.original;
        t.termination = Termination::Error;
        t.error = e.what();
        return t;
    }
}

}  // namespace

RunManifest run_correction(const RunConfig& config) {
    RunManifest manifest;
    manifest.started_at = now_iso_utc();

    auto corpus = load_query_records(config.corpus_path);
    TemplateSet templates = config.template_path ? load_templates(*config.template_path)
                                                 : TemplateSet::defaults();
    BackendSet backends = load_backends(config.backend_config_path);

    fs::create_directories(config.out_dir);
    const fs::path transcripts_path = fs::path(config.out_dir) / "transcripts.jsonl";
    const fs::path partial_path = fs::path(config.out_dir) / "transcripts.jsonl.partial";

    std::ofstream partial(partial_path, std::ios::binary | std::ios::trunc);
    if (!partial) {
        throw Error("cannot write " + partial_path.string());
    }

    std::vector<std::pair<std::string, std::string>> lines(corpus.size());
    std::mutex write_mu;
    std::atomic<std::size_t> next{0};
    RunCounts counts;

    auto worker = [&]() {
        for (std::size_t i = next.fetch_add(1); i < corpus.size(); i = next.fetch_add(1)) {
            VerificationTranscript transcript =
                process_record(corpus[i], backends, templates, config.loop);
            std::string line = transcript_to_json(transcript).dump();
            std::lock_guard<std::mutex> lock(write_mu);
            partial << line << '\n';
            partial.flush();
            lines[i] = {corpus[i].query.id, std::move(line)};
            counts.processed += 1;
            switch (transcript.termination) {
                case Termination::Converged: counts.converged += 1; break;
                case Termination::MaxIterations: counts.exhausted += 1; break;
                case Termination::Error: counts.errored += 1; break;
            }
        }
    };

    int width = std::max(1, std::min<int>(config.concurrency, static_cast<int>(corpus.size())));
    if (width == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(width));
        for (int i = 0; i < width; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    partial.close();

    // Canonical order: sort by query id before the final write.
    std::sort(lines.begin(), lines.end());
    {
        std::ofstream out(transcripts_path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write " + transcripts_path.string());
        }
        for (const auto& [id, line] : lines) {
            out << line << '\n';
        }
    }
    fs::remove(partial_path);

    manifest.finished_at = now_iso_utc();
    manifest.counts = counts;
    manifest.config_snapshot = run_config_to_json(config);
    manifest.template_hashes = template_hashes(templates);
    manifest.backend_identities = {backends.judge->identity(), backends.lvlm->identity()};
    manifest.run_id =
        sha256_hex(manifest.started_at + "|" + manifest.config_snapshot.dump()).substr(0, 12);

    std::ofstream mf(fs::path(config.out_dir) / "manifest.json", std::ios::binary | std::ios::trunc);
    mf << manifest_to_json(manifest).dump(2) << '\n';
    return manifest;
}

// ---------------------------------------------------------------------------
// Repeated-response baselines
// ---------------------------------------------------------------------------

CorrectnessOracle yes_no_oracle() {
    return [](const QueryRecord& record, const std::string& response) {
        if (!record.ground_truth) {
            throw Error("record " + record.id + " lacks ground_truth");
        }
        return normalize_yes_no(response) == normalize_yes_no(*record.ground_truth);
    };
}

BaselineReport run_repeated_baseline(const RunConfig& config, const CorrectnessOracle& correct) {
    if (config.mode == RunMode::Correct) {
        throw Error("run_repeated_baseline requires mode dr or rc");
    }
    if (config.repeats < 1) {
        throw Error("repeats must be >= 1");
    }

    auto corpus = load_query_records(config.corpus_path);
    TemplateSet templates = config.template_path ? load_templates(*config.template_path)
                                                 : TemplateSet::defaults();
    BackendSet backends = load_backends(config.backend_config_path);

    BaselineReport report;
    report.mode = config.mode;
    report.repeats = config.repeats;
    report.n_samples = static_cast<long>(corpus.size());

    long tp = 0, fp = 0, fn = 0, tn = 0;
    auto evaluate = [&](const QueryRecord& record, const std::string& text, bool ok) {
        report.n_evaluations += 1;
        if (ok) {
            report.n_correct += 1;
        }
        YesNo label = normalize_yes_no(record.ground_truth.value_or(""));
        YesNo predicted = normalize_yes_no(text);
        if (predicted == YesNo::Yes) {
            (label == YesNo::Yes ? tp : fp) += 1;
        } else {
            (label == YesNo::Yes ? fn : tn) += 1;
        }
    };

    for (const auto& record : corpus) {
        if (!record.query.ground_truth) {
            throw Error("baseline record " + record.query.id + " lacks ground_truth");
        }
        try {
            // Repeat draws bypass the cache: each is meant to be a fresh
            // sample of the model.
            std::vector<std::string> responses;
            responses.reserve(static_cast<std::size_t>(config.repeats));
            for (int r = 0; r < config.repeats; ++r) {
                responses.push_back(vqa_answer(*backends.lvlm_uncached, record.query.image_ref,
                                               record.query.query_text));
            }

            if (config.mode == RunMode::DirectRejection) {
                // A sample is correct iff any response is; selection is the
                // lowest-index correct response.
                std::size_t selected = 0;
                bool any_correct = false;
                for (std::size_t r = 0; r < responses.size(); ++r) {
                    if (correct(record.query, responses[r])) {
                        selected = r;
                        any_correct = true;
                        break;
                    }
                }
                evaluate(record.query, responses[selected], any_correct);
            } else {
                for (const auto& response : responses) {
                    PipelineContext ctx{*backends.judge, *backends.lvlm, templates, config.loop};
                    VerificationTranscript transcript =
                        dentist_loop(ctx, record.query, response);
                    if (transcript.termination == Termination::Error) {
                        report.n_errors += 1;
                    }
                    evaluate(record.query, transcript.final_answer.text,
                             correct(record.query, transcript.final_answer.text));
                }
            }
        } catch (const std::exception&) {
            // A failed sample counts as one incorrect evaluation.
            report.n_errors += 1;
            report.n_evaluations += 1;
            if (normalize_yes_no(*record.query.ground_truth) == YesNo::Yes) {
                fn += 1;
            } else {
                fp += 1;
            }
        }
    }

    report.accuracy = report.n_evaluations == 0
                          ? 0.0
                          : static_cast<double>(report.n_correct) /
                                static_cast<double>(report.n_evaluations);
    report.pope = pope_from_counts(tp, fp, fn, tn);
    return report;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "table") return ReportFormat::Table;
    if (s == "json") return ReportFormat::Json;
    throw Error("unknown report format: " + s);
}

json report_to_json(const PopeReport& report) {
    return json{{"kind", "pope"},     {"accuracy", report.accuracy},
                {"precision", report.precision}, {"recall", report.recall},
                {"f1", report.f1},    {"yes_rate", report.yes_rate},
                {"tp", report.tp},    {"fp", report.fp},
                {"fn", report.fn},    {"tn", report.tn}};
}

json report_to_json(const ChairReport& report) {
    return json{{"kind", "chair"},
                {"chair_s", report.chair_s},
                {"chair_i", report.chair_i},
                {"n_sentences", report.n_sentences},
                {"n_hallucinated_sentences", report.n_hallucinated_sentences},
                {"n_mentions", report.n_mentions},
                {"n_hallucinated_mentions", report.n_hallucinated_mentions}};
}

json report_to_json(const CategoryReport& report) {
    json categories = json::object();
    for (const auto& [name, stats] : report.per_category) {
        categories[name] = json{{"correct", stats.correct},
                                {"total", stats.total},
                                {"accuracy", stats.accuracy}};
    }
    return json{{"kind", "category"},
                {"overall", report.overall},
                {"n_records", report.n_records},
                {"categories", std::move(categories)}};
}

json report_to_json(const BaselineReport& report) {
    json pope = report_to_json(report.pope);
    pope.erase("kind");
    return json{{"kind", "baseline"},
                {"mode", to_string(report.mode)},
                {"repeats", report.repeats},
                {"n_samples", report.n_samples},
                {"n_evaluations", report.n_evaluations},
                {"n_correct", report.n_correct},
                {"n_errors", report.n_errors},
                {"accuracy", report.accuracy},
                {"pope", std::move(pope)}};
}

namespace {

void require_kind(const json& j, const char* kind) {
    if (j.value("kind", "") != kind) {
        throw Error(std::string("expected report kind \"") + kind + "\", got \"" +
                    j.value("kind", "") + "\"");
    }
}

PopeReport pope_fields_from_json(const json& j) {
    PopeReport report;
    report.accuracy = j.at("accuracy").get<double>();
    report.precision = j.at("precision").get<double>();
    report.recall = j.at("recall").get<double>();
    report.f1 = j.at("f1").get<double>();
    report.yes_rate = j.at("yes_rate").get<double>();
    report.tp = j.at("tp").get<long>();
    report.fp = j.at("fp").get<long>();
    report.fn = j.at("fn").get<long>();
    report.tn = j.at("tn").get<long>();
    return report;
}

}  // namespace

PopeReport pope_report_from_json(const json& j) {
    require_kind(j, "pope");
    return pope_fields_from_json(j);
}

ChairReport chair_report_from_json(const json& j) {
    require_kind(j, "chair");
    ChairReport report;
    report.chair_s = j.at("chair_s").get<double>();
    report.chair_i = j.at("chair_i").get<double>();
    report.n_sentences = j.at("n_sentences").get<long>();
    report.n_hallucinated_sentences = j.at("n_hallucinated_sentences").get<long>();
    report.n_mentions = j.at("n_mentions").get<long>();
    report.n_hallucinated_mentions = j.at("n_hallucinated_mentions").get<long>();
    return report;
}

CategoryReport category_report_from_json(const json& j) {
    require_kind(j, "category");
    CategoryReport report;
    report.overall = j.at("overall").get<double>();
    report.n_records = j.at("n_records").get<long>();
    for (const auto& [name, stats] : j.at("categories").items()) {
        report.per_category[name] = CategoryStats{stats.at("correct").get<long>(),
                                                  stats.at("total").get<long>(),
                                                  stats.at("accuracy").get<double>()};
    }
    return report;
}

BaselineReport baseline_report_from_json(const json& j) {
    require_kind(j, "baseline");
    BaselineReport report;
    report.mode = run_mode_from_string(j.at("mode").get<std::string>());
    report.repeats = j.at("repeats").get<int>();
    report.n_samples = j.at("n_samples").get<long>();
    report.n_evaluations = j.at("n_evaluations").get<long>();
    report.n_correct = j.at("n_correct").get<long>();
    report.n_errors = j.at("n_errors").get<long>();
    report.accuracy = j.at("accuracy").get<double>();
    report.pope = pope_fields_from_json(j.at("pope"));
    return report;
}

namespace {

std::string percent(double ratio) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << ratio * 100.0;
    return out.str();
}

std::string pope_table(const PopeReport& report) {
    std::ostringstream out;
    out << std::left;
    out << std::setw(10) << "Accuracy" << std::setw(11) << "Precision" << std::setw(8) << "Recall"
        << std::setw(10) << "F1 Score" << "Yes (%)" << '\n';
    out << std::setw(10) << percent(report.accuracy) << std::setw(11) << percent(report.precision)
        << std::setw(8) << percent(report.recall) << std::setw(10) << percent(report.f1)
        << percent(report.yes_rate) << '\n';
    out << "counts: tp=" << report.tp << " fp=" << report.fp << " fn=" << report.fn
        << " tn=" << report.tn << '\n';
    return out.str();
}

std::string chair_table(const ChairReport& report) {
    std::ostringstream out;
    out << std::left;
    out << std::setw(8) << "Cs" << "Ci" << '\n';
    out << std::setw(8) << percent(report.chair_s) << percent(report.chair_i) << '\n';
    out << "sentences: " << report.n_hallucinated_sentences << "/" << report.n_sentences
        << " hallucinated, mentions: " << report.n_hallucinated_mentions << "/"
        << report.n_mentions << " hallucinated" << '\n';
    return out.str();
}

std::string category_table(const CategoryReport& report) {
    std::size_t width = 8;
    for (const auto& [name, stats] : report.per_category) {
        width = std::max(width, name.size());
    }
    std::ostringstream out;
    out << std::left;
    out << std::setw(static_cast<int>(width + 2)) << "Category" << std::setw(10) << "Accuracy"
        << "Correct/Total" << '\n';
    for (const auto& [name, stats] : report.per_category) {
        out << std::setw(static_cast<int>(width + 2)) << name << std::setw(10)
            << percent(stats.accuracy) << stats.correct << "/" << stats.total << '\n';
    }
    out << std::setw(static_cast<int>(width + 2)) << "Overall" << std::setw(10)
        << percent(report.overall) << report.n_records << " records" << '\n';
    return out.str();
}

std::string baseline_table(const BaselineReport& report) {
    std::ostringstream out;
    out << "mode: " << to_string(report.mode) << "  repeats: " << report.repeats
        << "  samples: " << report.n_samples << "  evaluations: " << report.n_evaluations;
    if (report.n_errors > 0) {
        out << "  errors: " << report.n_errors;
    }
    out << '\n';
    out << "accuracy (oracle): " << percent(report.accuracy) << '\n';
    out << pope_table(report.pope);
    return out.str();
}

}  // namespace

std::string render_report(const json& report, ReportFormat format) {
    if (format == ReportFormat::Json) {
        return report.dump(2) + "\n";
    }
    const std::string kind = report.value("kind", "");
    if (kind == "pope") {
        return pope_table(pope_report_from_json(report));
    }
    if (kind == "chair") {
        return chair_table(chair_report_from_json(report));
    }
    if (kind == "category") {
        return category_table(category_report_from_json(report));
    }
    if (kind == "baseline") {
        return baseline_table(baseline_report_from_json(report));
    }
    throw Error("unknown report kind: " + kind);
}

void write_report(const json& report, ReportFormat format, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write report file: " + path);
    }
    out << render_report(report, format);
    if (!out.good()) {
        throw Error("short write to report file: " + path);
    }
}

// ---------------------------------------------------------------------------
// Evaluation-file loaders
// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, std::string>> load_captions(const std::string& path) {
    std::vector<std::pair<std::string, std::string>> captions;
    for_each_jsonl(path, [&](int line, const json& j) {
        captions.emplace_back(require_string(j, "image_id", line, path),
                              require_string(j, "caption", line, path));
    });
    return captions;
}

std::map<std::string, ChairAnnotation> load_chair_annotations(const std::string& path) {
    std::map<std::string, ChairAnnotation> annotations;
    for_each_jsonl(path, [&](int line, const json& j) {
        ChairAnnotation annotation;
        annotation.image_id = require_string(j, "image_id", line, path);
        if (!j.contains("ground_truth_objects") || !j["ground_truth_objects"].is_array()) {
            throw CorpusParseError(line, path + ": missing array field \"ground_truth_objects\"");
        }
        for (const auto& object : j["ground_truth_objects"]) {
            annotation.ground_truth_objects.insert(object.get<std::string>());
        }
        if (!annotations.emplace(annotation.image_id, annotation).second) {
            throw DuplicateId(annotation.image_id);
        }
    });
    return annotations;
}

std::vector<PopeSample> load_pope_samples(const std::string& path) {
    std::vector<PopeSample> samples;
    std::set<std::string> seen;
    for_each_jsonl(path, [&](int line, const json& j) {
        PopeSample sample;
        sample.question_id = require_string(j, "question_id", line, path);
        sample.image_ref = require_string(j, "image_ref", line, path);
        sample.question = require_string(j, "question", line, path);
        sample.label = yes_no_from_json_string(require_string(j, "label", line, path), line, path);
        sample.setting = pope_setting_from_string(require_string(j, "setting", line, path));
        if (!seen.insert(sample.question_id).second) {
            throw DuplicateId(sample.question_id);
        }
        samples.push_back(std::move(sample));
    });
    return samples;
}

std::vector<std::pair<std::string, std::string>> load_predictions(const std::string& path) {
    std::vector<std::pair<std::string, std::string>> predictions;
    for_each_jsonl(path, [&](int line, const json& j) {
        predictions.emplace_back(require_string(j, "question_id", line, path),
                                 require_string(j, "answer", line, path));
    });
    return predictions;
}

}  // namespace dentist
