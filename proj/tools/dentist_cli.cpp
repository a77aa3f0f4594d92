#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dentist/classify.hpp"
#include "dentist/harness.hpp"
#include "dentist/loop.hpp"
#include "dentist/metrics.hpp"
#include "dentist/templates.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonRunOptions {
    std::string corpus;
    std::string backend_config;
    std::string templates;
    int max_iters = 3;
    int sub_question_cap = 5;
    int judge_retry_limit = 1;
    bool return_post_check = false;
    int concurrency = 1;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_run_options(CLI::App* cmd, CommonRunOptions& opts) {
    cmd->add_option("--corpus", opts.corpus, "Corpus JSONL file")->required();
    cmd->add_option("--backend-config", opts.backend_config, "Backend config JSON file")
        ->required();
    cmd->add_option("--templates", opts.templates, "Template override file");
    cmd->add_option("--max-iters", opts.max_iters, "Validation loop cap")->default_val(3);
    cmd->add_option("--sub-question-cap", opts.sub_question_cap,
                    "Max sub-questions per verification")
        ->default_val(5);
    cmd->add_option("--judge-retry-limit", opts.judge_retry_limit,
                    "Re-asks on unparseable judge output")
        ->default_val(1);
    cmd->add_flag("--return-post-check", opts.return_post_check,
                  "On convergence return the post-check answer instead of the pre-check one");
    cmd->add_option("--concurrency", opts.concurrency, "Worker pool width")->default_val(1);
    cmd->add_option("--seed", opts.seed, "Recorded in the run manifest")
        ->each([&](const std::string&) { opts.seed_set = true; });
}

dentist::RunConfig to_run_config(const CommonRunOptions& opts) {
    dentist::RunConfig config;
    config.corpus_path = opts.corpus;
    config.backend_config_path = opts.backend_config;
    if (!opts.templates.empty()) {
        config.template_path = opts.templates;
    }
    config.loop.max_iterations = opts.max_iters;
    config.loop.sub_question_cap = opts.sub_question_cap;
    config.loop.judge_retry_limit = opts.judge_retry_limit;
    config.loop.return_post_check = opts.return_post_check;
    config.concurrency = opts.concurrency;
    config.out_dir = opts.out;
    if (opts.seed_set) {
        config.seed = opts.seed;
    }
    return config;
}

void emit(const std::string& rendered, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << rendered;
        return;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw dentist::Error("cannot write " + out_path);
    }
    out << rendered;
    std::cout << "wrote " << out_path << "\n";
}

int run_verify(const CommonRunOptions& opts) {
    dentist::RunManifest manifest = dentist::run_correction(to_run_config(opts));
    std::cout << "processed=" << manifest.counts.processed
              << " converged=" << manifest.counts.converged
              << " exhausted=" << manifest.counts.exhausted
              << " errored=" << manifest.counts.errored << "\n"
              << "transcripts: " << (fs::path(opts.out) / "transcripts.jsonl").string() << "\n"
              << "manifest:    " << (fs::path(opts.out) / "manifest.json").string() << "\n";
    return manifest.counts.errored == 0 ? 0 : 2;
}

int run_classify(const CommonRunOptions& opts) {
    auto corpus = dentist::load_query_records(opts.corpus);
    auto templates = opts.templates.empty() ? dentist::TemplateSet::defaults()
                                            : dentist::load_templates(opts.templates);
    auto backends = dentist::load_backends(opts.backend_config);

    dentist::LoopConfig loop;
    loop.judge_retry_limit = opts.judge_retry_limit;

    long perception = 0;
    long reasoning = 0;
    std::ostringstream lines;
    for (const auto& record : corpus) {
        dentist::QueryClass cls =
            dentist::classify_query(*backends.judge, templates, record.query.query_text, loop);
        (cls.variant == dentist::QueryVariant::Perception ? perception : reasoning) += 1;
        json j{{"query_id", record.query.id}, {"class", dentist::to_string(cls.variant)}};
        if (cls.confidence_note) {
            j["note"] = *cls.confidence_note;
        }
        lines << j.dump() << '\n';
    }
    emit(lines.str(), opts.out);
    std::cerr << "perception=" << perception << " reasoning=" << reasoning << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "dentist: classify visual queries, verify and correct model answers in a "
        "convergence-checked loop, and score hallucination metrics"};
    app.require_subcommand(1);

    // --- verify ---
    CommonRunOptions verify_opts;
    CLI::App* verify = app.add_subcommand("verify", "Run the correction loop over a corpus");
    add_run_options(verify, verify_opts);
    verify->add_option("--out", verify_opts.out, "Output directory")->required();

    // --- classify ---
    CommonRunOptions classify_opts;
    CLI::App* classify = app.add_subcommand("classify", "Classify queries only");
    classify->add_option("--corpus", classify_opts.corpus, "Corpus JSONL file")->required();
    classify->add_option("--backend-config", classify_opts.backend_config, "Backend config JSON")
        ->required();
    classify->add_option("--templates", classify_opts.templates, "Template override file");
    classify->add_option("--judge-retry-limit", classify_opts.judge_retry_limit,
                         "Re-asks on unparseable judge output")
        ->default_val(1);
    classify->add_option("--out", classify_opts.out, "Output JSONL file (default stdout)");

    // --- eval-chair ---
    std::string chair_captions, chair_annotations, chair_lexicon, chair_out;
    std::string chair_format = "table";
    bool caption_level = false;
    CLI::App* eval_chair = app.add_subcommand("eval-chair", "Score captions with CHAIR");
    eval_chair->add_option("--captions", chair_captions, "Captions JSONL")->required();
    eval_chair->add_option("--annotations", chair_annotations, "Ground-truth objects JSONL")
        ->required();
    eval_chair->add_option("--lexicon", chair_lexicon,
                           "Lexicon TSV (default: built-in 80-object lexicon)");
    eval_chair->add_flag("--caption-level", caption_level,
                         "Score at caption level instead of sentence level");
    eval_chair->add_option("--format", chair_format, "table or json")->default_val("table");
    eval_chair->add_option("--out", chair_out, "Output file (default stdout)");

    // --- eval-pope ---
    std::string pope_samples, pope_predictions, pope_setting, pope_out;
    std::string pope_format = "table";
    CLI::App* eval_pope = app.add_subcommand("eval-pope", "Score yes/no probes with POPE metrics");
    eval_pope->add_option("--samples", pope_samples, "POPE samples JSONL")->required();
    eval_pope->add_option("--predictions", pope_predictions, "Model answers JSONL")->required();
    eval_pope->add_option("--setting", pope_setting,
                          "Filter to one setting: random, popular, adversarial");
    eval_pope->add_option("--format", pope_format, "table or json")->default_val("table");
    eval_pope->add_option("--out", pope_out, "Output file (default stdout)");

    // --- baseline ---
    CommonRunOptions baseline_opts;
    std::string baseline_mode;
    std::string baseline_format = "table";
    int baseline_repeats = 10;
    CLI::App* baseline =
        app.add_subcommand("baseline", "Repeated-response baselines over a labeled corpus");
    add_run_options(baseline, baseline_opts);
    baseline->add_option("--mode", baseline_mode, "dr (direct rejection) or rc (repeated correction)")
        ->required();
    baseline->add_option("--repeats", baseline_repeats, "Responses drawn per sample")
        ->default_val(10);
    baseline->add_option("--format", baseline_format, "table or json")->default_val("table");
    baseline->add_option("--out", baseline_opts.out, "Output file (default stdout)");

    // --- report ---
    std::string report_in;
    std::string report_format = "table";
    CLI::App* report = app.add_subcommand("report", "Render a stored JSON report");
    report->add_option("--in", report_in, "Report JSON file")->required();
    report->add_option("--format", report_format, "table or json")->default_val("table");

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) {
            return run_verify(verify_opts);
        }
        if (classify->parsed()) {
            return run_classify(classify_opts);
        }
        if (eval_chair->parsed()) {
            auto captions = dentist::load_captions(chair_captions);
            auto annotations = dentist::load_chair_annotations(chair_annotations);
            const dentist::ObjectLexicon lexicon =
                chair_lexicon.empty() ? dentist::ObjectLexicon::default_lexicon()
                                      : dentist::load_lexicon(chair_lexicon);
            dentist::ChairOptions options;
            options.caption_level = caption_level;
            auto scores = dentist::chair_scores(captions, annotations, lexicon, options);
            emit(dentist::render_report(dentist::report_to_json(scores),
                                        dentist::report_format_from_string(chair_format)),
                 chair_out);
            return 0;
        }
        if (eval_pope->parsed()) {
            auto samples = dentist::load_pope_samples(pope_samples);
            if (!pope_setting.empty()) {
                auto wanted = dentist::pope_setting_from_string(pope_setting);
                std::erase_if(samples,
                              [&](const dentist::PopeSample& s) { return s.setting != wanted; });
            }
            std::set<std::string> keep;
            for (const auto& sample : samples) {
                keep.insert(sample.question_id);
            }
            std::vector<std::pair<std::string, dentist::YesNo>> predictions;
            for (const auto& [question_id, answer] : dentist::load_predictions(pope_predictions)) {
                if (keep.count(question_id) > 0) {
                    predictions.emplace_back(question_id, dentist::normalize_yes_no(answer));
                }
            }
            auto scores = dentist::pope_scores(predictions, samples);
            emit(dentist::render_report(dentist::report_to_json(scores),
                                        dentist::report_format_from_string(pope_format)),
                 pope_out);
            return 0;
        }
        if (baseline->parsed()) {
            dentist::RunConfig config = to_run_config(baseline_opts);
            config.mode = dentist::run_mode_from_string(baseline_mode);
            config.repeats = baseline_repeats;
            auto result = dentist::run_repeated_baseline(config, dentist::yes_no_oracle());
            emit(dentist::render_report(dentist::report_to_json(result),
                                        dentist::report_format_from_string(baseline_format)),
                 baseline_opts.out);
            return 0;
        }
        if (report->parsed()) {
            std::ifstream in(report_in, std::ios::binary);
            if (!in) {
                throw dentist::Error("cannot open " + report_in);
            }
            json stored = json::parse(in);
            std::cout << dentist::render_report(
                stored, dentist::report_format_from_string(report_format));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
