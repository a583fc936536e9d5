#include <cstddef>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "xcot/runner.hpp"

namespace {

using nlohmann::json;

std::vector<xcot::LanguageCode> parse_language_list(const std::vector<std::string>& codes) {
    std::vector<xcot::LanguageCode> parsed;
    parsed.reserve(codes.size());
    for (const auto& code : codes) parsed.push_back(xcot::LanguageCode::parse(code));
    return parsed;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

void print_summary(const xcot::ResultTable& table) {
    std::cout << xcot::emit_report(table, xcot::ReportFormat::markdown);
    std::cout << "\ninstances per language: " << table.instances_per_language
              << ", runs: " << table.n_runs << ", provider failures: " << table.provider_failures
              << ", unparsed: " << table.unparsed << "\n";
}

int cmd_run(const std::string& config_path) {
    xcot::ExperimentConfig cfg = xcot::load_experiment_config(config_path);
    xcot::ResultTable table = xcot::run_experiment(cfg);
    print_summary(table);
    std::cout << "outputs written to " << cfg.output_dir << "\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::size_t>& sizes) {
    xcot::ExperimentConfig cfg = xcot::load_experiment_config(config_path);
    std::vector<xcot::SweepPoint> points = xcot::sweep_languages(cfg, sizes);
    write_text(cfg.output_dir + "/sweep.md", emit_sweep(points, xcot::ReportFormat::markdown));
    write_text(cfg.output_dir + "/sweep.csv", emit_sweep(points, xcot::ReportFormat::csv));
    write_text(cfg.output_dir + "/sweep.json", emit_sweep(points, xcot::ReportFormat::json));
    std::cout << emit_sweep(points, xcot::ReportFormat::markdown);
    std::cout << "\noutputs written to " << cfg.output_dir << "\n";
    return 0;
}

int cmd_report(const std::string& records, const std::string& format) {
    std::string path = records;
    if (path.size() < 6 || path.substr(path.size() - 6) != ".jsonl") path += "/records.jsonl";
    std::vector<xcot::RunRecord> loaded = xcot::load_run_records(path);
    xcot::ResultTable table = xcot::table_from_records(loaded);
    std::cout << xcot::emit_report(table, xcot::parse_report_format(format));
    return 0;
}

int cmd_prompt_render(const std::string& strategy, const std::string& task,
                      const std::vector<std::string>& languages, const std::string& instance_id,
                      const std::string& data_dir, const std::string& direction,
                      bool include_english, std::optional<std::size_t> count,
                      const std::string& target, const std::string& model, bool show_digest) {
    xcot::ExperimentConfig cfg;
    cfg.task = xcot::parse_task(task);
    cfg.languages = parse_language_list(languages);
    cfg.strategy = xcot::parse_strategy(strategy);
    cfg.plan_options.direction = xcot::parse_direction(direction);
    cfg.plan_options.include_english = include_english;
    cfg.plan_options.count = count;
    cfg.target_language = xcot::LanguageCode::parse(target);
    cfg.model = model;
    cfg.output_dir = ".";  // unused by rendering; satisfies validation
    xcot::validate_config(cfg);

    const xcot::LanguageCode& subset = cfg.languages.front();
    const std::string path =
        data_dir + "/" + xcot::task_name(cfg.task) + "_" + subset.str() + ".jsonl";
    xcot::Dataset dataset = xcot::load_dataset(path, cfg.task, subset);
    const xcot::Instance* instance = nullptr;
    for (const auto& candidate : dataset.instances)
        if (candidate.id == instance_id) instance = &candidate;
    if (!instance)
        throw std::runtime_error("instance \"" + instance_id + "\" not found in " + path);

    xcot::RenderedPrompt prompt =
        xcot::render_prompt(cfg, *instance, xcot::ResourceTable::commoncrawl());
    for (std::size_t step = 0; step < prompt.steps.size(); ++step) {
        std::cout << "# step " << (step + 1) << "\n";
        for (const auto& message : prompt.steps[step])
            std::cout << "[" << xcot::role_name(message.role) << "]\n" << message.content << "\n";
    }
    if (show_digest) {
        xcot::CompletionRequest request{cfg.model, prompt.steps, cfg.temperature,
                                        cfg.top_p,  cfg.max_tokens, 0};
        std::cout << "digest: " << xcot::request_digest(request) << "\n";
    }
    return 0;
}

int cmd_corpus_validate(const std::string& path) {
    std::vector<xcot::ValidationIssue> issues = xcot::validate_dataset_file(path);
    if (issues.empty()) {
        std::cout << path << ": ok\n";
        return 0;
    }
    for (const auto& issue : issues) {
        if (issue.line == 0)
            std::cout << path << ": " << issue.message << "\n";
        else
            std::cout << path << ":" << issue.line << ": " << issue.message << "\n";
    }
    return 1;
}

// Rows carry either pre-split parts ("steps"/"sentences") or raw "text".
std::vector<json> load_jsonl_rows(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<json> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            rows.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (rows.empty()) throw std::runtime_error(path + ": no rows");
    return rows;
}

std::vector<std::string> row_parts(const json& row, const char* parts_key,
                                   bool sentence_split) {
    if (row.contains(parts_key)) {
        std::vector<std::string> parts;
        for (const auto& part : row.at(parts_key)) parts.push_back(part.get<std::string>());
        return parts;
    }
    const std::string text = row.at("text").get<std::string>();
    return sentence_split ? xcot::split_sentences(text) : xcot::segment_steps(text);
}

int cmd_metrics_roscoe(const std::string& chains_path, const std::string& source_path,
                       const std::string& reference_path, std::size_t dim) {
    std::vector<json> chain_rows = load_jsonl_rows(chains_path);
    std::vector<json> source_rows = load_jsonl_rows(source_path);
    if (source_rows.size() != chain_rows.size())
        throw std::runtime_error("source rows (" + std::to_string(source_rows.size()) +
                                 ") do not match chain rows (" +
                                 std::to_string(chain_rows.size()) + ")");
    std::vector<json> reference_rows;
    if (!reference_path.empty()) {
        reference_rows = load_jsonl_rows(reference_path);
        if (reference_rows.size() != chain_rows.size())
            throw std::runtime_error("reference rows (" + std::to_string(reference_rows.size()) +
                                     ") do not match chain rows (" +
                                     std::to_string(chain_rows.size()) + ")");
    }

    xcot::HashEmbedder embedder(dim);
    std::vector<xcot::ReasoningChain> chains;
    std::vector<xcot::SourceContext> sources;
    std::vector<xcot::ReasoningChain> references;
    for (std::size_t i = 0; i < chain_rows.size(); ++i) {
        chains.push_back(
            xcot::ReasoningChain::from_steps(row_parts(chain_rows[i], "steps", false), embedder));
        sources.push_back(xcot::SourceContext::from_sentences(
            row_parts(source_rows[i], "sentences", true), embedder));
        if (!reference_rows.empty())
            references.push_back(xcot::ReasoningChain::from_steps(
                row_parts(reference_rows[i], "steps", false), embedder));
    }

    std::vector<xcot::RoscoeReport> reports = xcot::score_batch(chains, sources, references);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        json doc;
        doc["id"] = chain_rows[i].contains("id") ? chain_rows[i]["id"]
                                                 : json(std::to_string(i + 1));
        doc["steps"] = chains[i].steps.size();
        doc["alignment"] = reports[i].alignment;
        doc["faithfulness"] = reports[i].faithfulness;
        doc["info_step"] = reports[i].info_step;
        doc["info_chain"] = reports[i].info_chain;
        if (reports[i].miss_step) doc["miss_step"] = *reports[i].miss_step;
        std::cout << doc.dump() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-lingual chain-of-thought evaluation harness"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
    std::string run_config;
    run->add_option("--config", run_config, "Experiment config JSON")->required();

    auto* sweep = app.add_subcommand("sweep", "Run a language-composition sweep");
    std::string sweep_config;
    std::vector<std::size_t> sweep_sizes;
    sweep->add_option("--config", sweep_config, "Experiment config JSON")->required();
    sweep->add_option("--sizes", sweep_sizes, "Nondecreasing subset sizes (comma separated)")
        ->required()
        ->delimiter(',');

    auto* report = app.add_subcommand("report", "Re-render results from saved records");
    std::string report_records;
    std::string report_format = "markdown";
    report->add_option("--records", report_records, "Experiment output dir or records.jsonl")
        ->required();
    report->add_option("--format", report_format, "markdown, csv or json");

    auto* prompt = app.add_subcommand("prompt", "Prompt utilities");
    prompt->require_subcommand(1);
    auto* render = prompt->add_subcommand("render", "Render one instance's prompt");
    std::string render_strategy, render_task, render_instance;
    std::vector<std::string> render_languages;
    std::string render_data_dir = "data";
    std::string render_direction = "descending";
    std::string render_target = "en";
    std::string render_model = "gpt-3.5-turbo";
    bool render_include_english = false;
    bool render_show_digest = false;
    std::optional<std::size_t> render_count;
    render->add_option("--strategy", render_strategy, "Prompting strategy")->required();
    render->add_option("--task", render_task, "Benchmark task")->required();
    render
        ->add_option("--languages", render_languages,
                     "Language codes; the first names the instance's subset")
        ->required()
        ->delimiter(',');
    render->add_option("--instance-id", render_instance, "Instance id")->required();
    render->add_option("--data-dir", render_data_dir, "Dataset directory");
    render->add_option("--direction", render_direction, "Plan order: descending or ascending");
    render->add_flag("--include-english", render_include_english, "Append English to the plan");
    render->add_option("--count", render_count, "Plan size before the English append");
    render->add_option("--target", render_target, "cross_cot resolving language");
    render->add_option("--model", render_model, "Model id used for --show-digest");
    render->add_flag("--show-digest", render_show_digest, "Print the request digest");

    auto* corpus = app.add_subcommand("corpus", "Dataset utilities");
    corpus->require_subcommand(1);
    auto* validate = corpus->add_subcommand("validate", "Validate a dataset JSONL file");
    std::string validate_path;
    validate->add_option("path", validate_path, "Dataset JSONL")->required();

    auto* metrics = app.add_subcommand("metrics", "Reasoning-quality metrics");
    metrics->require_subcommand(1);
    auto* roscoe = metrics->add_subcommand("roscoe", "Score reasoning chains against sources");
    std::string roscoe_chains, roscoe_source, roscoe_reference;
    std::size_t roscoe_dim = 64;
    roscoe->add_option("--chains", roscoe_chains, "Chains JSONL ({\"text\"} or {\"steps\"})")
        ->required();
    roscoe->add_option("--source", roscoe_source, "Source JSONL ({\"text\"} or {\"sentences\"})")
        ->required();
    roscoe->add_option("--reference", roscoe_reference, "Reference chains JSONL");
    roscoe->add_option("--dim", roscoe_dim, "Hash embedder dimension");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_config);
        if (*sweep) return cmd_sweep(sweep_config, sweep_sizes);
        if (*report) return cmd_report(report_records, report_format);
        if (*render) return cmd_prompt_render(render_strategy, render_task, render_languages,
                                              render_instance, render_data_dir, render_direction,
                                              render_include_english, render_count, render_target,
                                              render_model, render_show_digest);
        if (*validate) return cmd_corpus_validate(validate_path);
        if (*roscoe) return cmd_metrics_roscoe(roscoe_chains, roscoe_source, roscoe_reference,
                                               roscoe_dim);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand dispatched\n";
    return 1;
}
