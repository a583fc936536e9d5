#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xcot/corpus.hpp"
#include "xcot/extraction.hpp"
#include "xcot/metrics.hpp"
#include "xcot/prompting.hpp"
#include "xcot/provider.hpp"

namespace xcot {

struct ShotsConfig {
    std::size_t k = 0;
    std::string pool;  // exemplar JSONL, required when k > 0
    std::uint64_t seed = 0;
};

struct RoscoeConfig {
    bool enabled = false;
    std::size_t dim = 64;
};

struct PlanOptions {
    OrderDirection direction = OrderDirection::descending;
    bool include_english = false;
    std::optional<std::size_t> count;
};

struct ExperimentConfig {
    Task task = Task::mgsm;
    std::vector<LanguageCode> languages;
    Strategy strategy = Strategy::cross_tot;
    PlanOptions plan_options;
    ShotsConfig shots;
    ProviderConfig provider;
    std::string model = "gpt-3.5-turbo";
    double temperature = 0.0;
    double top_p = 1.0;
    int max_tokens = 1024;
    int n_runs = 3;
    std::uint64_t seed = 0;
    std::string data_dir = "data";
    std::optional<std::size_t> sample_n;  // default: the task's test-set size
    std::string output_dir;
    int parallelism = 1;
    std::string cache_dir;  // default: <output_dir>/cache
    RoscoeConfig roscoe;
    LanguageCode target_language = kEnglish;  // cross_cot resolving language
    std::optional<std::map<std::string, double>> resource_percentages;
    std::string language_table;  // optional JSON override of the builtin table
};

// 250 for MGSM (full set), 200 elsewhere.
std::size_t default_test_size(Task task);

ExperimentConfig load_experiment_config(const std::string& path);
void validate_config(const ExperimentConfig& cfg);

struct RunRecord {
    std::string instance_id;
    LanguageCode language;
    int run_index = 0;
    std::string prompt_digest;  // cache key; the completion lives there
    ExtractedAnswer extracted;
    bool correct = false;
    double latency_ms = 0.0;
    bool provider_failed = false;  // request failed after retries

    bool operator==(const RunRecord&) const = default;
};

std::string run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const std::string& line);
std::vector<RunRecord> load_run_records(const std::string& path);

struct ResultTable {
    std::vector<std::string> languages;        // first-appearance (config) order
    std::vector<std::vector<double>> per_run;  // [run][language], percent
    std::vector<double> run_avg;               // per language, averaged over runs
    double overall_avg = 0.0;                  // unweighted mean of run_avg
    int n_runs = 0;
    std::size_t instances_per_language = 0;
    std::size_t provider_failures = 0;
    std::size_t unparsed = 0;  // records with no extractable answer
};

ResultTable table_from_records(const std::vector<RunRecord>& records);

enum class ReportFormat { markdown, csv, json };
ReportFormat parse_report_format(std::string_view name);

// Byte-deterministic rendering; all percentages to one decimal place.
std::string emit_report(const ResultTable& table, ReportFormat format);

// Strategy dispatch used by the pipeline: baselines render directly,
// cross_cot targets cfg.target_language, cross_tot plans over cfg.languages,
// and cross_tot_binary pairs the instance language with English.
RenderedPrompt render_prompt(const ExperimentConfig& cfg, const Instance& instance,
                             const ResourceTable& resources,
                             const LanguageTable& table = LanguageTable::builtin());

// Runs the full pipeline: render -> cached complete -> extract -> score.
// Writes records.jsonl, results.{md,csv,json} and, when enabled,
// roscoe.jsonl under cfg.output_dir. `provider` overrides the one built from
// cfg.provider (tests inject counters/kill switches here).
ResultTable run_experiment(const ExperimentConfig& cfg, CompletionProvider* provider = nullptr);

struct SweepPoint {
    std::size_t size = 0;
    bool include_english = false;
    double average_accuracy = 0.0;
};

// One experiment per size x {with, without} English appended; results for
// each arm land in <output_dir>/sweep_<size>_<base|en>.
std::vector<SweepPoint> sweep_languages(const ExperimentConfig& cfg,
                                        const std::vector<std::size_t>& sizes,
                                        CompletionProvider* provider = nullptr);

std::string emit_sweep(const std::vector<SweepPoint>& points, ReportFormat format);

}  // namespace xcot
