#include "xcot/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "xcot/net.hpp"

namespace xcot {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& message) {
    throw std::runtime_error("config error: " + message);
}

void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) config_error(where + " must be a JSON object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) known = true;
        if (!known) config_error("unknown key \"" + item.key() + "\" in " + where);
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("short write to " + path);
}

// Round to one decimal through the printed form so every output format
// carries exactly the same value.
double round1(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", x);
    return std::strtod(buf, nullptr);
}

std::string format1(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", x);
    return buf;
}

json extracted_to_json(const ExtractedAnswer& a) {
    json out;
    switch (a.kind) {
        case AnswerKind::numeric:
            out["kind"] = "numeric";
            out["text"] = a.text;
            out["value"] = *a.value;
            break;
        case AnswerKind::label:
            out["kind"] = "label";
            out["text"] = a.text;
            break;
        case AnswerKind::none:
            out["kind"] = "none";
            out["reason"] = a.reason;
            break;
    }
    return out;
}

ExtractedAnswer extracted_from_json(const json& obj) {
    const std::string kind = obj.at("kind").get<std::string>();
    if (kind == "numeric")
        return ExtractedAnswer::numeric(obj.at("text").get<std::string>(),
                                        obj.at("value").get<double>());
    if (kind == "label") return ExtractedAnswer::label(obj.at("text").get<std::string>());
    if (kind == "none") return ExtractedAnswer::none(obj.at("reason").get<std::string>());
    throw std::runtime_error("unknown extracted-answer kind \"" + kind + "\"");
}

}  // namespace

std::size_t default_test_size(Task task) {
    return task == Task::mgsm ? 250 : 200;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    require_keys(doc, "config",
                 {"task", "languages", "strategy", "plan_options", "shots", "provider", "model",
                  "temperature", "top_p", "max_tokens", "n_runs", "seed", "data_dir", "sample_n",
                  "output_dir", "parallelism", "cache_dir", "roscoe", "target_language",
                  "resource_percentages", "language_table"});
    ExperimentConfig cfg;
    try {
        cfg.task = parse_task(doc.at("task").get<std::string>());
        if (!doc.at("languages").is_array()) config_error("languages must be an array");
        for (const auto& code : doc.at("languages"))
            cfg.languages.push_back(LanguageCode::parse(code.get<std::string>()));
        if (doc.contains("strategy"))
            cfg.strategy = parse_strategy(doc["strategy"].get<std::string>());
        if (doc.contains("plan_options")) {
            const json& plan = doc["plan_options"];
            require_keys(plan, "plan_options", {"direction", "include_english", "count"});
            if (plan.contains("direction"))
                cfg.plan_options.direction = parse_direction(plan["direction"].get<std::string>());
            cfg.plan_options.include_english = plan.value("include_english", false);
            if (plan.contains("count"))
                cfg.plan_options.count = plan["count"].get<std::size_t>();
        }
        if (doc.contains("shots")) {
            const json& shots = doc["shots"];
            require_keys(shots, "shots", {"k", "pool", "seed"});
            cfg.shots.k = shots.value("k", std::size_t{0});
            cfg.shots.pool = shots.value("pool", std::string{});
            cfg.shots.seed = shots.value("seed", std::uint64_t{0});
        }
        if (doc.contains("provider")) {
            const json& prov = doc["provider"];
            require_keys(prov, "provider",
                         {"base_url", "api_key_env", "retry", "timeout_s", "mode",
                          "scripted_path"});
            cfg.provider.base_url = prov.value("base_url", cfg.provider.base_url);
            cfg.provider.api_key_env = prov.value("api_key_env", cfg.provider.api_key_env);
            cfg.provider.timeout_s = prov.value("timeout_s", cfg.provider.timeout_s);
            if (prov.contains("mode"))
                cfg.provider.mode = parse_provider_mode(prov["mode"].get<std::string>());
            cfg.provider.scripted_path = prov.value("scripted_path", std::string{});
            if (prov.contains("retry")) {
                const json& retry = prov["retry"];
                require_keys(retry, "provider.retry", {"max_attempts", "backoff_base_ms"});
                cfg.provider.retry.max_attempts =
                    retry.value("max_attempts", cfg.provider.retry.max_attempts);
                cfg.provider.retry.backoff_base_ms =
                    retry.value("backoff_base_ms", cfg.provider.retry.backoff_base_ms);
            }
        }
        cfg.model = doc.value("model", cfg.model);
        cfg.temperature = doc.value("temperature", cfg.temperature);
        cfg.top_p = doc.value("top_p", cfg.top_p);
        cfg.max_tokens = doc.value("max_tokens", cfg.max_tokens);
        cfg.n_runs = doc.value("n_runs", cfg.n_runs);
        cfg.seed = doc.value("seed", cfg.seed);
        cfg.data_dir = doc.value("data_dir", cfg.data_dir);
        if (doc.contains("sample_n")) cfg.sample_n = doc["sample_n"].get<std::size_t>();
        cfg.output_dir = doc.value("output_dir", std::string{});
        cfg.parallelism = doc.value("parallelism", cfg.parallelism);
        cfg.cache_dir = doc.value("cache_dir", std::string{});
        if (doc.contains("roscoe")) {
            const json& roscoe = doc["roscoe"];
            require_keys(roscoe, "roscoe", {"enabled", "dim"});
            cfg.roscoe.enabled = roscoe.value("enabled", false);
            cfg.roscoe.dim = roscoe.value("dim", std::size_t{64});
        }
        if (doc.contains("target_language"))
            cfg.target_language = LanguageCode::parse(doc["target_language"].get<std::string>());
        if (doc.contains("resource_percentages")) {
            std::map<std::string, double> table;
            for (const auto& item : doc["resource_percentages"].items())
                table[item.key()] = item.value().get<double>();
            cfg.resource_percentages = std::move(table);
        }
        cfg.language_table = doc.value("language_table", std::string{});
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    validate_config(cfg);
    return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.languages.empty()) config_error("empty language list");
    std::set<std::string> seen;
    for (const auto& code : cfg.languages)
        if (!seen.insert(code.str()).second)
            config_error("duplicate language \"" + code.str() + "\"");
    if (cfg.model.empty()) config_error("model must not be empty");
    if (cfg.temperature < 0.0 || cfg.temperature > 2.0)
        config_error("temperature must be in [0, 2]");
    if (cfg.top_p <= 0.0 || cfg.top_p > 1.0) config_error("top_p must be in (0, 1]");
    if (cfg.max_tokens < 1) config_error("max_tokens must be positive");
    if (cfg.n_runs < 1) config_error("n_runs must be positive");
    if (cfg.parallelism < 1) config_error("parallelism must be positive");
    if (cfg.data_dir.empty()) config_error("data_dir must not be empty");
    if (cfg.output_dir.empty()) config_error("output_dir must not be empty");
    if (cfg.sample_n && *cfg.sample_n == 0) config_error("sample_n must be positive");
    if (cfg.shots.k > 0 && cfg.shots.pool.empty())
        config_error("shots.k > 0 requires shots.pool");
    if (cfg.provider.mode == ProviderMode::scripted && cfg.provider.scripted_path.empty())
        config_error("scripted mode requires provider.scripted_path");
    if (cfg.provider.retry.max_attempts < 1) config_error("retry.max_attempts must be positive");
    if (cfg.provider.retry.backoff_base_ms < 0)
        config_error("retry.backoff_base_ms must not be negative");
    if (cfg.provider.timeout_s < 1) config_error("provider.timeout_s must be positive");
    if (cfg.roscoe.enabled && cfg.roscoe.dim == 0) config_error("roscoe.dim must be positive");
    if (cfg.strategy == Strategy::cross_cot)
        for (const auto& code : cfg.languages)
            if (code == cfg.target_language)
                config_error("cross_cot cannot target its own source language \"" + code.str() +
                             "\"");
    if (cfg.strategy == Strategy::cross_tot && cfg.plan_options.count) {
        if (*cfg.plan_options.count == 0) config_error("plan_options.count must be positive");
        if (*cfg.plan_options.count > cfg.languages.size())
            config_error("plan_options.count exceeds the configured language list");
    }
}

std::string run_record_to_json(const RunRecord& record) {
    json out;
    out["instance_id"] = record.instance_id;
    out["language"] = record.language.str();
    out["run_index"] = record.run_index;
    out["prompt_digest"] = record.prompt_digest;
    out["extracted"] = extracted_to_json(record.extracted);
    out["correct"] = record.correct;
    out["latency_ms"] = record.latency_ms;
    out["provider_failed"] = record.provider_failed;
    return out.dump();
}

RunRecord run_record_from_json(const std::string& line) {
    json doc;
    try {
        doc = json::parse(line);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("bad record line: ") + e.what());
    }
    try {
        return RunRecord{
            doc.at("instance_id").get<std::string>(),
            LanguageCode::parse(doc.at("language").get<std::string>()),
            doc.at("run_index").get<int>(),
            doc.at("prompt_digest").get<std::string>(),
            extracted_from_json(doc.at("extracted")),
            doc.at("correct").get<bool>(),
            doc.at("latency_ms").get<double>(),
            doc.at("provider_failed").get<bool>(),
        };
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("bad record line: ") + e.what());
    }
}

std::vector<RunRecord> load_run_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<RunRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(run_record_from_json(line));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

ResultTable table_from_records(const std::vector<RunRecord>& records) {
    if (records.empty()) throw std::runtime_error("no run records");
    ResultTable table;
    std::map<std::string, std::size_t> lang_index;
    int max_run = 0;
    for (const auto& rec : records) {
        if (!lang_index.count(rec.language.str())) {
            lang_index[rec.language.str()] = table.languages.size();
            table.languages.push_back(rec.language.str());
        }
        max_run = std::max(max_run, rec.run_index);
        if (rec.provider_failed) ++table.provider_failures;
        if (rec.extracted.kind == AnswerKind::none) ++table.unparsed;
    }
    table.n_runs = max_run + 1;

    std::vector<std::vector<std::vector<bool>>> cells(
        table.n_runs, std::vector<std::vector<bool>>(table.languages.size()));
    for (const auto& rec : records) {
        if (rec.run_index < 0) throw std::runtime_error("negative run_index in records");
        cells[rec.run_index][lang_index[rec.language.str()]].push_back(rec.correct);
    }
    table.per_run.assign(table.n_runs, std::vector<double>(table.languages.size(), 0.0));
    for (int run = 0; run < table.n_runs; ++run)
        for (std::size_t li = 0; li < table.languages.size(); ++li) {
            if (cells[run][li].empty())
                throw std::runtime_error("no records for language " + table.languages[li] +
                                         " run " + std::to_string(run + 1));
            table.per_run[run][li] = accuracy(cells[run][li]);
        }
    table.instances_per_language = cells[0][0].size();

    for (std::size_t li = 0; li < table.languages.size(); ++li) {
        std::vector<double> runs;
        runs.reserve(table.n_runs);
        for (int run = 0; run < table.n_runs; ++run) runs.push_back(table.per_run[run][li]);
        table.run_avg.push_back(average_runs(runs));
    }
    table.overall_avg = average_runs(table.run_avg);
    return table;
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "markdown" || name == "md") return ReportFormat::markdown;
    if (name == "csv") return ReportFormat::csv;
    if (name == "json") return ReportFormat::json;
    throw std::invalid_argument("unknown report format \"" + std::string(name) + "\"");
}

std::string emit_report(const ResultTable& table, ReportFormat format) {
    // Row averages (across languages) mirror the column averages across runs.
    std::vector<double> row_avg;
    for (int run = 0; run < table.n_runs; ++run) row_avg.push_back(average_runs(table.per_run[run]));

    std::ostringstream out;
    switch (format) {
        case ReportFormat::markdown: {
            out << "| Run |";
            for (const auto& lang : table.languages) out << " " << lang << " |";
            out << " Avg |\n|";
            for (std::size_t i = 0; i < table.languages.size() + 2; ++i) out << " --- |";
            out << "\n";
            for (int run = 0; run < table.n_runs; ++run) {
                out << "| " << (run + 1) << " |";
                for (double acc : table.per_run[run]) out << " " << format1(acc) << " |";
                out << " " << format1(row_avg[run]) << " |\n";
            }
            out << "| Avg |";
            for (double acc : table.run_avg) out << " " << format1(acc) << " |";
            out << " " << format1(table.overall_avg) << " |\n";
            return out.str();
        }
        case ReportFormat::csv: {
            out << "run";
            for (const auto& lang : table.languages) out << "," << lang;
            out << ",avg\n";
            for (int run = 0; run < table.n_runs; ++run) {
                out << (run + 1);
                for (double acc : table.per_run[run]) out << "," << format1(acc);
                out << "," << format1(row_avg[run]) << "\n";
            }
            out << "avg";
            for (double acc : table.run_avg) out << "," << format1(acc);
            out << "," << format1(table.overall_avg) << "\n";
            return out.str();
        }
        case ReportFormat::json: {
            json doc;
            doc["languages"] = table.languages;
            doc["n_runs"] = table.n_runs;
            doc["instances_per_language"] = table.instances_per_language;
            doc["provider_failures"] = table.provider_failures;
            doc["unparsed"] = table.unparsed;
            json per_run = json::array();
            for (const auto& row : table.per_run) {
                json cells = json::array();
                for (double acc : row) cells.push_back(round1(acc));
                per_run.push_back(std::move(cells));
            }
            doc["per_run"] = std::move(per_run);
            json avgs = json::array();
            for (double acc : table.run_avg) avgs.push_back(round1(acc));
            doc["run_avg"] = std::move(avgs);
            json rows = json::array();
            for (double acc : row_avg) rows.push_back(round1(acc));
            doc["row_avg"] = std::move(rows);
            doc["overall_avg"] = round1(table.overall_avg);
            return doc.dump(2) + "\n";
        }
    }
    throw std::logic_error("unhandled report format");
}

namespace {

struct WorkItem {
    const Instance* instance = nullptr;
    int run_index = 0;
    CompletionRequest request;
    std::string digest;
};

}  // namespace

RenderedPrompt render_prompt(const ExperimentConfig& cfg, const Instance& instance,
                             const ResourceTable& resources, const LanguageTable& table) {
    switch (cfg.strategy) {
        case Strategy::direct:
        case Strategy::native_cot:
        case Strategy::en_cot:
        case Strategy::translate_en:
            return render_baseline(cfg.strategy, instance, table);
        case Strategy::cross_cot:
            return render_cross_cot(instance, instance.language, cfg.target_language, table);
        case Strategy::cross_tot: {
            LanguagePlan plan = plan_language_order(
                cfg.languages, instance.language, cfg.plan_options.direction,
                cfg.plan_options.include_english, resources, cfg.plan_options.count);
            return render_cross_tot(instance, plan, task_persona(cfg.task), table);
        }
        case Strategy::cross_tot_binary: {
            LanguagePlan plan =
                plan_language_order({instance.language, kEnglish}, instance.language,
                                    cfg.plan_options.direction, true, resources, 1);
            return render_cross_tot(instance, plan, task_persona(cfg.task), table);
        }
    }
    throw std::logic_error("unhandled strategy");
}

namespace {

std::string resolved_cache_dir(const ExperimentConfig& cfg) {
    return cfg.cache_dir.empty() ? cfg.output_dir + "/cache" : cfg.cache_dir;
}

// Reasoning transcript for quality scoring: all step completions joined.
std::string full_transcript(const CompletionRecord& record) {
    if (record.step_texts.size() <= 1) return record.text;
    std::string joined;
    for (std::size_t i = 0; i < record.step_texts.size(); ++i) {
        if (i) joined += "\n";
        joined += record.step_texts[i];
    }
    return joined;
}

std::vector<std::string> source_sentences(const Instance& instance) {
    if (instance.task == Task::mgsm)
        return split_sentences(instance.fields.at("question"));
    std::vector<std::string> sentences;
    for (const auto& field : task_fields(instance.task))
        sentences.push_back(instance.fields.at(field));
    return sentences;
}

void write_roscoe(const ExperimentConfig& cfg, const std::vector<WorkItem>& items,
                  const std::vector<std::optional<CompletionRecord>>& completions,
                  const LanguageTable& table) {
    HashEmbedder embedder(cfg.roscoe.dim);
    std::vector<std::size_t> scored;  // item indices with a completion
    std::vector<ReasoningChain> chains;
    std::vector<SourceContext> sources;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!completions[i]) continue;
        scored.push_back(i);
        chains.push_back(ReasoningChain::from_steps(
            segment_steps(full_transcript(*completions[i]), table), embedder));
        sources.push_back(SourceContext::from_sentences(source_sentences(*items[i].instance),
                                                        embedder));
    }
    std::vector<RoscoeReport> reports = score_batch(chains, sources);

    std::ofstream out(cfg.output_dir + "/roscoe.jsonl", std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + cfg.output_dir + "/roscoe.jsonl");
    for (std::size_t row = 0; row < scored.size(); ++row) {
        const WorkItem& item = items[scored[row]];
        json doc;
        doc["instance_id"] = item.instance->id;
        doc["language"] = item.instance->language.str();
        doc["run_index"] = item.run_index;
        doc["steps"] = chains[row].steps.size();
        doc["alignment"] = reports[row].alignment;
        doc["faithfulness"] = reports[row].faithfulness;
        doc["info_step"] = reports[row].info_step;
        doc["info_chain"] = reports[row].info_chain;
        out << doc.dump() << "\n";
    }
    out.flush();
    if (!out) throw std::runtime_error("short write to " + cfg.output_dir + "/roscoe.jsonl");
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& cfg, CompletionProvider* provider) {
    validate_config(cfg);

    LanguageTable loaded_table;
    const LanguageTable* table = &LanguageTable::builtin();
    if (!cfg.language_table.empty()) {
        loaded_table = LanguageTable::load(cfg.language_table);
        table = &loaded_table;
    }
    ResourceTable resources = cfg.resource_percentages
                                  ? ResourceTable(*cfg.resource_percentages)
                                  : ResourceTable::commoncrawl();

    FewShotConfig shots;
    shots.k = cfg.shots.k;
    shots.seed = cfg.shots.seed;
    if (cfg.shots.k > 0) shots.pool = load_exemplar_pool(cfg.shots.pool, cfg.task);

    // Load and sample every language subset up front, in config order.
    const std::size_t sample_n = cfg.sample_n.value_or(default_test_size(cfg.task));
    std::vector<Dataset> datasets;
    for (const auto& code : cfg.languages) {
        const std::string path =
            cfg.data_dir + "/" + task_name(cfg.task) + "_" + code.str() + ".jsonl";
        datasets.push_back(sample_test_set(load_dataset(path, cfg.task, code), sample_n,
                                           cfg.seed));
    }

    // Canonical order: config language order, file order, run index.
    std::vector<WorkItem> items;
    for (const auto& dataset : datasets)
        for (const auto& instance : dataset.instances) {
            RenderedPrompt prompt = render_prompt(cfg, instance, resources, *table);
            prompt = assemble_few_shot(prompt, shots, *table);
            if (has_unresolved_placeholder(prompt))
                throw std::logic_error("rendered prompt for " + instance.id +
                                       " still carries a template marker");
            for (int run = 0; run < cfg.n_runs; ++run) {
                WorkItem item;
                item.instance = &instance;
                item.run_index = run;
                item.request = CompletionRequest{cfg.model,  prompt.steps, cfg.temperature,
                                                 cfg.top_p,  cfg.max_tokens, run};
                item.digest = request_digest(item.request);
                items.push_back(std::move(item));
            }
        }

    // Provider stack: optional injected inner, wrapped by the disk cache.
    std::unique_ptr<ScriptedProvider> scripted;
    std::unique_ptr<Transport> transport;
    std::unique_ptr<LiveProvider> live;
    CompletionProvider* inner = provider;
    bool cache_only = false;
    if (!inner) {
        switch (cfg.provider.mode) {
            case ProviderMode::scripted:
                scripted = std::make_unique<ScriptedProvider>(cfg.provider.scripted_path);
                inner = scripted.get();
                break;
            case ProviderMode::live:
                transport = std::make_unique<HttplibTransport>();
                live = std::make_unique<LiveProvider>(cfg.provider, *transport);
                inner = live.get();
                break;
            case ProviderMode::cache_only:
                cache_only = true;
                break;
        }
    }
    CachingProvider cache(inner, resolved_cache_dir(cfg), cache_only);

    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream records_out(cfg.output_dir + "/records.jsonl",
                              std::ios::binary | std::ios::trunc);
    if (!records_out)
        throw std::runtime_error("cannot write " + cfg.output_dir + "/records.jsonl");

    std::vector<std::optional<RunRecord>> results(items.size());
    std::vector<std::optional<CompletionRecord>> completions(items.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> aborted{false};
    std::mutex write_mu;
    std::size_t write_next = 0;
    std::exception_ptr fatal;

    auto flush_prefix = [&] {
        while (write_next < results.size() && results[write_next]) {
            records_out << run_record_to_json(*results[write_next]) << "\n";
            records_out.flush();
            ++write_next;
        }
    };

    auto worker = [&] {
        while (!aborted.load()) {
            const std::size_t index = next.fetch_add(1);
            if (index >= items.size()) return;
            const WorkItem& item = items[index];
            RunRecord rec{item.instance->id, item.instance->language,       item.run_index,
                          item.digest,       ExtractedAnswer::none("pending"), false,
                          0.0,               false};
            try {
                CompletionRecord completion = cache.complete(item.request);
                rec.latency_ms = completion.latency_ms;
                rec.extracted = extract_answer(completion.text, *item.instance, *table);
                rec.correct = score(rec.extracted, item.instance->gold);
                std::lock_guard<std::mutex> lock(write_mu);
                completions[index].emplace(std::move(completion));
                results[index].emplace(std::move(rec));
                flush_prefix();
            } catch (const ProviderError& e) {
                rec.extracted =
                    ExtractedAnswer::none(std::string("provider failure: ") + e.what());
                rec.correct = false;
                rec.provider_failed = true;
                std::lock_guard<std::mutex> lock(write_mu);
                results[index].emplace(std::move(rec));
                flush_prefix();
            } catch (...) {
                std::lock_guard<std::mutex> lock(write_mu);
                if (!fatal) fatal = std::current_exception();
                aborted.store(true);
                return;
            }
        }
    };

    const std::size_t pool_size =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.parallelism), items.size());
    if (pool_size <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(pool_size);
        for (std::size_t i = 0; i < pool_size; ++i) threads.emplace_back(worker);
        for (auto& thread : threads) thread.join();
    }
    if (fatal) std::rethrow_exception(fatal);

    std::vector<RunRecord> records;
    records.reserve(items.size());
    for (const auto& rec : results) records.push_back(*rec);

    ResultTable result_table = table_from_records(records);
    write_file(cfg.output_dir + "/results.md", emit_report(result_table, ReportFormat::markdown));
    write_file(cfg.output_dir + "/results.csv", emit_report(result_table, ReportFormat::csv));
    write_file(cfg.output_dir + "/results.json", emit_report(result_table, ReportFormat::json));
    if (cfg.roscoe.enabled) write_roscoe(cfg, items, completions, *table);
    return result_table;
}

std::vector<SweepPoint> sweep_languages(const ExperimentConfig& cfg,
                                        const std::vector<std::size_t>& sizes,
                                        CompletionProvider* provider) {
    validate_config(cfg);
    if (cfg.strategy != Strategy::cross_tot)
        config_error("language sweeps require the cross_tot strategy");
    if (sizes.empty()) config_error("sweep needs at least one size");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] == 0) config_error("sweep sizes must be positive");
        if (sizes[i] > cfg.languages.size())
            config_error("sweep size " + std::to_string(sizes[i]) +
                         " exceeds the configured language list");
        if (i > 0 && sizes[i] < sizes[i - 1]) config_error("sweep sizes must be nondecreasing");
    }

    std::vector<SweepPoint> points;
    for (std::size_t size : sizes)
        for (bool with_english : {false, true}) {
            ExperimentConfig arm = cfg;
            arm.plan_options.count = size;
            arm.plan_options.include_english = with_english;
            arm.output_dir = cfg.output_dir + "/sweep_" + std::to_string(size) +
                             (with_english ? "_en" : "_base");
            arm.cache_dir = resolved_cache_dir(cfg);  // one cache across all arms
            ResultTable table = run_experiment(arm, provider);
            points.push_back(SweepPoint{size, with_english, table.overall_avg});
        }
    return points;
}

std::string emit_sweep(const std::vector<SweepPoint>& points, ReportFormat format) {
    std::ostringstream out;
    switch (format) {
        case ReportFormat::markdown:
            out << "| Languages | +English | Avg |\n| --- | --- | --- |\n";
            for (const auto& point : points)
                out << "| " << point.size << " | " << (point.include_english ? "yes" : "no")
                    << " | " << format1(point.average_accuracy) << " |\n";
            return out.str();
        case ReportFormat::csv:
            out << "size,include_english,avg\n";
            for (const auto& point : points)
                out << point.size << "," << (point.include_english ? "true" : "false") << ","
                    << format1(point.average_accuracy) << "\n";
            return out.str();
        case ReportFormat::json: {
            json doc = json::array();
            for (const auto& point : points) {
                json row;
                row["size"] = point.size;
                row["include_english"] = point.include_english;
                row["average_accuracy"] = round1(point.average_accuracy);
                doc.push_back(std::move(row));
            }
            return doc.dump(2) + "\n";
        }
    }
    throw std::logic_error("unhandled report format");
}

}  // namespace xcot
