#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <set>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"
#include "xcot/runner.hpp"

using namespace xcot;
using testsupport::TempDir;

namespace {

LanguageCode lang(const char* code) { return LanguageCode::parse(code); }

Dataset synthetic_mgsm(const char* code, int n) {
    Dataset dataset{Task::mgsm, lang(code), {}};
    for (int i = 1; i <= n; ++i) {
        std::map<std::string, std::string> fields;
        fields["question"] = std::string("Frage ") + code + " " + std::to_string(i) +
                             ": Was ist " + std::to_string(i) + " plus " + std::to_string(i) +
                             "?";
        dataset.instances.push_back(Instance{std::string(code) + "_q" + std::to_string(i),
                                             Task::mgsm, dataset.language, std::move(fields),
                                             GoldAnswer::numeric(std::to_string(2 * i)),
                                             std::nullopt});
    }
    return dataset;
}

ExperimentConfig scripted_base(const TempDir& tmp, const std::string& out_name) {
    ExperimentConfig cfg;
    cfg.task = Task::mgsm;
    cfg.languages = {lang("de"), lang("zh")};
    cfg.strategy = Strategy::cross_tot;
    cfg.n_runs = 2;
    cfg.sample_n = 4;
    cfg.data_dir = tmp.str("data");
    cfg.output_dir = tmp.str(out_name);
    cfg.parallelism = 3;
    return cfg;
}

void write_datasets(const ExperimentConfig& cfg, int n) {
    std::filesystem::create_directories(cfg.data_dir);
    for (const auto& code : cfg.languages)
        save_dataset(synthetic_mgsm(code.str().c_str(), n),
                     cfg.data_dir + "/mgsm_" + code.str() + ".jsonl");
}

// Replay fixture keyed by rendered prompt text; `reply(inst)` may return an
// empty string to leave that instance unscripted.
std::string scripted_fixture(const ExperimentConfig& cfg,
                             const std::function<std::string(const Instance&)>& reply) {
    std::string rows;
    for (const auto& code : cfg.languages) {
        Dataset dataset = load_dataset(cfg.data_dir + "/mgsm_" + code.str() + ".jsonl",
                                       cfg.task, code);
        for (const auto& inst : dataset.instances) {
            const std::string text = reply(inst);
            if (text.empty()) continue;
            RenderedPrompt prompt = render_prompt(cfg, inst, ResourceTable::commoncrawl());
            REQUIRE(prompt.steps.size() == 1);
            rows += nlohmann::json{{"prompt_text", prompt.steps[0].back().content},
                                   {"text", text}}
                        .dump() +
                    "\n";
        }
    }
    return rows;
}

// Looks the question up in the prompt and answers with its gold value.
class GoldEchoProvider final : public CompletionProvider {
  public:
    explicit GoldEchoProvider(std::vector<Dataset> datasets) : datasets_(std::move(datasets)) {}

    CompletionRecord complete(const CompletionRequest& req) override {
        const std::string& content = req.steps.back().back().content;
        for (const auto& dataset : datasets_)
            for (const auto& inst : dataset.instances)
                if (content.find(inst.fields.at("question")) != std::string::npos) {
                    CompletionRecord rec;
                    rec.request_digest = request_digest(req);
                    rec.text = "Let me work through it.\nAnswer: " + inst.gold.text() + ".";
                    rec.step_texts = {rec.text};
                    rec.latency_ms = 1.0;
                    return rec;
                }
        throw ProviderError(ProviderErrorKind::unscripted, "no instance matches the prompt");
    }

  private:
    std::vector<Dataset> datasets_;
};

RunRecord make_record(const std::string& id, const char* code, int run, bool correct) {
    return RunRecord{id,
                     lang(code),
                     run,
                     "digest-" + id + "-" + std::to_string(run),
                     ExtractedAnswer::numeric("1", 1.0),
                     correct,
                     2.0,
                     false};
}

}  // namespace

TEST_CASE("default test sizes") {
    CHECK(default_test_size(Task::mgsm) == 250);
    CHECK(default_test_size(Task::xnli) == 200);
    CHECK(default_test_size(Task::pawsx) == 200);
    CHECK(default_test_size(Task::xcopa) == 200);
}

TEST_CASE("experiment config loads from json") {
    TempDir tmp;
    const std::string path = tmp.str("config.json");

    SUBCASE("full config round trips every field") {
        testsupport::write_file(path, R"({
            "task": "xnli",
            "languages": ["es", "de"],
            "strategy": "cross_tot",
            "plan_options": {"direction": "ascending", "include_english": true, "count": 2},
            "shots": {"k": 2, "pool": "pool.jsonl", "seed": 11},
            "provider": {
                "base_url": "http://localhost:9/v1",
                "api_key_env": "MY_KEY",
                "retry": {"max_attempts": 5, "backoff_base_ms": 50},
                "timeout_s": 10,
                "mode": "scripted",
                "scripted_path": "replies.jsonl"
            },
            "model": "test-model",
            "temperature": 0.5,
            "top_p": 0.9,
            "max_tokens": 256,
            "n_runs": 4,
            "seed": 7,
            "data_dir": "my_data",
            "sample_n": 50,
            "output_dir": "my_out",
            "parallelism": 8,
            "cache_dir": "my_cache",
            "roscoe": {"enabled": true, "dim": 32},
            "target_language": "en",
            "resource_percentages": {"es": 4.2, "de": 5.4},
            "language_table": "langs.json"
        })");
        ExperimentConfig cfg = load_experiment_config(path);
        CHECK(cfg.task == Task::xnli);
        REQUIRE(cfg.languages.size() == 2);
        CHECK(cfg.languages[0] == lang("es"));
        CHECK(cfg.strategy == Strategy::cross_tot);
        CHECK(cfg.plan_options.direction == OrderDirection::ascending);
        CHECK(cfg.plan_options.include_english);
        CHECK(cfg.plan_options.count == std::size_t{2});
        CHECK(cfg.shots.k == 2);
        CHECK(cfg.shots.pool == "pool.jsonl");
        CHECK(cfg.shots.seed == 11);
        CHECK(cfg.provider.base_url == "http://localhost:9/v1");
        CHECK(cfg.provider.api_key_env == "MY_KEY");
        CHECK(cfg.provider.retry.max_attempts == 5);
        CHECK(cfg.provider.retry.backoff_base_ms == 50);
        CHECK(cfg.provider.timeout_s == 10);
        CHECK(cfg.provider.mode == ProviderMode::scripted);
        CHECK(cfg.provider.scripted_path == "replies.jsonl");
        CHECK(cfg.model == "test-model");
        CHECK(cfg.temperature == 0.5);
        CHECK(cfg.top_p == 0.9);
        CHECK(cfg.max_tokens == 256);
        CHECK(cfg.n_runs == 4);
        CHECK(cfg.seed == 7);
        CHECK(cfg.data_dir == "my_data");
        CHECK(cfg.sample_n == std::size_t{50});
        CHECK(cfg.output_dir == "my_out");
        CHECK(cfg.parallelism == 8);
        CHECK(cfg.cache_dir == "my_cache");
        CHECK(cfg.roscoe.enabled);
        CHECK(cfg.roscoe.dim == 32);
        CHECK(cfg.target_language == kEnglish);
        REQUIRE(cfg.resource_percentages.has_value());
        CHECK(cfg.resource_percentages->at("de") == 5.4);
        CHECK(cfg.language_table == "langs.json");
    }
    SUBCASE("minimal config falls back to defaults") {
        testsupport::write_file(
            path, R"({"task": "mgsm", "languages": ["de"], "output_dir": "out"})");
        ExperimentConfig cfg = load_experiment_config(path);
        CHECK(cfg.strategy == Strategy::cross_tot);
        CHECK(cfg.model == "gpt-3.5-turbo");
        CHECK(cfg.temperature == 0.0);
        CHECK(cfg.n_runs == 3);
        CHECK(cfg.max_tokens == 1024);
        CHECK_FALSE(cfg.sample_n.has_value());
        CHECK(cfg.cache_dir.empty());
        CHECK_FALSE(cfg.roscoe.enabled);
    }
    SUBCASE("unknown keys are rejected at every level") {
        testsupport::write_file(
            path, R"({"task": "mgsm", "languages": ["de"], "output_dir": "o", "typo": 1})");
        CHECK_THROWS_WITH_AS(load_experiment_config(path), doctest::Contains("unknown key"),
                             std::runtime_error);
        testsupport::write_file(path, R"({"task": "mgsm", "languages": ["de"],
            "output_dir": "o", "plan_options": {"direktion": "ascending"}})");
        CHECK_THROWS_WITH_AS(load_experiment_config(path), doctest::Contains("plan_options"),
                             std::runtime_error);
    }
    SUBCASE("malformed values are rejected") {
        testsupport::write_file(path, "{not json");
        CHECK_THROWS(load_experiment_config(path));
        testsupport::write_file(
            path, R"({"task": "riddles", "languages": ["de"], "output_dir": "o"})");
        CHECK_THROWS(load_experiment_config(path));
        testsupport::write_file(
            path, R"({"task": "mgsm", "languages": ["xx"], "output_dir": "o"})");
        CHECK_THROWS(load_experiment_config(path));
        testsupport::write_file(
            path, R"({"task": "mgsm", "languages": "de", "output_dir": "o"})");
        CHECK_THROWS(load_experiment_config(path));
    }
}

TEST_CASE("config validation") {
    ExperimentConfig cfg;
    cfg.languages = {lang("de")};
    cfg.output_dir = "out";
    CHECK_NOTHROW(validate_config(cfg));

    SUBCASE("language list") {
        cfg.languages.clear();
        CHECK_THROWS(validate_config(cfg));
        cfg.languages = {lang("de"), lang("de")};
        CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("duplicate"),
                             std::runtime_error);
    }
    SUBCASE("scalar bounds") {
        auto broken = [&](auto mutate) {
            ExperimentConfig copy = cfg;
            mutate(copy);
            CHECK_THROWS(validate_config(copy));
        };
        broken([](ExperimentConfig& c) { c.model.clear(); });
        broken([](ExperimentConfig& c) { c.temperature = 2.5; });
        broken([](ExperimentConfig& c) { c.temperature = -0.1; });
        broken([](ExperimentConfig& c) { c.top_p = 0.0; });
        broken([](ExperimentConfig& c) { c.top_p = 1.5; });
        broken([](ExperimentConfig& c) { c.max_tokens = 0; });
        broken([](ExperimentConfig& c) { c.n_runs = 0; });
        broken([](ExperimentConfig& c) { c.parallelism = 0; });
        broken([](ExperimentConfig& c) { c.data_dir.clear(); });
        broken([](ExperimentConfig& c) { c.output_dir.clear(); });
        broken([](ExperimentConfig& c) { c.sample_n = 0; });
        broken([](ExperimentConfig& c) { c.provider.retry.max_attempts = 0; });
        broken([](ExperimentConfig& c) { c.provider.timeout_s = 0; });
        broken([](ExperimentConfig& c) {
            c.roscoe.enabled = true;
            c.roscoe.dim = 0;
        });
    }
    SUBCASE("cross-strategy constraints") {
        cfg.shots.k = 2;
        CHECK_THROWS(validate_config(cfg));  // no pool
        cfg.shots.k = 0;
        cfg.provider.mode = ProviderMode::scripted;
        CHECK_THROWS(validate_config(cfg));  // no scripted_path
        cfg.provider.mode = ProviderMode::live;
        cfg.strategy = Strategy::cross_cot;
        cfg.languages = {kEnglish};
        CHECK_THROWS(validate_config(cfg));  // source equals target
        cfg.strategy = Strategy::cross_tot;
        cfg.languages = {lang("de"), lang("ru")};
        cfg.plan_options.count = 3;
        CHECK_THROWS(validate_config(cfg));  // count exceeds list
        cfg.plan_options.count = 0;
        CHECK_THROWS(validate_config(cfg));
    }
}

TEST_CASE("run records round trip through jsonl") {
    RunRecord rec = make_record("mgsm_de_0001", "de", 2, true);
    rec.extracted = ExtractedAnswer::numeric("1,234", 1234.0);
    rec.latency_ms = 17.25;
    CHECK(run_record_from_json(run_record_to_json(rec)) == rec);

    rec.extracted = ExtractedAnswer::label("Yes");
    CHECK(run_record_from_json(run_record_to_json(rec)) == rec);

    rec.extracted = ExtractedAnswer::none("provider failure: boom");
    rec.provider_failed = true;
    CHECK(run_record_from_json(run_record_to_json(rec)) == rec);

    CHECK_THROWS_WITH_AS(run_record_from_json("{}"), doctest::Contains("bad record"),
                         std::runtime_error);
    CHECK_THROWS(run_record_from_json("not json"));

    TempDir tmp;
    testsupport::write_file(tmp.str("records.jsonl"),
                            run_record_to_json(rec) + "\n" + run_record_to_json(rec) + "\n");
    CHECK(load_run_records(tmp.str("records.jsonl")).size() == 2);
    testsupport::write_file(tmp.str("bad.jsonl"), "{}\n");
    CHECK_THROWS_WITH_AS(load_run_records(tmp.str("bad.jsonl")), doctest::Contains(":1:"),
                         std::runtime_error);
}

TEST_CASE("result tables aggregate records") {
    std::vector<RunRecord> records = {
        make_record("a1", "de", 0, true),  make_record("a2", "de", 0, true),
        make_record("a1", "fr", 0, false), make_record("a2", "fr", 0, false),
        make_record("a1", "de", 1, true),  make_record("a2", "de", 1, false),
        make_record("a1", "fr", 1, true),  make_record("a2", "fr", 1, true),
    };
    records[3].extracted = ExtractedAnswer::none("provider failure: down");
    records[3].provider_failed = true;
    records[5].extracted = ExtractedAnswer::none("no marker");

    ResultTable table = table_from_records(records);
    CHECK(table.languages == std::vector<std::string>{"de", "fr"});
    CHECK(table.n_runs == 2);
    CHECK(table.instances_per_language == 2);
    CHECK(table.provider_failures == 1);
    CHECK(table.unparsed == 2);
    CHECK(table.per_run[0] == std::vector<double>{100.0, 0.0});
    CHECK(table.per_run[1] == std::vector<double>{50.0, 100.0});
    CHECK(table.run_avg == std::vector<double>{75.0, 50.0});
    CHECK(table.overall_avg == 62.5);

    SUBCASE("every language needs records in every run") {
        records.erase(records.begin() + 7);
        records.erase(records.begin() + 6);  // fr missing from run 2
        CHECK_THROWS_WITH_AS(table_from_records(records), doctest::Contains("fr"),
                             std::runtime_error);
    }
    SUBCASE("empty input is rejected") { CHECK_THROWS(table_from_records({})); }
}

TEST_CASE("reports render one decimal in three formats") {
    std::vector<RunRecord> records = {
        make_record("a1", "de", 0, true),  make_record("a2", "de", 0, true),
        make_record("a1", "fr", 0, false), make_record("a2", "fr", 0, false),
        make_record("a1", "de", 1, true),  make_record("a2", "de", 1, false),
        make_record("a1", "fr", 1, true),  make_record("a2", "fr", 1, true),
    };
    ResultTable table = table_from_records(records);

    const std::string markdown = emit_report(table, ReportFormat::markdown);
    CHECK(markdown ==
          "| Run | de | fr | Avg |\n"
          "| --- | --- | --- | --- |\n"
          "| 1 | 100.0 | 0.0 | 50.0 |\n"
          "| 2 | 50.0 | 100.0 | 75.0 |\n"
          "| Avg | 75.0 | 50.0 | 62.5 |\n");
    CHECK(emit_report(table, ReportFormat::csv) ==
          "run,de,fr,avg\n"
          "1,100.0,0.0,50.0\n"
          "2,50.0,100.0,75.0\n"
          "avg,75.0,50.0,62.5\n");

    const std::string json_text = emit_report(table, ReportFormat::json);
    nlohmann::json doc = nlohmann::json::parse(json_text);
    CHECK(doc["languages"] == nlohmann::json::array({"de", "fr"}));
    CHECK(doc["n_runs"] == 2);
    CHECK(doc["instances_per_language"] == 2);
    CHECK(doc["per_run"][0] == nlohmann::json::array({100.0, 0.0}));
    CHECK(doc["run_avg"] == nlohmann::json::array({75.0, 50.0}));
    CHECK(doc["row_avg"] == nlohmann::json::array({50.0, 75.0}));
    CHECK(doc["overall_avg"] == 62.5);
    CHECK(json_text.back() == '\n');

    // Rendering is pure: repeated calls emit identical bytes.
    CHECK(emit_report(table, ReportFormat::markdown) == markdown);
    CHECK(emit_report(table, ReportFormat::json) == json_text);

    CHECK(parse_report_format("md") == ReportFormat::markdown);
    CHECK(parse_report_format("markdown") == ReportFormat::markdown);
    CHECK(parse_report_format("csv") == ReportFormat::csv);
    CHECK(parse_report_format("json") == ReportFormat::json);
    CHECK_THROWS_AS(parse_report_format("yaml"), std::invalid_argument);
}

TEST_CASE("prompt rendering follows the configured strategy") {
    ExperimentConfig cfg;
    cfg.task = Task::mgsm;
    cfg.languages = {lang("de"), lang("ru"), lang("zh")};
    cfg.output_dir = "out";
    Instance inst = testsupport::load_fixture_instance("mgsm_de.jsonl", Task::mgsm, "de",
                                                       "mgsm_de_0001");
    const ResourceTable& resources = ResourceTable::commoncrawl();

    cfg.strategy = Strategy::cross_tot;
    RenderedPrompt tot = render_prompt(cfg, inst, resources);
    REQUIRE(tot.steps.size() == 1);
    CHECK(tot.steps[0].back().content.find("3 mathematicians") != std::string::npos);
    CHECK(tot.steps[0].back().content.find("German, Russian and Chinese") != std::string::npos);

    cfg.plan_options.count = 2;
    CHECK(render_prompt(cfg, inst, resources)
              .steps[0]
              .back()
              .content.find("2 mathematicians") != std::string::npos);
    cfg.plan_options.count.reset();

    cfg.strategy = Strategy::cross_tot_binary;
    RenderedPrompt binary = render_prompt(cfg, inst, resources);
    CHECK(binary.steps[0].back().content.find("2 mathematicians") != std::string::npos);
    CHECK(binary.steps[0].back().content.find("German and English") != std::string::npos);

    cfg.strategy = Strategy::cross_cot;
    CHECK(render_prompt(cfg, inst, resources).steps.size() == 2);

    cfg.strategy = Strategy::direct;
    RenderedPrompt direct = render_prompt(cfg, inst, resources);
    REQUIRE(direct.steps.size() == 1);
    CHECK(direct.steps[0].back().content.find("Frage:") != std::string::npos);
}

TEST_CASE("experiment pipeline") {
    TempDir tmp;
    ExperimentConfig cfg = scripted_base(tmp, "out");
    write_datasets(cfg, 4);

    // de: 3 of 4 correct; zh: 2 of 4 correct. Same replies on every run.
    auto reply = [](const Instance& inst) {
        if (inst.id == "de_q4" || inst.id == "zh_q3" || inst.id == "zh_q4")
            return std::string("Hmm.\nAnswer: 999.");
        return "Step by step it comes out.\nAnswer: " + inst.gold.text() + ".";
    };

    SUBCASE("scripted run produces records, reports and scores") {
        cfg.roscoe.enabled = true;
        cfg.roscoe.dim = 16;
        testsupport::write_file(tmp.str("replies.jsonl"), scripted_fixture(cfg, reply));
        ScriptedProvider scripted(tmp.str("replies.jsonl"));

        ResultTable table = run_experiment(cfg, &scripted);
        CHECK(scripted.call_count() == 16);  // 2 languages x 4 instances x 2 runs
        CHECK(table.languages == std::vector<std::string>{"de", "zh"});
        CHECK(table.per_run[0] == std::vector<double>{75.0, 50.0});
        CHECK(table.per_run[1] == std::vector<double>{75.0, 50.0});
        CHECK(table.overall_avg == 62.5);
        CHECK(table.provider_failures == 0);
        CHECK(table.unparsed == 0);
        CHECK(table.instances_per_language == 4);

        // records.jsonl holds the canonical order: language, file row, run.
        std::vector<RunRecord> records = load_run_records(cfg.output_dir + "/records.jsonl");
        REQUIRE(records.size() == 16);
        std::vector<std::pair<std::string, int>> order;
        for (const auto& rec : records) order.emplace_back(rec.instance_id, rec.run_index);
        std::vector<std::pair<std::string, int>> expected;
        for (const char* code : {"de", "zh"})
            for (int i = 1; i <= 4; ++i)
                for (int run = 0; run < 2; ++run)
                    expected.emplace_back(std::string(code) + "_q" + std::to_string(i), run);
        CHECK(order == expected);
        for (const auto& rec : records) CHECK_FALSE(rec.prompt_digest.empty());

        for (const char* name : {"results.md", "results.csv", "results.json"})
            CHECK(std::filesystem::exists(cfg.output_dir + "/" + std::string(name)));
        CHECK(testsupport::read_file(cfg.output_dir + "/results.md") ==
              emit_report(table, ReportFormat::markdown));

        // Reasoning-quality scores cover every completed request.
        std::istringstream roscoe(testsupport::read_file(cfg.output_dir + "/roscoe.jsonl"));
        std::string line;
        std::size_t rows = 0;
        while (std::getline(roscoe, line)) {
            nlohmann::json doc = nlohmann::json::parse(line);
            CHECK(doc["steps"].get<int>() >= 1);
            for (const char* key : {"faithfulness", "info_step", "info_chain"}) {
                const double value = doc[key].get<double>();
                CHECK(value >= 0.0);
                CHECK(value <= 1.0);
            }
            ++rows;
        }
        CHECK(rows == 16);

        // A rerun replays from the cache: no new provider traffic, same bytes.
        const std::string first_md = testsupport::read_file(cfg.output_dir + "/results.md");
        ResultTable again = run_experiment(cfg, &scripted);
        CHECK(scripted.call_count() == 16);
        CHECK(testsupport::read_file(cfg.output_dir + "/results.md") == first_md);
        CHECK(again.overall_avg == table.overall_avg);

        // Cache-only mode needs no provider at all once the cache is warm.
        ExperimentConfig offline = cfg;
        offline.provider.mode = ProviderMode::cache_only;
        offline.output_dir = tmp.str("out_offline");
        offline.cache_dir = cfg.output_dir + "/cache";
        ResultTable replayed = run_experiment(offline, nullptr);
        CHECK(replayed.per_run == table.per_run);
        CHECK(testsupport::read_file(offline.output_dir + "/results.md") == first_md);
    }
    SUBCASE("provider failures are recorded, not fatal") {
        auto partial = [&](const Instance& inst) {
            if (inst.id == "zh_q4") return std::string();  // unscripted
            return reply(inst);
        };
        testsupport::write_file(tmp.str("replies.jsonl"), scripted_fixture(cfg, partial));
        ScriptedProvider scripted(tmp.str("replies.jsonl"));

        ResultTable table = run_experiment(cfg, &scripted);
        CHECK(table.provider_failures == 2);  // zh_q4 on both runs
        CHECK(table.unparsed == 2);
        CHECK(table.per_run[0] == std::vector<double>{75.0, 50.0});

        std::vector<RunRecord> records = load_run_records(cfg.output_dir + "/records.jsonl");
        std::size_t failed = 0;
        for (const auto& rec : records)
            if (rec.provider_failed) {
                ++failed;
                CHECK(rec.instance_id == "zh_q4");
                CHECK_FALSE(rec.correct);
                CHECK(rec.extracted.kind == AnswerKind::none);
                CHECK(rec.extracted.reason.find("provider failure") != std::string::npos);
            }
        CHECK(failed == 2);
    }
    SUBCASE("fatal provider exceptions abort the run") {
        struct BrokenProvider final : CompletionProvider {
            CompletionRecord complete(const CompletionRequest&) override {
                throw std::logic_error("wires crossed");
            }
        } broken;
        CHECK_THROWS_WITH_AS(run_experiment(cfg, &broken), doctest::Contains("wires crossed"),
                             std::logic_error);
    }
    SUBCASE("missing dataset files fail upfront") {
        cfg.languages.push_back(lang("fr"));  // no mgsm_fr.jsonl in data_dir
        CHECK_THROWS(run_experiment(cfg, nullptr));
    }
}

TEST_CASE("language sweeps run one arm per size and english flag") {
    TempDir tmp;
    ExperimentConfig cfg = scripted_base(tmp, "sweep_out");
    cfg.n_runs = 1;
    cfg.sample_n = 2;
    write_datasets(cfg, 2);

    std::vector<Dataset> datasets;
    for (const auto& code : cfg.languages)
        datasets.push_back(
            load_dataset(cfg.data_dir + "/mgsm_" + code.str() + ".jsonl", cfg.task, code));
    GoldEchoProvider provider(datasets);

    std::vector<SweepPoint> points = sweep_languages(cfg, {1, 2}, &provider);
    REQUIRE(points.size() == 4);
    CHECK(points[0].size == 1);
    CHECK_FALSE(points[0].include_english);
    CHECK(points[1].size == 1);
    CHECK(points[1].include_english);
    CHECK(points[2].size == 2);
    CHECK_FALSE(points[2].include_english);
    CHECK(points[3].size == 2);
    CHECK(points[3].include_english);
    for (const auto& point : points) CHECK(point.average_accuracy == 100.0);

    for (const char* arm : {"sweep_1_base", "sweep_1_en", "sweep_2_base", "sweep_2_en"}) {
        CHECK(std::filesystem::exists(cfg.output_dir + "/" + std::string(arm) + "/results.json"));
        // Arms share the parent cache instead of growing their own.
        CHECK_FALSE(std::filesystem::exists(cfg.output_dir + "/" + std::string(arm) + "/cache"));
    }
    CHECK(std::filesystem::exists(cfg.output_dir + "/cache"));

    SUBCASE("sweep validation") {
        CHECK_THROWS(sweep_languages(cfg, {}, &provider));
        CHECK_THROWS(sweep_languages(cfg, {0}, &provider));
        CHECK_THROWS(sweep_languages(cfg, {2, 1}, &provider));
        CHECK_THROWS(sweep_languages(cfg, {3}, &provider));  // only two languages configured
        ExperimentConfig direct = cfg;
        direct.strategy = Strategy::direct;
        CHECK_THROWS(sweep_languages(direct, {1}, &provider));
    }
}

TEST_CASE("sweep series render in three formats") {
    std::vector<SweepPoint> points = {{2, false, 55.0}, {2, true, 57.46}};
    CHECK(emit_sweep(points, ReportFormat::markdown) ==
          "| Languages | +English | Avg |\n"
          "| --- | --- | --- |\n"
          "| 2 | no | 55.0 |\n"
          "| 2 | yes | 57.5 |\n");
    CHECK(emit_sweep(points, ReportFormat::csv) ==
          "size,include_english,avg\n"
          "2,false,55.0\n"
          "2,true,57.5\n");
    nlohmann::json doc = nlohmann::json::parse(emit_sweep(points, ReportFormat::json));
    REQUIRE(doc.size() == 2);
    CHECK(doc[0]["size"] == 2);
    CHECK(doc[0]["include_english"] == false);
    CHECK(doc[0]["average_accuracy"] == 55.0);
    CHECK(doc[1]["average_accuracy"] == 57.5);
}
