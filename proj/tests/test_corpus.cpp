#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "doctest.h"
#include "support.hpp"
#include "xcot/corpus.hpp"
#include "xcot/lang.hpp"

using namespace xcot;
using testsupport::fixture_path;
using testsupport::TempDir;

TEST_CASE("task names, fields and labels") {
    CHECK(task_name(Task::mgsm) == "mgsm");
    CHECK(parse_task("PAWS-X") == Task::pawsx);
    CHECK(parse_task("xcopa") == Task::xcopa);
    CHECK_THROWS_AS(parse_task("sudoku"), std::invalid_argument);

    CHECK(task_fields(Task::mgsm) == std::vector<std::string>{"question"});
    CHECK(task_fields(Task::xcopa) ==
          std::vector<std::string>{"premise", "question", "choice1", "choice2"});
    CHECK(task_labels(Task::xnli) == std::vector<std::string>{"Yes", "No", "Maybe"});
    CHECK(task_labels(Task::pawsx) == std::vector<std::string>{"Yes", "No"});
    CHECK(task_labels(Task::mgsm).empty());
}

TEST_CASE("language registry") {
    CHECK(LanguageCode::is_registered("en"));
    CHECK(LanguageCode::is_registered("qu"));
    CHECK_FALSE(LanguageCode::is_registered("xx"));
    CHECK_THROWS(LanguageCode::parse("xx"));
    CHECK(LanguageCode::parse("de").str() == "de");
    CHECK(kEnglish.str() == "en");

    const auto codes = registered_languages();
    std::set<std::string> seen;
    for (const auto& code : codes) seen.insert(code.str());
    CHECK(seen.size() == codes.size());
    for (const char* code : {"bn", "de", "en", "es", "et", "fr", "ht", "id", "it", "ja", "qu",
                             "ru", "sw", "ta", "te", "th", "tr", "vi", "zh"})
        CHECK(seen.count(code) == 1);
}

TEST_CASE("builtin table carries localized prompt vocabulary") {
    const auto& table = LanguageTable::builtin();
    CHECK(table.info(LanguageCode::parse("zh")).question_word == "问题");
    CHECK(table.info(LanguageCode::parse("de")).answer_word == "Antwort");
    CHECK(table.info(kEnglish).cot_elicitation == "Let's think step by step");
    for (const auto& entry : table.entries()) {
        CHECK_FALSE(entry.question_word.empty());
        CHECK_FALSE(entry.answer_word.empty());
        CHECK_FALSE(entry.cot_elicitation.empty());
        CHECK_FALSE(entry.yes_forms.empty());
        CHECK_FALSE(entry.no_forms.empty());
        CHECK_FALSE(entry.step_words.empty());
    }
}

TEST_CASE("external language table mirrors the builtin one") {
    const LanguageTable loaded = LanguageTable::load(testsupport::source_path("data/languages.json"));
    const auto& builtin = LanguageTable::builtin().entries();
    REQUIRE(loaded.entries().size() == builtin.size());
    for (const auto& expected : builtin) {
        const auto& actual = loaded.info(LanguageCode::parse(expected.code));
        CHECK(actual.name == expected.name);
        CHECK(actual.question_word == expected.question_word);
        CHECK(actual.answer_word == expected.answer_word);
        CHECK(actual.cot_elicitation == expected.cot_elicitation);
        CHECK(actual.yes_forms == expected.yes_forms);
        CHECK(actual.no_forms == expected.no_forms);
        CHECK(actual.maybe_forms == expected.maybe_forms);
        CHECK(actual.step_words == expected.step_words);
    }
}

TEST_CASE("gold answers") {
    GoldAnswer g = GoldAnswer::numeric("39");
    CHECK(g.is_numeric());
    CHECK(g.numeric_value() == doctest::Approx(39.0));
    CHECK(g.text() == "39");
    CHECK(GoldAnswer::numeric("7.5").numeric_value() == doctest::Approx(7.5));
    CHECK_THROWS(GoldAnswer::numeric("drei"));
    CHECK_THROWS(GoldAnswer::numeric("1,5"));
    CHECK_THROWS(GoldAnswer::numeric(""));

    GoldAnswer label = GoldAnswer::label("Yes");
    CHECK_FALSE(label.is_numeric());
    CHECK_THROWS(label.numeric_value());
}

TEST_CASE("instance row parsing") {
    const std::string good =
        R"({"id":"x1","task":"xnli","language":"es","fields":{"premise":"a","hypothesis":"b"},"gold":{"label":"Maybe"}})";
    Instance inst = parse_instance_row(good);
    CHECK(inst.id == "x1");
    CHECK(inst.task == Task::xnli);
    CHECK(inst.language.str() == "es");
    CHECK(inst.gold.text() == "Maybe");
    CHECK_FALSE(inst.english_parallel.has_value());

    SUBCASE("missing key") {
        CHECK_THROWS_WITH_AS(
            parse_instance_row(R"({"id":"x","task":"xnli","language":"es","gold":{"label":"Yes"}})"),
            doctest::Contains("fields"), std::runtime_error);
    }
    SUBCASE("gold label outside the task's set") {
        CHECK_THROWS(parse_instance_row(
            R"({"id":"x","task":"pawsx","language":"de","fields":{"sentence1":"a","sentence2":"b"},"gold":{"label":"Maybe"}})"));
    }
    SUBCASE("numeric gold restricted to mgsm") {
        CHECK_THROWS(parse_instance_row(
            R"({"id":"x","task":"xnli","language":"es","fields":{"premise":"a","hypothesis":"b"},"gold":{"numeric":"3"}})"));
    }
    SUBCASE("mgsm gold must be numeric") {
        CHECK_THROWS(parse_instance_row(
            R"({"id":"x","task":"mgsm","language":"de","fields":{"question":"a"},"gold":{"label":"Yes"}})"));
    }
    SUBCASE("unexpected field for the task") {
        CHECK_THROWS(parse_instance_row(
            R"({"id":"x","task":"mgsm","language":"de","fields":{"question":"a","premise":"b"},"gold":{"numeric":"3"}})"));
    }
    SUBCASE("blank id") {
        CHECK_THROWS(parse_instance_row(
            R"({"id":"  ","task":"mgsm","language":"de","fields":{"question":"a"},"gold":{"numeric":"3"}})"));
    }
    SUBCASE("english_parallel validated against the same schema") {
        CHECK_THROWS(parse_instance_row(
            R"({"id":"x","task":"mgsm","language":"de","fields":{"question":"a"},"gold":{"numeric":"3"},"english_parallel":{"premise":"b"}})"));
    }
}

TEST_CASE("dataset loading from fixtures") {
    Dataset de = load_dataset(fixture_path("datasets/mgsm_de.jsonl"), Task::mgsm,
                              LanguageCode::parse("de"));
    REQUIRE(de.instances.size() == 4);
    CHECK(de.instances[0].id == "mgsm_de_0001");
    CHECK(de.instances[0].gold.numeric_value() == doctest::Approx(39.0));
    REQUIRE(de.instances[0].english_parallel.has_value());
    CHECK(de.instances[0].english_parallel->at("question").find("Leah") == 0);
    CHECK(de.instances[3].gold.text() == "7.5");

    Dataset et = load_dataset(fixture_path("datasets/xcopa_et.jsonl"), Task::xcopa,
                              LanguageCode::parse("et"));
    CHECK(et.instances[0].fields.at("question") == "effect");
    CHECK(et.instances[0].gold.text() == "choice1");
}

TEST_CASE("dataset loading rejects bad files") {
    TempDir tmp;
    SUBCASE("duplicate ids with line number") {
        const std::string row =
            R"({"id":"a","task":"mgsm","language":"de","fields":{"question":"q"},"gold":{"numeric":"1"}})";
        testsupport::write_file(tmp.str("dup.jsonl"), row + "\n" + row + "\n");
        CHECK_THROWS_WITH_AS(
            load_dataset(tmp.str("dup.jsonl"), Task::mgsm, LanguageCode::parse("de")),
            doctest::Contains(":2: duplicate id"), std::runtime_error);
    }
    SUBCASE("row language must match the requested subset") {
        const std::string row =
            R"({"id":"a","task":"mgsm","language":"fr","fields":{"question":"q"},"gold":{"numeric":"1"}})";
        testsupport::write_file(tmp.str("wrong.jsonl"), row + "\n");
        CHECK_THROWS(load_dataset(tmp.str("wrong.jsonl"), Task::mgsm, LanguageCode::parse("de")));
    }
    SUBCASE("row task must match the requested task") {
        const std::string row =
            R"({"id":"a","task":"mgsm","language":"de","fields":{"question":"q"},"gold":{"numeric":"1"}})";
        testsupport::write_file(tmp.str("task.jsonl"), row + "\n");
        CHECK_THROWS(load_dataset(tmp.str("task.jsonl"), Task::xnli, LanguageCode::parse("de")));
    }
    SUBCASE("empty file") {
        testsupport::write_file(tmp.str("empty.jsonl"), "");
        CHECK_THROWS(load_dataset(tmp.str("empty.jsonl"), Task::mgsm, LanguageCode::parse("de")));
    }
}

TEST_CASE("save/load round trip is canonical and stable") {
    Dataset original = load_dataset(fixture_path("datasets/mgsm_de.jsonl"), Task::mgsm,
                                    LanguageCode::parse("de"));
    TempDir tmp;
    save_dataset(original, tmp.str("one.jsonl"));
    Dataset reloaded =
        load_dataset(tmp.str("one.jsonl"), Task::mgsm, LanguageCode::parse("de"));
    REQUIRE(reloaded.instances.size() == original.instances.size());
    for (std::size_t i = 0; i < original.instances.size(); ++i) {
        CHECK(reloaded.instances[i].id == original.instances[i].id);
        CHECK(reloaded.instances[i].fields == original.instances[i].fields);
        CHECK(reloaded.instances[i].gold == original.instances[i].gold);
        CHECK(reloaded.instances[i].english_parallel == original.instances[i].english_parallel);
    }
    // Once in canonical form, saving is byte-idempotent.
    save_dataset(reloaded, tmp.str("two.jsonl"));
    CHECK(testsupport::read_file(tmp.str("one.jsonl")) ==
          testsupport::read_file(tmp.str("two.jsonl")));
    CHECK(dataset_to_jsonl(reloaded) == testsupport::read_file(tmp.str("one.jsonl")));
}

TEST_CASE("test-set sampling") {
    Dataset de = load_dataset(fixture_path("datasets/mgsm_de.jsonl"), Task::mgsm,
                              LanguageCode::parse("de"));
    SUBCASE("n equal to the dataset keeps file order") {
        Dataset all = sample_test_set(de, 4, 99);
        REQUIRE(all.instances.size() == 4);
        for (std::size_t i = 0; i < 4; ++i) CHECK(all.instances[i].id == de.instances[i].id);
    }
    SUBCASE("deterministic for a fixed seed, file order preserved") {
        Dataset a = sample_test_set(de, 2, 7);
        Dataset b = sample_test_set(de, 2, 7);
        REQUIRE(a.instances.size() == 2);
        CHECK(a.instances[0].id == b.instances[0].id);
        CHECK(a.instances[1].id == b.instances[1].id);
        CHECK(a.instances[0].id < a.instances[1].id);  // ids are file-ordered here
    }
    SUBCASE("oversized request throws") {
        CHECK_THROWS(sample_test_set(de, 5, 7));
    }
}

TEST_CASE("mgsm full-set convention takes the first 250 rows in file order") {
    Dataset big{Task::mgsm, LanguageCode::parse("de"), {}};
    for (int i = 0; i < 260; ++i) {
        // Shuffled-looking ids prove file order, not id order, is kept.
        char id[16];
        std::snprintf(id, sizeof(id), "q%03d", (i * 7) % 260);
        Instance inst{id,
                      Task::mgsm,
                      LanguageCode::parse("de"),
                      {{"question", "wie viel ist " + std::to_string(i) + "?"}},
                      GoldAnswer::numeric(std::to_string(i)),
                      std::nullopt};
        big.instances.push_back(std::move(inst));
    }
    Dataset sampled = sample_test_set(big, 250, 12345);
    REQUIRE(sampled.instances.size() == 250);
    for (std::size_t i = 0; i < 250; ++i)
        CHECK(sampled.instances[i].id == big.instances[i].id);
}

TEST_CASE("validate_dataset_file reports per-line issues") {
    CHECK(validate_dataset_file(fixture_path("datasets/xnli_es.jsonl")).empty());
    CHECK(validate_dataset_file(fixture_path("datasets/pawsx_de.jsonl")).empty());

    TempDir tmp;
    const std::string good =
        R"({"id":"a","task":"mgsm","language":"de","fields":{"question":"q"},"gold":{"numeric":"1"}})";
    testsupport::write_file(tmp.str("bad.jsonl"),
                            good + "\n" + "{not json}\n" + good + "\n");
    auto issues = validate_dataset_file(tmp.str("bad.jsonl"));
    REQUIRE_FALSE(issues.empty());
    bool saw_line2 = false, saw_dup = false;
    for (const auto& issue : issues) {
        if (issue.line == 2) saw_line2 = true;
        if (issue.message.find("duplicate") != std::string::npos) saw_dup = true;
    }
    CHECK(saw_line2);
    CHECK(saw_dup);
}
