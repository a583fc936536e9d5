#include "xcot/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace xcot {

namespace {

using nlohmann::json;

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string trimmed(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

void check_fields(Task task, const std::map<std::string, std::string>& fields,
                  const char* what) {
    const auto& schema = task_fields(task);
    if (fields.size() != schema.size()) {
        throw std::runtime_error(std::string("schema mismatch: ") + what + " must have exactly {" +
                                 [&] {
                                     std::string s;
                                     for (const auto& f : schema) s += (s.empty() ? "" : ", ") + f;
                                     return s;
                                 }() +
                                 "}");
    }
    for (const auto& name : schema) {
        auto it = fields.find(name);
        if (it == fields.end()) {
            throw std::runtime_error(std::string("schema mismatch: ") + what +
                                     " missing field '" + name + "'");
        }
        if (trimmed(it->second).empty()) {
            throw std::runtime_error(std::string(what) + " field '" + name + "' is empty");
        }
    }
}

GoldAnswer parse_gold(Task task, const json& j) {
    if (!j.is_object() || j.size() != 1) {
        throw std::runtime_error("gold must be {\"numeric\": text} or {\"label\": text}");
    }
    if (j.contains("numeric")) {
        if (task != Task::mgsm) {
            throw std::runtime_error("numeric gold is only valid for mgsm");
        }
        return GoldAnswer::numeric(j.at("numeric").get<std::string>());
    }
    if (j.contains("label")) {
        if (task == Task::mgsm) {
            throw std::runtime_error("mgsm gold must be numeric");
        }
        std::string value = j.at("label").get<std::string>();
        const auto& labels = task_labels(task);
        if (std::find(labels.begin(), labels.end(), value) == labels.end()) {
            std::string allowed;
            for (const auto& l : labels) allowed += (allowed.empty() ? "" : ", ") + l;
            throw std::runtime_error("gold label '" + value + "' not in {" + allowed + "}");
        }
        return GoldAnswer::label(std::move(value));
    }
    throw std::runtime_error("gold must contain 'numeric' or 'label'");
}

json gold_to_json(const GoldAnswer& gold) {
    json j;
    if (gold.is_numeric()) {
        j["numeric"] = gold.text();
    } else {
        j["label"] = gold.text();
    }
    return j;
}

std::map<std::string, std::string> parse_field_map(const json& j) {
    std::map<std::string, std::string> out;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_string()) {
            throw std::runtime_error("field '" + key + "' must be a string");
        }
        out[key] = value.get<std::string>();
    }
    return out;
}

}  // namespace

std::string task_name(Task task) {
    switch (task) {
        case Task::mgsm: return "mgsm";
        case Task::xnli: return "xnli";
        case Task::pawsx: return "pawsx";
        case Task::xcopa: return "xcopa";
    }
    throw std::logic_error("bad task enum");
}

Task parse_task(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower == "mgsm") return Task::mgsm;
    if (lower == "xnli") return Task::xnli;
    if (lower == "pawsx" || lower == "paws-x") return Task::pawsx;
    if (lower == "xcopa") return Task::xcopa;
    throw std::invalid_argument("unknown task: '" + std::string(name) + "'");
}

const std::vector<std::string>& task_fields(Task task) {
    static const std::vector<std::string> mgsm = {"question"};
    static const std::vector<std::string> xnli = {"premise", "hypothesis"};
    static const std::vector<std::string> pawsx = {"sentence1", "sentence2"};
    static const std::vector<std::string> xcopa = {"premise", "question", "choice1", "choice2"};
    switch (task) {
        case Task::mgsm: return mgsm;
        case Task::xnli: return xnli;
        case Task::pawsx: return pawsx;
        case Task::xcopa: return xcopa;
    }
    throw std::logic_error("bad task enum");
}

const std::vector<std::string>& task_labels(Task task) {
    static const std::vector<std::string> none = {};
    static const std::vector<std::string> xnli = {"Yes", "No", "Maybe"};
    static const std::vector<std::string> pawsx = {"Yes", "No"};
    static const std::vector<std::string> xcopa = {"choice1", "choice2"};
    switch (task) {
        case Task::mgsm: return none;
        case Task::xnli: return xnli;
        case Task::pawsx: return pawsx;
        case Task::xcopa: return xcopa;
    }
    throw std::logic_error("bad task enum");
}

GoldAnswer GoldAnswer::numeric(std::string decimal_text) {
    GoldAnswer g;
    std::size_t pos = 0;
    double value = 0;
    try {
        value = std::stod(decimal_text, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("gold numeric is not a decimal: '" + decimal_text + "'");
    }
    if (pos != decimal_text.size() || !std::isfinite(value)) {
        throw std::runtime_error("gold numeric is not a decimal: '" + decimal_text + "'");
    }
    g.text_ = std::move(decimal_text);
    g.numeric_ = value;
    return g;
}

GoldAnswer GoldAnswer::label(std::string value) {
    GoldAnswer g;
    g.text_ = std::move(value);
    return g;
}

double GoldAnswer::numeric_value() const {
    if (!numeric_) throw std::logic_error("gold answer is not numeric");
    return *numeric_;
}

Instance parse_instance_row(const std::string& line) {
    json row;
    try {
        row = json::parse(line);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("malformed JSON: ") + e.what());
    }
    if (!row.is_object()) throw std::runtime_error("row is not a JSON object");

    for (const char* key : {"id", "task", "language", "fields", "gold"}) {
        if (!row.contains(key)) {
            throw std::runtime_error(std::string("missing key '") + key + "'");
        }
    }

    Instance inst{
        row.at("id").get<std::string>(),
        parse_task(row.at("task").get<std::string>()),
        LanguageCode::parse(row.at("language").get<std::string>()),
        parse_field_map(row.at("fields")),
        parse_gold(parse_task(row.at("task").get<std::string>()), row.at("gold")),
        std::nullopt,
    };
    if (trimmed(inst.id).empty()) throw std::runtime_error("id is empty");
    check_fields(inst.task, inst.fields, "fields");

    if (row.contains("english_parallel") && !row.at("english_parallel").is_null()) {
        auto parallel = parse_field_map(row.at("english_parallel"));
        check_fields(inst.task, parallel, "english_parallel");
        inst.english_parallel = std::move(parallel);
    }
    return inst;
}

Dataset load_dataset(const std::string& path, Task task, const LanguageCode& language) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);

    Dataset dataset{task, language, {}};
    std::vector<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line)) continue;
        Instance inst = [&] {
            try {
                return parse_instance_row(line);
            } catch (const std::exception& e) {
                throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }();
        if (inst.task != task) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": row task '" +
                                     task_name(inst.task) + "' does not match requested '" +
                                     task_name(task) + "'");
        }
        if (inst.language != language) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": row language '" +
                                     inst.language.str() + "' does not match requested '" +
                                     language.str() + "'");
        }
        if (std::find(seen_ids.begin(), seen_ids.end(), inst.id) != seen_ids.end()) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": duplicate id '" +
                                     inst.id + "'");
        }
        seen_ids.push_back(inst.id);
        dataset.instances.push_back(std::move(inst));
    }
    if (dataset.instances.empty()) {
        throw std::runtime_error(path + ": no instances");
    }
    return dataset;
}

std::string dataset_to_jsonl(const Dataset& dataset) {
    std::string out;
    for (const auto& inst : dataset.instances) {
        json row;
        row["id"] = inst.id;
        row["task"] = task_name(inst.task);
        row["language"] = inst.language.str();
        row["fields"] = inst.fields;
        row["gold"] = gold_to_json(inst.gold);
        if (inst.english_parallel) row["english_parallel"] = *inst.english_parallel;
        out += row.dump();
        out += '\n';
    }
    return out;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    out << dataset_to_jsonl(dataset);
}

Dataset sample_test_set(const Dataset& dataset, std::size_t n, std::uint64_t seed) {
    if (n > dataset.instances.size()) {
        throw std::runtime_error("sample size " + std::to_string(n) + " exceeds dataset size " +
                                 std::to_string(dataset.instances.size()));
    }
    Dataset out{dataset.task, dataset.language, {}};
    if (dataset.task == Task::mgsm && n == 250) {
        out.instances.assign(dataset.instances.begin(), dataset.instances.begin() + 250);
        return out;
    }

    std::vector<std::string> ids;
    ids.reserve(dataset.instances.size());
    for (const auto& inst : dataset.instances) ids.push_back(inst.id);
    std::sort(ids.begin(), ids.end());

    // Hand-rolled Fisher-Yates: mt19937_64 output is pinned by the standard,
    // std::shuffle is not, and sample identity must survive toolchain changes.
    std::mt19937_64 rng(seed);
    for (std::size_t i = ids.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(ids[i - 1], ids[j]);
    }
    ids.resize(n);
    std::sort(ids.begin(), ids.end());

    for (const auto& inst : dataset.instances) {
        if (std::binary_search(ids.begin(), ids.end(), inst.id)) {
            out.instances.push_back(inst);
        }
    }
    return out;
}

std::vector<ValidationIssue> validate_dataset_file(const std::string& path) {
    std::vector<ValidationIssue> issues;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        issues.push_back({0, "cannot open file: " + path});
        return issues;
    }

    std::string line;
    std::size_t line_no = 0;
    std::size_t rows = 0;
    std::vector<std::string> ids;
    std::optional<Task> task;
    std::optional<LanguageCode> language;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line)) continue;
        try {
            Instance inst = parse_instance_row(line);
            ++rows;
            if (std::find(ids.begin(), ids.end(), inst.id) != ids.end()) {
                issues.push_back({line_no, "duplicate id '" + inst.id + "'"});
            }
            ids.push_back(inst.id);
            if (!task) task = inst.task;
            if (!language) language = inst.language;
            if (inst.task != *task) {
                issues.push_back({line_no, "mixed tasks in one file"});
            }
            if (inst.language != *language) {
                issues.push_back({line_no, "mixed languages in one file"});
            }
        } catch (const std::exception& e) {
            issues.push_back({line_no, e.what()});
        }
    }
    if (rows == 0 && issues.empty()) {
        issues.push_back({0, "no instances"});
    }
    return issues;
}

}  // namespace xcot
