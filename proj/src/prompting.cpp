#include "xcot/prompting.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace xcot {

namespace {

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

const std::map<std::string, std::string>& field_source(const Instance& inst, bool english) {
    if (!english) return inst.fields;
    if (!inst.english_parallel) {
        throw std::runtime_error("instance '" + inst.id + "' has no english_parallel fields");
    }
    return *inst.english_parallel;
}

const std::string& field(const std::map<std::string, std::string>& fields,
                         const std::string& name) {
    auto it = fields.find(name);
    if (it == fields.end()) throw std::logic_error("missing field '" + name + "'");
    return it->second;
}

// "German" / "German and English" / "German, French and English".
std::string join_language_names(const std::vector<LanguageCode>& langs,
                                const LanguageTable& table) {
    std::string out;
    for (std::size_t i = 0; i < langs.size(); ++i) {
        if (i > 0) out += (i + 1 == langs.size()) ? " and " : ", ";
        out += table.info(langs[i]).name;
    }
    return out;
}

std::string collaboration_header(std::size_t n, const std::string& persona,
                                 const std::string& name_list) {
    return "Simulate the collaboration of " + std::to_string(n) + " " + persona +
           " answering a question in their mother tongue: " + name_list +
           ". They all start Step1 from a separate thought process, step by step, each"
           " explaining their thought process. Following Step1, each expert refines and"
           " develops their thought process by comparing themselves with others. This"
           " process continues until a definitive answer to the question is obtained.";
}

RenderedPrompt single_user_prompt(std::string content, std::string answer_format) {
    RenderedPrompt out;
    out.answer_format = std::move(answer_format);
    out.steps.push_back({Message{Role::user, std::move(content)}});
    return out;
}

void require_no_duplicates(const std::vector<LanguageCode>& langs) {
    for (std::size_t i = 0; i < langs.size(); ++i) {
        for (std::size_t j = i + 1; j < langs.size(); ++j) {
            if (langs[i] == langs[j]) {
                throw std::invalid_argument("language plan repeats '" + langs[i].str() + "'");
            }
        }
    }
}

}  // namespace

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::direct: return "direct";
        case Strategy::native_cot: return "native_cot";
        case Strategy::en_cot: return "en_cot";
        case Strategy::translate_en: return "translate_en";
        case Strategy::cross_cot: return "cross_cot";
        case Strategy::cross_tot: return "cross_tot";
        case Strategy::cross_tot_binary: return "cross_tot_binary";
    }
    throw std::logic_error("bad strategy enum");
}

Strategy parse_strategy(std::string_view name) {
    for (Strategy s : {Strategy::direct, Strategy::native_cot, Strategy::en_cot,
                       Strategy::translate_en, Strategy::cross_cot, Strategy::cross_tot,
                       Strategy::cross_tot_binary}) {
        if (strategy_name(s) == name) return s;
    }
    throw std::invalid_argument("unknown strategy: '" + std::string(name) + "'");
}

std::string role_name(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    throw std::logic_error("bad role enum");
}

bool LanguagePlan::includes_english() const {
    return std::find(languages.begin(), languages.end(), kEnglish) != languages.end();
}

ResourceTable::ResourceTable(std::map<std::string, double> entries)
    : entries_(std::move(entries)) {
    for (const auto& [code, pct] : entries_) {
        if (!LanguageCode::is_registered(code)) {
            throw std::invalid_argument("resource table lists unregistered language '" + code +
                                        "'");
        }
        if (!(pct >= 0.0)) {
            throw std::invalid_argument("resource share for '" + code + "' must be >= 0");
        }
    }
}

const ResourceTable& ResourceTable::commoncrawl() {
    static const ResourceTable table(std::map<std::string, double>{
        {"en", 46.3},
        {"ru", 6.0},
        {"de", 5.4},
        {"zh", 5.3},
        {"fr", 4.4},
        {"ja", 4.3},
        {"es", 4.2},
    });
    return table;
}

std::optional<double> ResourceTable::percent(const LanguageCode& code) const {
    auto it = entries_.find(code.str());
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

OrderDirection parse_direction(std::string_view name) {
    if (name == "ascending") return OrderDirection::ascending;
    if (name == "descending") return OrderDirection::descending;
    throw std::invalid_argument("direction must be 'ascending' or 'descending', got '" +
                                std::string(name) + "'");
}

const std::string& answer_format_line(Task task) {
    static const std::string mgsm = "Answer: [num].";
    static const std::string xnli = "Answer: [Yes/No/Maybe].";
    static const std::string pawsx = "Answer: [Yes/No].";
    static const std::string xcopa = "Answer: [choice1/choice2].";
    switch (task) {
        case Task::mgsm: return mgsm;
        case Task::xnli: return xnli;
        case Task::pawsx: return pawsx;
        case Task::xcopa: return xcopa;
    }
    throw std::logic_error("bad task enum");
}

const std::string& task_persona(Task task) {
    static const std::string mathematicians = "mathematicians";
    static const std::string person = "person";
    return task == Task::mgsm ? mathematicians : person;
}

std::string render_basic_prompt(const Instance& instance, bool use_english_parallel,
                                const LanguageTable& table) {
    const auto& f = field_source(instance, use_english_parallel);
    switch (instance.task) {
        case Task::mgsm: {
            const std::string& qword =
                use_english_parallel ? table.info(kEnglish).question_word
                                     : table.info(instance.language).question_word;
            return qword + ": " + field(f, "question");
        }
        case Task::xcopa:
            return "Here is a premise: " + field(f, "premise") + ". What is the " +
                   field(f, "question") + "? Help me pick the more plausible option: -choice1: " +
                   field(f, "choice1") + ", -choice2: " + field(f, "choice2");
        case Task::xnli:
            return field(f, "premise") + ". Based on the previous passage, is it true that " +
                   field(f, "hypothesis") + "? Yes, No, or Maybe?";
        case Task::pawsx:
            return "Sentence 1: " + field(f, "sentence1") + " Sentence 2: " +
                   field(f, "sentence2") +
                   " Question: Does Sentence 1 paraphrase Sentence 2? Yes or No?";
    }
    throw std::logic_error("bad task enum");
}

RenderedPrompt render_cross_tot(const Instance& instance, const LanguagePlan& plan,
                                const std::string& persona, const LanguageTable& table) {
    if (plan.languages.empty()) throw std::invalid_argument("language plan is empty");
    if (plan.languages.front() != instance.language) {
        throw std::invalid_argument("language plan must start with the instance language '" +
                                    instance.language.str() + "', got '" +
                                    plan.languages.front().str() + "'");
    }
    require_no_duplicates(plan.languages);

    // The question keeps its native wording; only the scaffold is English.
    std::string body = instance.task == Task::mgsm
                           ? "Question: " + field(instance.fields, "question")
                           : render_basic_prompt(instance, false, table);
    std::string answer_format = answer_format_line(instance.task);
    std::string content =
        collaboration_header(plan.languages.size(), persona,
                             join_language_names(plan.languages, table)) +
        "\n" + body + "\n" + answer_format;
    return single_user_prompt(std::move(content), std::move(answer_format));
}

RenderedPrompt render_baseline(Strategy strategy, const Instance& instance,
                               const LanguageTable& table) {
    const LanguageInfo& native = table.info(instance.language);
    const LanguageInfo& english = table.info(kEnglish);
    const std::string& answer_format = answer_format_line(instance.task);
    const std::string english_elicitation = english.answer_word + ": " + english.cot_elicitation;
    const std::string native_elicitation = native.answer_word + ": " + native.cot_elicitation;

    std::string content;
    switch (strategy) {
        case Strategy::direct:
            content = render_basic_prompt(instance, false, table);
            break;
        case Strategy::native_cot:
            content = render_basic_prompt(instance, false, table) + "\n" + native_elicitation;
            break;
        case Strategy::en_cot:
            content = render_basic_prompt(instance, false, table) + "\n" + english_elicitation;
            break;
        case Strategy::translate_en:
            content = render_basic_prompt(instance, true, table) + "\n" + english_elicitation;
            break;
        case Strategy::cross_cot:
        case Strategy::cross_tot:
        case Strategy::cross_tot_binary:
            throw std::invalid_argument("'" + strategy_name(strategy) +
                                        "' is not a single-prompt baseline");
    }
    content += "\n" + answer_format;
    return single_user_prompt(std::move(content), answer_format);
}

RenderedPrompt render_cross_cot(const Instance& instance, const LanguageCode& source,
                                const LanguageCode& target, const LanguageTable& table) {
    if (source != instance.language) {
        throw std::invalid_argument("cross_cot source language '" + source.str() +
                                    "' does not match instance language '" +
                                    instance.language.str() + "'");
    }
    if (source == target) {
        throw std::invalid_argument("cross_cot source and target languages are both '" +
                                    source.str() + "'");
    }
    static const std::map<Task, std::string> domains = {
        {Task::mgsm, "mathematics"},
        {Task::xnli, "natural language inference"},
        {Task::pawsx, "paraphrase identification"},
        {Task::xcopa, "commonsense reasoning"},
    };

    std::string body = instance.task == Task::mgsm
                           ? field(instance.fields, "question")
                           : render_basic_prompt(instance, false, table);
    const std::string& source_name = table.info(source).name;
    const std::string& target_name = table.info(target).name;

    RenderedPrompt out;
    out.answer_format = answer_format_line(instance.task);
    out.steps.push_back({Message{
        Role::user, "Please act as an expert in multi-lingual understanding in " + source_name +
                        ".\nQuestion: " + body + "\nLet's understand the task in " + target_name +
                        " step-by-step!"}});
    out.steps.push_back({Message{
        Role::user, "After understanding, you should act as an expert in " +
                        domains.at(instance.task) + " in " + target_name +
                        ".\nLet's resolve the task you understand above step-by-step!\n" +
                        out.answer_format}});
    return out;
}

std::vector<Exemplar> load_exemplar_pool(const std::string& path, Task task) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open exemplar file: " + path);

    std::vector<Exemplar> pool;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line)) continue;
        try {
            auto row = nlohmann::json::parse(line);
            if (!row.is_object() || !row.contains("worked_answer") ||
                !row["worked_answer"].is_string()) {
                throw std::runtime_error("row must be an object with a 'worked_answer' string");
            }
            std::string worked = row["worked_answer"].get<std::string>();
            if (is_blank(worked)) throw std::runtime_error("worked_answer is empty");
            row.erase("worked_answer");
            Instance inst = parse_instance_row(row.dump());
            if (inst.task != task) {
                throw std::runtime_error("exemplar task '" + task_name(inst.task) +
                                         "' does not match pool task '" + task_name(task) + "'");
            }
            for (const auto& other : pool) {
                if (other.instance.id == inst.id) {
                    throw std::runtime_error("duplicate exemplar id '" + inst.id + "'");
                }
            }
            pool.push_back(Exemplar{std::move(inst), std::move(worked)});
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (pool.empty()) throw std::runtime_error(path + ": no exemplars");
    return pool;
}

RenderedPrompt assemble_few_shot(const RenderedPrompt& base, const FewShotConfig& cfg,
                                 const LanguageTable& table) {
    if (cfg.k == 0) return base;
    if (cfg.k > cfg.pool.size()) {
        throw std::invalid_argument("few-shot k=" + std::to_string(cfg.k) + " exceeds pool size " +
                                    std::to_string(cfg.pool.size()));
    }
    if (base.steps.empty()) throw std::invalid_argument("base prompt has no steps");

    std::vector<std::size_t> order(cfg.pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return cfg.pool[a].instance.id < cfg.pool[b].instance.id;
    });
    // Same pinned shuffle as test-set sampling: mt19937_64 output is stable
    // across toolchains, std::shuffle is not.
    std::mt19937_64 rng(cfg.seed);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }

    std::vector<Message> turns;
    for (std::size_t i = 0; i < cfg.k; ++i) {
        const Exemplar& ex = cfg.pool[order[i]];
        turns.push_back(Message{Role::user, render_basic_prompt(ex.instance, false, table) + "\n" +
                                                answer_format_line(ex.instance.task)});
        turns.push_back(Message{Role::assistant, ex.worked_answer});
    }

    RenderedPrompt out = base;
    out.steps.front().insert(out.steps.front().begin(), turns.begin(), turns.end());
    return out;
}

LanguagePlan plan_language_order(const std::vector<LanguageCode>& available,
                                 const LanguageCode& first, OrderDirection direction,
                                 bool include_english, const ResourceTable& table,
                                 std::optional<std::size_t> count) {
    std::vector<LanguageCode> tail;
    for (const auto& code : available) {
        if (code == first) continue;
        if (std::find(tail.begin(), tail.end(), code) == tail.end()) tail.push_back(code);
    }
    // Descending: corpus-share order, share-less languages after all ranked
    // ones (alphabetical within a bucket). Ascending is its exact reverse, so
    // the two directions of one pool are always mirror images.
    std::sort(tail.begin(), tail.end(), [&](const LanguageCode& a, const LanguageCode& b) {
        auto pa = table.percent(a);
        auto pb = table.percent(b);
        if (pa.has_value() != pb.has_value()) return pa.has_value();
        if (pa && pb && *pa != *pb) return *pa > *pb;
        return a.str() < b.str();
    });
    if (direction == OrderDirection::ascending) std::reverse(tail.begin(), tail.end());

    std::size_t total = count.value_or(1 + tail.size());
    if (total == 0) throw std::invalid_argument("language count must be at least 1");
    if (total > 1 + tail.size()) {
        throw std::invalid_argument("language count " + std::to_string(total) + " exceeds the " +
                                    std::to_string(1 + tail.size()) + " available languages");
    }

    LanguagePlan plan;
    plan.languages.push_back(first);
    for (std::size_t i = 0; plan.languages.size() < total; ++i) {
        plan.languages.push_back(tail[i]);
    }
    if (include_english && !plan.includes_english()) plan.languages.push_back(kEnglish);
    return plan;
}

bool has_unresolved_placeholder(const RenderedPrompt& prompt) {
    for (const auto& step : prompt.steps) {
        for (const auto& msg : step) {
            std::string content = msg.content;
            if (!prompt.answer_format.empty()) {
                std::size_t pos = 0;
                while ((pos = content.find(prompt.answer_format, pos)) != std::string::npos) {
                    content.erase(pos, prompt.answer_format.size());
                }
            }
            if (content.find('{') != std::string::npos) return true;
            if (content.find('[') != std::string::npos) return true;
        }
    }
    return false;
}

}  // namespace xcot
