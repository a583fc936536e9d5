#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xcot/corpus.hpp"
#include "xcot/lang.hpp"

namespace xcot {

enum class Strategy {
    direct,
    native_cot,
    en_cot,
    translate_en,
    cross_cot,
    cross_tot,
    cross_tot_binary,
};

std::string strategy_name(Strategy s);
Strategy parse_strategy(std::string_view name);

enum class Role { system, user, assistant };

std::string role_name(Role role);

struct Message {
    Role role;
    std::string content;
    bool operator==(const Message&) const = default;
};

// A chat request plan: one message sequence per completion step. Every
// strategy renders a single step except cross_cot, which renders two (the
// second is dispatched with step one's completion as assistant context).
struct RenderedPrompt {
    std::vector<std::vector<Message>> steps;
    std::string answer_format;
    bool operator==(const RenderedPrompt&) const = default;
};

// Ordered language list for a collaboration prompt; position 1 is pinned to
// the evaluated benchmark subset's language.
struct LanguagePlan {
    std::vector<LanguageCode> languages;
    bool includes_english() const;
};

// Share of each language in a pre-training corpus, in percent.
class ResourceTable {
  public:
    ResourceTable() = default;
    explicit ResourceTable(std::map<std::string, double> entries);

    // CommonCrawl distribution: en 46.3, ru 6.0, de 5.4, zh 5.3, fr 4.4,
    // ja 4.3, es 4.2.
    static const ResourceTable& commoncrawl();

    std::optional<double> percent(const LanguageCode& code) const;

  private:
    std::map<std::string, double> entries_;
};

enum class OrderDirection { ascending, descending };

OrderDirection parse_direction(std::string_view name);

struct Exemplar {
    Instance instance;
    std::string worked_answer;
};

struct FewShotConfig {
    std::size_t k = 0;
    std::vector<Exemplar> pool;
    std::uint64_t seed = 0;
};

std::vector<Exemplar> load_exemplar_pool(const std::string& path, Task task);

// Expected terminal line of a completion for the task, e.g. "Answer: [num]."
const std::string& answer_format_line(Task task);

// Collaboration persona required by each task's template.
const std::string& task_persona(Task task);

// Basic prompt body (native or english_parallel fields).
std::string render_basic_prompt(const Instance& instance, bool use_english_parallel,
                                const LanguageTable& table);

RenderedPrompt render_cross_tot(const Instance& instance, const LanguagePlan& plan,
                                const std::string& persona,
                                const LanguageTable& table = LanguageTable::builtin());

RenderedPrompt render_baseline(Strategy strategy, const Instance& instance,
                               const LanguageTable& table = LanguageTable::builtin());

RenderedPrompt render_cross_cot(const Instance& instance, const LanguageCode& source,
                                const LanguageCode& target,
                                const LanguageTable& table = LanguageTable::builtin());

RenderedPrompt assemble_few_shot(const RenderedPrompt& base, const FewShotConfig& cfg,
                                 const LanguageTable& table = LanguageTable::builtin());

LanguagePlan plan_language_order(const std::vector<LanguageCode>& available,
                                 const LanguageCode& first, OrderDirection direction,
                                 bool include_english, const ResourceTable& table,
                                 std::optional<std::size_t> count = std::nullopt);

// True when content still carries a template marker. Brackets belonging to
// the declared answer-format line are not markers.
bool has_unresolved_placeholder(const RenderedPrompt& prompt);

}  // namespace xcot
