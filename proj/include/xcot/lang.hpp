#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xcot {

// Per-language strings used by prompt rendering, answer extraction and step
// segmentation. `name` is the English exonym interpolated into prompt bodies.
struct LanguageInfo {
    std::string code;
    std::string name;
    std::string question_word;
    std::string answer_word;
    std::string cot_elicitation;
    std::vector<std::string> yes_forms;
    std::vector<std::string> no_forms;
    std::vector<std::string> maybe_forms;
    std::vector<std::string> step_words;
};

// Two-letter ISO 639-1 code restricted to the registered language set.
class LanguageCode {
  public:
    static LanguageCode parse(std::string_view code);
    static bool is_registered(std::string_view code);

    const std::string& str() const { return code_; }
    bool operator==(const LanguageCode& other) const = default;
    auto operator<=>(const LanguageCode& other) const = default;

  private:
    explicit LanguageCode(std::string code) : code_(std::move(code)) {}
    std::string code_;
};

inline const LanguageCode kEnglish = LanguageCode::parse("en");

// Registry of per-language strings. The built-in table covers every
// registered code; an edited copy can be loaded from a JSON file (see
// data/languages.json) to change wording without recompiling.
class LanguageTable {
  public:
    static const LanguageTable& builtin();
    static LanguageTable load(const std::string& path);

    const LanguageInfo& info(const LanguageCode& code) const;
    const std::vector<LanguageInfo>& entries() const { return entries_; }

  private:
    std::vector<LanguageInfo> entries_;
};

std::vector<LanguageCode> registered_languages();

}  // namespace xcot
