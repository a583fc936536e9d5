#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xcot/corpus.hpp"
#include "xcot/lang.hpp"

namespace xcot {

enum class AnswerKind { numeric, label, none };

struct ExtractedAnswer {
    static ExtractedAnswer numeric(std::string token, double value);
    static ExtractedAnswer label(std::string canonical);
    static ExtractedAnswer none(std::string reason);

    AnswerKind kind = AnswerKind::none;
    std::string text;             // normalized numeric token, or canonical label
    std::optional<double> value;  // numeric only
    std::string reason;           // none only

    bool operator==(const ExtractedAnswer&) const = default;
};

// Parses the first number after the last "Answer:" / "answer is" marker
// (case-insensitive), normalizing thousands separators, currency symbols and
// trailing punctuation. Without a usable marker, falls back to the last
// standalone number anywhere. Total: never throws on arbitrary bytes.
ExtractedAnswer extract_numeric(const std::string& text);

// Finds a canonical label after the last answer marker (English first, then
// the language's localized answer word, then the final non-empty line).
// Matches English label words and the registered localized synonyms; when
// several distinct labels appear, the last mentioned wins. `choices` supplies
// verbatim option texts mapped by index to choice1/choice2 (XCOPA only).
ExtractedAnswer extract_label(const std::string& text, Task task, const LanguageCode& language,
                              const std::vector<std::string>& choices = {},
                              const LanguageTable& table = LanguageTable::builtin());

// Task dispatch: numeric for MGSM, label otherwise (XCOPA passes the
// instance's option texts through).
ExtractedAnswer extract_answer(const std::string& text, const Instance& instance,
                               const LanguageTable& table = LanguageTable::builtin());

// Numeric vs numeric within absolute tolerance 1e-6; label vs label by
// canonical equality; none and cross-kind comparisons are false.
bool score(const ExtractedAnswer& pred, const GoldAnswer& gold);

// True when answers following two different markers in one transcript
// disagree — parallel reasoning paths that never converged.
bool has_conflicting_answers(const std::string& text, Task task, const LanguageCode& language,
                             const std::vector<std::string>& choices = {},
                             const LanguageTable& table = LanguageTable::builtin());

}  // namespace xcot
