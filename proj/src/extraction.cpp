#include "xcot/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

namespace xcot {

namespace {

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_alnum(char c) { return is_ascii_digit(c) || is_ascii_alpha(c); }

bool is_all_ascii(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::size_t match_any(std::string_view s, std::size_t pos,
                      std::initializer_list<std::string_view> seqs) {
    for (std::string_view seq : seqs) {
        if (s.compare(pos, seq.size(), seq) == 0) return seq.size();
    }
    return 0;
}

// NBSP, thin space, narrow NBSP: digit-group separators in many locales.
std::size_t thin_space_len(std::string_view s, std::size_t pos) {
    return match_any(s, pos, {"\xC2\xA0", "\xE2\x80\x89", "\xE2\x80\xAF"});
}

// $ ¢ £ ¥ € ₹ ￥
std::size_t currency_len(std::string_view s, std::size_t pos) {
    return match_any(s, pos,
                     {"$", "\xC2\xA2", "\xC2\xA3", "\xC2\xA5", "\xE2\x82\xAC", "\xE2\x82\xB9",
                      "\xEF\xBF\xA5"});
}

// ASCII hyphen-minus or U+2212.
std::size_t minus_len(std::string_view s, std::size_t pos) {
    return match_any(s, pos, {"-", "\xE2\x88\x92"});
}

template <typename LenFn>
std::size_t glyph_len_before(std::string_view s, std::size_t pos, LenFn len_at) {
    for (std::size_t len = 1; len <= 3 && len <= pos; ++len) {
        if (len_at(s, pos - len) == len) return len;
    }
    return 0;
}

struct NumberToken {
    std::string norm;
    double value = 0.0;
    std::size_t begin = 0;
    std::size_t end = 0;
};

// Parses the number whose first digit sits at digit_pos. Consumes thousands
// groups (comma or thin space strictly before a 3-digit group) and one
// decimal point followed by digits. A minus sign is honored when it precedes
// the digits directly or through currency glyphs, and is not itself glued to
// a digit (keeps "3-4" as two numbers).
std::optional<NumberToken> parse_number_at(std::string_view s, std::size_t digit_pos) {
    NumberToken tok;
    tok.begin = digit_pos;

    std::size_t q = digit_pos;
    while (true) {
        std::size_t len = glyph_len_before(s, q, currency_len);
        if (len == 0) len = glyph_len_before(s, q, thin_space_len);
        if (len == 0) break;
        q -= len;
    }
    bool negative = false;
    std::size_t mlen = glyph_len_before(s, q, minus_len);
    if (mlen > 0) {
        std::size_t before_sign = q - mlen;
        if (before_sign == 0 || !is_ascii_digit(s[before_sign - 1])) negative = true;
    }

    std::string digits;
    std::size_t i = digit_pos;
    while (i < s.size() && is_ascii_digit(s[i])) digits += s[i++];
    while (true) {
        std::size_t sep = (i < s.size() && s[i] == ',') ? 1 : thin_space_len(s, i);
        if (sep == 0) break;
        std::size_t g = i + sep;
        if (g + 3 > s.size()) break;
        if (!(is_ascii_digit(s[g]) && is_ascii_digit(s[g + 1]) && is_ascii_digit(s[g + 2]))) break;
        if (g + 3 < s.size() && is_ascii_digit(s[g + 3])) break;
        digits.append(s.substr(g, 3));
        i = g + 3;
    }
    std::string frac;
    if (i + 1 < s.size() && s[i] == '.' && is_ascii_digit(s[i + 1])) {
        ++i;
        while (i < s.size() && is_ascii_digit(s[i])) frac += s[i++];
    }

    tok.end = i;
    tok.norm = (negative ? "-" : "") + digits;
    if (!frac.empty()) tok.norm += "." + frac;
    tok.value = std::strtod(tok.norm.c_str(), nullptr);
    if (!std::isfinite(tok.value)) return std::nullopt;
    return tok;
}

// First standalone number at or after `from`: its leading digit must not be
// glued to an ASCII letter ("step3" is an identifier, not a count).
std::optional<NumberToken> first_number(std::string_view s, std::size_t from) {
    std::size_t i = from;
    while (i < s.size()) {
        if (!is_ascii_digit(s[i])) {
            ++i;
            continue;
        }
        if (i > 0 && is_ascii_alpha(s[i - 1])) {
            while (i < s.size() && is_ascii_digit(s[i])) ++i;
            continue;
        }
        auto tok = parse_number_at(s, i);
        if (tok) return tok;
        while (i < s.size() && is_ascii_digit(s[i])) ++i;
    }
    return std::nullopt;
}

std::optional<NumberToken> last_number(std::string_view s) {
    std::optional<NumberToken> best;
    std::size_t from = 0;
    while (auto tok = first_number(s, from)) {
        from = tok->end;
        best = tok;
    }
    return best;
}

struct MarkerHit {
    std::size_t start;
    std::size_t end;
};

void collect_plain(const std::string& hay, std::string_view needle, std::vector<MarkerHit>& out) {
    std::size_t pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string::npos) {
        out.push_back({pos, pos + needle.size()});
        ++pos;
    }
}

std::vector<MarkerHit> english_markers(const std::string& lower) {
    std::vector<MarkerHit> hits;
    collect_plain(lower, "answer is", hits);
    collect_plain(lower, "answer:", hits);
    std::sort(hits.begin(), hits.end(),
              [](const MarkerHit& a, const MarkerHit& b) { return a.start < b.start; });
    return hits;
}

// Occurrences of one word; ASCII words match case-insensitively on word
// boundaries, anything else matches byte-exactly.
std::vector<MarkerHit> word_markers(const std::string& text, const std::string& lower,
                                    const std::string& word) {
    std::vector<MarkerHit> hits;
    if (word.empty()) return hits;
    bool ascii = is_all_ascii(word);
    const std::string& hay = ascii ? lower : text;
    std::string needle = ascii ? ascii_lower(word) : word;
    std::size_t pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string::npos) {
        bool ok = true;
        if (ascii) {
            if (pos > 0 && is_ascii_alnum(hay[pos - 1])) ok = false;
            std::size_t after = pos + needle.size();
            if (after < hay.size() && is_ascii_alnum(hay[after])) ok = false;
        }
        if (ok) hits.push_back({pos, pos + needle.size()});
        ++pos;
    }
    return hits;
}

struct LabelForm {
    std::string surface;
    std::size_t rank;  // index into task_labels(task)
};

std::vector<LabelForm> label_forms(Task task, const LanguageCode& language,
                                   const std::vector<std::string>& choices,
                                   const LanguageTable& table) {
    std::vector<LabelForm> forms;
    auto add = [&](const std::string& surface, std::size_t rank) {
        if (surface.empty()) return;
        for (const auto& f : forms) {
            if (f.surface == surface && f.rank == rank) return;
        }
        forms.push_back({surface, rank});
    };
    if (task == Task::xcopa) {
        add("choice1", 0);
        add("choice2", 1);
        if (!choices.empty()) add(choices[0], 0);
        if (choices.size() > 1) add(choices[1], 1);
        return forms;
    }
    const LanguageInfo& info = table.info(language);
    const std::vector<std::string>* localized[] = {&info.yes_forms, &info.no_forms,
                                                   &info.maybe_forms};
    const auto& labels = task_labels(task);
    for (std::size_t rank = 0; rank < labels.size(); ++rank) {
        add(labels[rank], rank);
        for (const auto& f : *localized[rank]) add(f, rank);
    }
    return forms;
}

struct FormMatch {
    std::size_t start;
    std::size_t len;
    std::size_t rank;
};

// Best label mention within [begin, end): matches contained in longer ones
// are dropped (不是 ⊃ 是), then the last mention wins; ties prefer the longer
// form, then canonical label order.
std::optional<std::size_t> best_label_rank(const std::string& text, const std::string& lower,
                                           const std::vector<LabelForm>& forms, std::size_t begin,
                                           std::size_t end) {
    std::vector<FormMatch> matches;
    for (const auto& form : forms) {
        bool ascii = is_all_ascii(form.surface);
        const std::string& hay = ascii ? lower : text;
        std::string needle = ascii ? ascii_lower(form.surface) : form.surface;
        std::size_t pos = begin;
        while (pos + needle.size() <= end) {
            std::size_t f = hay.find(needle, pos);
            if (f == std::string::npos || f + needle.size() > end) break;
            bool ok = true;
            if (ascii) {
                if (f > 0 && is_ascii_alnum(hay[f - 1])) ok = false;
                std::size_t after = f + needle.size();
                if (after < hay.size() && is_ascii_alnum(hay[after])) ok = false;
            }
            if (ok) matches.push_back({f, needle.size(), form.rank});
            pos = f + 1;
        }
    }
    if (matches.empty()) return std::nullopt;

    auto contained = [&](const FormMatch& a) {
        return std::any_of(matches.begin(), matches.end(), [&](const FormMatch& b) {
            return b.len > a.len && b.start <= a.start && b.start + b.len >= a.start + a.len;
        });
    };
    std::optional<FormMatch> best;
    for (const auto& m : matches) {
        if (contained(m)) continue;
        if (!best || m.start > best->start ||
            (m.start == best->start &&
             (m.len > best->len || (m.len == best->len && m.rank < best->rank)))) {
            best = m;
        }
    }
    if (!best) return std::nullopt;
    return best->rank;
}

// [begin, end) of the last line containing a non-space byte; whole text when
// every line is blank.
std::pair<std::size_t, std::size_t> final_line(const std::string& text) {
    std::size_t end = text.size();
    while (end > 0) {
        std::size_t nl = text.rfind('\n', end - 1);
        std::size_t lb = (nl == std::string::npos) ? 0 : nl + 1;
        for (std::size_t k = lb; k < end; ++k) {
            if (!std::isspace(static_cast<unsigned char>(text[k]))) return {lb, end};
        }
        if (nl == std::string::npos) break;
        end = nl;
    }
    return {0, text.size()};
}

}  // namespace

ExtractedAnswer ExtractedAnswer::numeric(std::string token, double value) {
    ExtractedAnswer a;
    a.kind = AnswerKind::numeric;
    a.text = std::move(token);
    a.value = value;
    return a;
}

ExtractedAnswer ExtractedAnswer::label(std::string canonical) {
    ExtractedAnswer a;
    a.kind = AnswerKind::label;
    a.text = std::move(canonical);
    return a;
}

ExtractedAnswer ExtractedAnswer::none(std::string reason) {
    ExtractedAnswer a;
    a.kind = AnswerKind::none;
    a.reason = std::move(reason);
    return a;
}

ExtractedAnswer extract_numeric(const std::string& text) {
    std::string lower = ascii_lower(text);
    auto hits = english_markers(lower);
    if (!hits.empty()) {
        if (auto tok = first_number(text, hits.back().end)) {
            return ExtractedAnswer::numeric(tok->norm, tok->value);
        }
    }
    if (auto tok = last_number(text)) {
        return ExtractedAnswer::numeric(tok->norm, tok->value);
    }
    return ExtractedAnswer::none("no number in completion");
}

ExtractedAnswer extract_label(const std::string& text, Task task, const LanguageCode& language,
                              const std::vector<std::string>& choices,
                              const LanguageTable& table) {
    if (task == Task::mgsm) return ExtractedAnswer::none("mgsm answers are numeric");

    std::string lower = ascii_lower(text);
    std::size_t begin;
    std::size_t end;
    auto eng = english_markers(lower);
    if (!eng.empty()) {
        begin = eng.back().end;
        end = text.size();
    } else {
        auto loc = word_markers(text, lower, table.info(language).answer_word);
        if (!loc.empty()) {
            begin = loc.back().end;
            end = text.size();
        } else {
            std::tie(begin, end) = final_line(text);
        }
    }

    auto forms = label_forms(task, language, choices, table);
    auto rank = best_label_rank(text, lower, forms, begin, end);
    if (!rank) return ExtractedAnswer::none("no label in completion");
    return ExtractedAnswer::label(task_labels(task)[*rank]);
}

ExtractedAnswer extract_answer(const std::string& text, const Instance& instance,
                               const LanguageTable& table) {
    if (instance.task == Task::mgsm) return extract_numeric(text);
    std::vector<std::string> choices;
    if (instance.task == Task::xcopa) {
        choices.push_back(instance.fields.at("choice1"));
        choices.push_back(instance.fields.at("choice2"));
    }
    return extract_label(text, instance.task, instance.language, choices, table);
}

bool score(const ExtractedAnswer& pred, const GoldAnswer& gold) {
    if (pred.kind == AnswerKind::numeric && gold.is_numeric()) {
        return std::fabs(*pred.value - gold.numeric_value()) <= 1e-6;
    }
    if (pred.kind == AnswerKind::label && !gold.is_numeric()) {
        return pred.text == gold.text();
    }
    return false;
}

bool has_conflicting_answers(const std::string& text, Task task, const LanguageCode& language,
                             const std::vector<std::string>& choices,
                             const LanguageTable& table) {
    std::string lower = ascii_lower(text);
    std::vector<MarkerHit> hits = english_markers(lower);
    for (const auto& m : word_markers(text, lower, table.info(language).answer_word)) {
        hits.push_back(m);
    }
    std::sort(hits.begin(), hits.end(),
              [](const MarkerHit& a, const MarkerHit& b) { return a.start < b.start; });
    if (hits.size() < 2) return false;

    auto forms = label_forms(task, language, choices, table);
    std::vector<double> numbers;
    std::vector<std::size_t> ranks;
    for (std::size_t k = 0; k < hits.size(); ++k) {
        std::size_t from = hits[k].end;
        std::size_t until = (k + 1 < hits.size()) ? hits[k + 1].start : text.size();
        if (from >= until) continue;
        if (task == Task::mgsm) {
            auto tok = first_number(text, from);
            if (tok && tok->begin < until) numbers.push_back(tok->value);
        } else {
            if (auto rank = best_label_rank(text, lower, forms, from, until)) {
                ranks.push_back(*rank);
            }
        }
    }
    for (std::size_t a = 0; a < numbers.size(); ++a) {
        for (std::size_t b = a + 1; b < numbers.size(); ++b) {
            if (std::fabs(numbers[a] - numbers[b]) > 1e-6) return true;
        }
    }
    for (std::size_t a = 0; a < ranks.size(); ++a) {
        for (std::size_t b = a + 1; b < ranks.size(); ++b) {
            if (ranks[a] != ranks[b]) return true;
        }
    }
    return false;
}

}  // namespace xcot
