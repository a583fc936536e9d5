#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xcot/lang.hpp"

namespace xcot {

enum class Task { mgsm, xnli, pawsx, xcopa };

std::string task_name(Task task);
Task parse_task(std::string_view name);

// Field schema for one benchmark, in canonical order.
const std::vector<std::string>& task_fields(Task task);

// Canonical label set for classification benchmarks, in tie-break order.
const std::vector<std::string>& task_labels(Task task);

// Gold target: an exact decimal (MGSM) or a canonical label (the rest).
// Numeric values keep their source text so files round-trip byte-identically.
class GoldAnswer {
  public:
    static GoldAnswer numeric(std::string decimal_text);
    static GoldAnswer label(std::string value);

    bool is_numeric() const { return numeric_.has_value(); }
    double numeric_value() const;
    const std::string& text() const { return text_; }

    bool operator==(const GoldAnswer&) const = default;

  private:
    std::string text_;
    std::optional<double> numeric_;
};

struct Instance {
    std::string id;
    Task task;
    LanguageCode language;
    std::map<std::string, std::string> fields;
    GoldAnswer gold;
    std::optional<std::map<std::string, std::string>> english_parallel;
};

struct Dataset {
    Task task;
    LanguageCode language;
    std::vector<Instance> instances;
};

// Reads the canonical JSONL instance format, validating every row. Errors
// carry the 1-based line number.
Dataset load_dataset(const std::string& path, Task task, const LanguageCode& language);

// Writes the canonical format: one compact JSON object per line, sorted keys,
// UTF-8, LF endings. load_dataset(save_dataset(d)) == d byte-for-byte.
void save_dataset(const Dataset& dataset, const std::string& path);
std::string dataset_to_jsonl(const Dataset& dataset);

// Validates one already-parsed JSONL row against the Instance invariants.
// Returns the instance or throws with a row-local message (no line prefix).
Instance parse_instance_row(const std::string& line);

// Deterministic subset of size n. Selection shuffles the lexicographically
// sorted id list with `seed`; selected instances keep file order. For MGSM
// with n = 250 the first 250 rows are taken in file order instead.
Dataset sample_test_set(const Dataset& dataset, std::size_t n, std::uint64_t seed);

// Per-line validation report for `corpus validate`.
struct ValidationIssue {
    std::size_t line;  // 1-based; 0 for whole-file issues
    std::string message;
};
std::vector<ValidationIssue> validate_dataset_file(const std::string& path);

}  // namespace xcot
