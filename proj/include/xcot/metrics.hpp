#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xcot/embedding.hpp"
#include "xcot/lang.hpp"

namespace xcot {

// N-step hypothesis: step texts, one embedding per step, and the embedding of
// the full concatenated text.
struct ReasoningChain {
    std::vector<std::string> steps;
    std::vector<EmbeddingVector> embeddings;
    EmbeddingVector full_embedding;

    static ReasoningChain from_steps(std::vector<std::string> steps, Embedder& embedder);
};

// Source input of T sentences.
struct SourceContext {
    std::vector<std::string> sentences;
    std::vector<EmbeddingVector> embeddings;
    EmbeddingVector full_embedding;

    static SourceContext from_sentences(std::vector<std::string> sentences, Embedder& embedder);
};

struct RoscoeReport {
    std::vector<double> alignment;  // α_i per hypothesis step
    double faithfulness = 0.0;
    double info_step = 0.0;
    double info_chain = 0.0;
    std::optional<double> miss_step;  // only with a reference chain
};

// Splits a completion into reasoning steps: explicit step markers ("Step1",
// "Schritt 2:", any registered language's step word followed by a digit)
// first, else blank-line paragraphs, else sentence boundaries. Never empty
// for nonempty input; throws on empty/blank input.
std::vector<std::string> segment_steps(const std::string& text,
                                       const LanguageTable& table = LanguageTable::builtin());

// Sentence-boundary split alone (.!? and the fullwidth 。！？).
std::vector<std::string> split_sentences(const std::string& text);

// α_i = (1 + max_j cos(h_i, s_j)) / 2
std::vector<double> r_align(const ReasoningChain& h, const SourceContext& s);

// F = mean of α
double faithfulness(const ReasoningChain& h, const SourceContext& s);

// (1/(2T)) Σ_t (1 + max_i cos(s_t, h_i))/2 + F/2
double info_step(const ReasoningChain& h, const SourceContext& s);

// (1 + cos(h_full, s_full)) / 2
double info_chain(const ReasoningChain& h, const SourceContext& s);

// min over reference steps of (1 + max over h steps of cos) / 2
double miss_step(const ReasoningChain& reference, const ReasoningChain& h);

RoscoeReport score_chain(const ReasoningChain& h, const SourceContext& s,
                         const ReasoningChain* reference = nullptr);

// Element-wise scoring of parallel arrays; `references` is empty or
// size-matched. score_batch parallelizes with OpenMP when available and
// returns exactly the serial results.
std::vector<RoscoeReport> score_batch_serial(const std::vector<ReasoningChain>& chains,
                                             const std::vector<SourceContext>& sources,
                                             const std::vector<ReasoningChain>& references = {});
std::vector<RoscoeReport> score_batch(const std::vector<ReasoningChain>& chains,
                                      const std::vector<SourceContext>& sources,
                                      const std::vector<ReasoningChain>& references = {});

// Percentage of true flags (0..100).
double accuracy(const std::vector<bool>& flags);

// Arithmetic mean of per-run accuracies.
double average_runs(const std::vector<double>& per_run);

}  // namespace xcot
