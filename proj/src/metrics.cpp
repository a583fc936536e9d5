#include "xcot/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <stdexcept>

namespace xcot {

namespace {

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string trimmed(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool is_ascii_alnum(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

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

std::size_t fullwidth_terminator_len(std::string_view s, std::size_t pos) {
    for (std::string_view seq : {"\xE3\x80\x82", "\xEF\xBC\x81", "\xEF\xBC\x9F"}) {  // 。！？
        if (s.compare(pos, seq.size(), seq) == 0) return seq.size();
    }
    return 0;
}

// Start offsets of "<step word><spaces?><digit>" markers for every
// registered language.
std::vector<std::size_t> step_marker_positions(const std::string& text,
                                               const LanguageTable& table) {
    std::string lower = ascii_lower(text);
    std::vector<std::size_t> positions;
    for (const LanguageInfo& info : table.entries()) {
        for (const std::string& word : info.step_words) {
            if (word.empty()) continue;
            bool ascii = is_all_ascii(word);
            const std::string& hay = ascii ? lower : text;
            std::string needle = ascii ? ascii_lower(word) : word;
            std::size_t pos = 0;
            while ((pos = hay.find(needle, pos)) != std::string::npos) {
                bool ok = true;
                if (ascii && pos > 0 && is_ascii_alnum(hay[pos - 1])) ok = false;
                std::size_t after = pos + needle.size();
                while (after < text.size() && (text[after] == ' ' || text[after] == '\t')) {
                    ++after;
                }
                if (ok && after < text.size() && text[after] >= '0' && text[after] <= '9') {
                    positions.push_back(pos);
                }
                ++pos;
            }
        }
    }
    std::sort(positions.begin(), positions.end());
    positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
    return positions;
}

std::vector<std::string> split_paragraphs(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    std::vector<std::string> paragraphs;
    std::string current;
    for (const std::string& line : lines) {
        if (is_blank(line)) {
            if (!current.empty()) paragraphs.push_back(current);
            current.clear();
        } else {
            if (!current.empty()) current += "\n";
            current += line;
        }
    }
    if (!current.empty()) paragraphs.push_back(current);
    return paragraphs;
}

void finalize_segments(std::vector<std::string>& segments, const std::string& text) {
    std::vector<std::string> cleaned;
    for (const std::string& seg : segments) {
        std::string t = trimmed(seg);
        if (!t.empty()) cleaned.push_back(std::move(t));
    }
    if (cleaned.empty()) cleaned.push_back(trimmed(text));
    segments = std::move(cleaned);
}

void validate_chain(const ReasoningChain& h) {
    if (h.steps.empty()) throw std::invalid_argument("reasoning chain has no steps");
    if (h.steps.size() != h.embeddings.size()) {
        throw std::invalid_argument("chain step/embedding count mismatch");
    }
}

void validate_source(const SourceContext& s) {
    if (s.sentences.empty()) throw std::invalid_argument("source context has no sentences");
    if (s.sentences.size() != s.embeddings.size()) {
        throw std::invalid_argument("source sentence/embedding count mismatch");
    }
}

// α for one direction: (1 + max cos against the pool) / 2 per query vector.
std::vector<double> align_against(const std::vector<EmbeddingVector>& queries,
                                  const std::vector<EmbeddingVector>& pool) {
    std::vector<double> alpha;
    alpha.reserve(queries.size());
    for (const auto& q : queries) {
        double best = -1.0;
        for (const auto& p : pool) best = std::max(best, cosine(q, p));
        alpha.push_back((1.0 + best) / 2.0);
    }
    return alpha;
}

void validate_pair(const ReasoningChain& h, const SourceContext& s) {
    validate_chain(h);
    validate_source(s);
    // cosine() rejects per-pair dimension mismatches; check the full
    // embeddings here so info_chain errors early too.
    if (h.full_embedding.dim() != s.full_embedding.dim()) {
        throw std::invalid_argument("embedding dimension mismatch: " +
                                    std::to_string(h.full_embedding.dim()) + " vs " +
                                    std::to_string(s.full_embedding.dim()));
    }
}

}  // namespace

ReasoningChain ReasoningChain::from_steps(std::vector<std::string> steps, Embedder& embedder) {
    if (steps.empty()) throw std::invalid_argument("reasoning chain has no steps");
    std::string full;
    for (const std::string& s : steps) {
        if (!full.empty()) full += "\n";
        full += s;
    }
    std::vector<std::string> batch = steps;
    batch.push_back(full);
    std::vector<EmbeddingVector> vectors = embedder.embed(batch);
    EmbeddingVector full_embedding = std::move(vectors.back());
    vectors.pop_back();
    return ReasoningChain{std::move(steps), std::move(vectors), std::move(full_embedding)};
}

SourceContext SourceContext::from_sentences(std::vector<std::string> sentences,
                                            Embedder& embedder) {
    if (sentences.empty()) throw std::invalid_argument("source context has no sentences");
    std::string full;
    for (const std::string& s : sentences) {
        if (!full.empty()) full += "\n";
        full += s;
    }
    std::vector<std::string> batch = sentences;
    batch.push_back(full);
    std::vector<EmbeddingVector> vectors = embedder.embed(batch);
    EmbeddingVector full_embedding = std::move(vectors.back());
    vectors.pop_back();
    return SourceContext{std::move(sentences), std::move(vectors), std::move(full_embedding)};
}

std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    std::size_t i = 0;
    auto is_term = [](char c) { return c == '.' || c == '!' || c == '?'; };
    while (i < text.size()) {
        if (is_term(text[i])) {
            bool decimal_dot = text[i] == '.' && i > 0 && i + 1 < text.size() &&
                               text[i - 1] >= '0' && text[i - 1] <= '9' && text[i + 1] >= '0' &&
                               text[i + 1] <= '9';
            if (decimal_dot) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < text.size() && is_term(text[j])) ++j;
            bool boundary = j >= text.size() ||
                            std::isspace(static_cast<unsigned char>(text[j])) != 0 ||
                            text[j] == '"' || text[j] == '\'';
            if (boundary) {
                out.push_back(text.substr(start, j - start));
                start = j;
            }
            i = j;
            continue;
        }
        if (std::size_t fw = fullwidth_terminator_len(text, i)) {
            out.push_back(text.substr(start, i + fw - start));
            start = i + fw;
            i += fw;
            continue;
        }
        ++i;
    }
    if (start < text.size()) out.push_back(text.substr(start));
    finalize_segments(out, text);
    return out;
}

std::vector<std::string> segment_steps(const std::string& text, const LanguageTable& table) {
    if (is_blank(text)) throw std::invalid_argument("cannot segment empty completion");

    std::vector<std::size_t> marks = step_marker_positions(text, table);
    if (!marks.empty()) {
        std::vector<std::string> segments;
        if (marks.front() > 0) segments.push_back(text.substr(0, marks.front()));
        for (std::size_t k = 0; k < marks.size(); ++k) {
            std::size_t end = (k + 1 < marks.size()) ? marks[k + 1] : text.size();
            segments.push_back(text.substr(marks[k], end - marks[k]));
        }
        finalize_segments(segments, text);
        return segments;
    }

    std::vector<std::string> paragraphs = split_paragraphs(text);
    if (paragraphs.size() > 1) {
        finalize_segments(paragraphs, text);
        return paragraphs;
    }

    return split_sentences(text);
}

std::vector<double> r_align(const ReasoningChain& h, const SourceContext& s) {
    validate_chain(h);
    validate_source(s);
    return align_against(h.embeddings, s.embeddings);
}

double faithfulness(const ReasoningChain& h, const SourceContext& s) {
    std::vector<double> alpha = r_align(h, s);
    double sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    return sum / static_cast<double>(alpha.size());
}

double info_step(const ReasoningChain& h, const SourceContext& s) {
    validate_chain(h);
    validate_source(s);
    std::vector<double> source_align = align_against(s.embeddings, h.embeddings);
    double sum = std::accumulate(source_align.begin(), source_align.end(), 0.0);
    return sum / (2.0 * static_cast<double>(source_align.size())) + faithfulness(h, s) / 2.0;
}

double info_chain(const ReasoningChain& h, const SourceContext& s) {
    validate_chain(h);
    validate_source(s);
    return (1.0 + cosine(h.full_embedding, s.full_embedding)) / 2.0;
}

double miss_step(const ReasoningChain& reference, const ReasoningChain& h) {
    validate_chain(reference);
    validate_chain(h);
    std::vector<double> alpha = align_against(reference.embeddings, h.embeddings);
    return *std::min_element(alpha.begin(), alpha.end());
}

RoscoeReport score_chain(const ReasoningChain& h, const SourceContext& s,
                         const ReasoningChain* reference) {
    RoscoeReport report;
    report.alignment = r_align(h, s);
    double sum = std::accumulate(report.alignment.begin(), report.alignment.end(), 0.0);
    report.faithfulness = sum / static_cast<double>(report.alignment.size());
    std::vector<double> source_align = align_against(s.embeddings, h.embeddings);
    double src_sum = std::accumulate(source_align.begin(), source_align.end(), 0.0);
    report.info_step =
        src_sum / (2.0 * static_cast<double>(source_align.size())) + report.faithfulness / 2.0;
    report.info_chain = info_chain(h, s);
    if (reference) report.miss_step = miss_step(*reference, h);
    return report;
}

namespace {

void validate_batch(const std::vector<ReasoningChain>& chains,
                    const std::vector<SourceContext>& sources,
                    const std::vector<ReasoningChain>& references) {
    if (chains.size() != sources.size()) {
        throw std::invalid_argument("chain/source batch size mismatch");
    }
    if (!references.empty() && references.size() != chains.size()) {
        throw std::invalid_argument("reference batch size mismatch");
    }
    // Validate up front: the parallel loop below must not throw.
    for (std::size_t i = 0; i < chains.size(); ++i) {
        validate_pair(chains[i], sources[i]);
        for (const auto& e : chains[i].embeddings) {
            if (e.dim() != sources[i].embeddings.front().dim()) {
                throw std::invalid_argument("embedding dimension mismatch in batch item " +
                                            std::to_string(i));
            }
        }
        for (const auto& e : sources[i].embeddings) {
            if (e.dim() != chains[i].embeddings.front().dim()) {
                throw std::invalid_argument("embedding dimension mismatch in batch item " +
                                            std::to_string(i));
            }
        }
        if (!references.empty()) {
            validate_chain(references[i]);
            for (const auto& e : references[i].embeddings) {
                if (e.dim() != chains[i].embeddings.front().dim()) {
                    throw std::invalid_argument("embedding dimension mismatch in batch item " +
                                                std::to_string(i));
                }
            }
        }
    }
}

}  // namespace

std::vector<RoscoeReport> score_batch_serial(const std::vector<ReasoningChain>& chains,
                                             const std::vector<SourceContext>& sources,
                                             const std::vector<ReasoningChain>& references) {
    validate_batch(chains, sources, references);
    std::vector<RoscoeReport> out(chains.size());
    for (std::size_t i = 0; i < chains.size(); ++i) {
        out[i] = score_chain(chains[i], sources[i], references.empty() ? nullptr : &references[i]);
    }
    return out;
}

std::vector<RoscoeReport> score_batch(const std::vector<ReasoningChain>& chains,
                                      const std::vector<SourceContext>& sources,
                                      const std::vector<ReasoningChain>& references) {
    validate_batch(chains, sources, references);
    std::vector<RoscoeReport> out(chains.size());
    const long n = static_cast<long>(chains.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        out[i] = score_chain(chains[i], sources[i], references.empty() ? nullptr : &references[i]);
    }
    return out;
}

double accuracy(const std::vector<bool>& flags) {
    if (flags.empty()) throw std::invalid_argument("accuracy over empty list");
    std::size_t correct = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
    return 100.0 * static_cast<double>(correct) / static_cast<double>(flags.size());
}

double average_runs(const std::vector<double>& per_run) {
    if (per_run.empty()) throw std::invalid_argument("average over empty list");
    double sum = std::accumulate(per_run.begin(), per_run.end(), 0.0);
    return sum / static_cast<double>(per_run.size());
}

}  // namespace xcot
