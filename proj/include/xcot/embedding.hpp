#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xcot/net.hpp"

namespace xcot {

// Finite, nonzero vector; the norm is validated and cached at construction so
// degenerate inputs fail loudly instead of producing cos = NaN.
class EmbeddingVector {
  public:
    explicit EmbeddingVector(std::vector<double> values);

    const std::vector<double>& values() const { return values_; }
    std::size_t dim() const { return values_.size(); }
    double norm() const { return norm_; }

    bool operator==(const EmbeddingVector& other) const { return values_ == other.values_; }

  private:
    std::vector<double> values_;
    double norm_ = 0.0;
};

// Exactly 1 for component-wise identical vectors, otherwise the normalized
// dot product clamped to [-1, 1].
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class Embedder {
  public:
    virtual ~Embedder() = default;
    virtual std::size_t dim() const = 0;
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
};

// Deterministic offline embedder: signed FNV-1a bag of whitespace tokens plus
// UTF-8 byte trigrams, L2-normalized. Identical texts embed identically on
// every platform; no model downloads.
class HashEmbedder final : public Embedder {
  public:
    explicit HashEmbedder(std::size_t dim = 64);
    std::size_t dim() const override { return dim_; }
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

  private:
    std::size_t dim_;
};

// OpenAI-compatible POST {base_url}/embeddings client.
class RemoteEmbedder final : public Embedder {
  public:
    RemoteEmbedder(Transport& transport, std::string base_url, std::string api_key,
                   std::string model, std::size_t dim, int timeout_s = 60);
    std::size_t dim() const override { return dim_; }
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

  private:
    Transport* transport_;
    std::string base_url_;
    std::string api_key_;
    std::string model_;
    std::size_t dim_;
    int timeout_s_;
};

}  // namespace xcot
