#include "xcot/embedding.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace xcot {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("embedding must have dimension >= 1");
    double sq = 0.0;
    for (double v : values_) {
        if (!std::isfinite(v)) throw std::invalid_argument("embedding has non-finite component");
        sq += v * v;
    }
    norm_ = std::sqrt(sq);
    if (norm_ == 0.0) throw std::invalid_argument("zero-norm embedding");
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("embedding dimension mismatch: " + std::to_string(a.dim()) +
                                    " vs " + std::to_string(b.dim()));
    }
    if (a == b) return 1.0;
    double dot = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) dot += a.values()[i] * b.values()[i];
    double c = dot / (a.norm() * b.norm());
    if (c > 1.0) return 1.0;
    if (c < -1.0) return -1.0;
    return c;
}

HashEmbedder::HashEmbedder(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw std::invalid_argument("embedder dimension must be >= 1");
}

std::vector<EmbeddingVector> HashEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const std::string& text : texts) {
        std::vector<double> v(dim_, 0.0);
        auto bump = [&](std::string_view feature) {
            std::uint64_t h = fnv1a(feature);
            v[h % dim_] += ((h >> 32) & 1) ? 1.0 : -1.0;
        };
        std::size_t i = 0;
        while (i < text.size()) {
            while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
            std::size_t start = i;
            while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
            if (i == start) break;
            std::string_view token(text.data() + start, i - start);
            bump(token);
            for (std::size_t k = 0; k + 3 <= token.size(); ++k) bump(token.substr(k, 3));
        }
        bool all_zero = true;
        for (double x : v) {
            if (x != 0.0) {
                all_zero = false;
                break;
            }
        }
        if (all_zero) v[fnv1a(text) % dim_] = 1.0;
        double sq = 0.0;
        for (double x : v) sq += x * x;
        double norm = std::sqrt(sq);
        for (double& x : v) x /= norm;
        out.emplace_back(std::move(v));
    }
    return out;
}

RemoteEmbedder::RemoteEmbedder(Transport& transport, std::string base_url, std::string api_key,
                               std::string model, std::size_t dim, int timeout_s)
    : transport_(&transport),
      base_url_(std::move(base_url)),
      api_key_(std::move(api_key)),
      model_(std::move(model)),
      dim_(dim),
      timeout_s_(timeout_s) {
    if (dim_ == 0) throw std::invalid_argument("embedder dimension must be >= 1");
}

std::vector<EmbeddingVector> RemoteEmbedder::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) return {};

    nlohmann::json body = {{"model", model_}, {"input", texts}};
    HttpHeaders headers = {{"Content-Type", "application/json"}};
    if (!api_key_.empty()) headers.emplace_back("Authorization", "Bearer " + api_key_);

    HttpResponse res =
        transport_->post_json(base_url_ + "/embeddings", headers, body.dump(), timeout_s_);
    if (!res.ok()) throw std::runtime_error("embedding request failed: " + res.transport_error);
    if (res.status != 200) {
        throw std::runtime_error("embedding endpoint returned HTTP " +
                                 std::to_string(res.status));
    }

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(res.body);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("malformed embedding response: ") + e.what());
    }
    if (!doc.contains("data") || !doc["data"].is_array() || doc["data"].size() != texts.size()) {
        throw std::runtime_error("embedding response 'data' does not match input batch");
    }

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& row : doc["data"]) {
        std::vector<double> values = row.at("embedding").get<std::vector<double>>();
        if (values.size() != dim_) {
            throw std::runtime_error("embedding dimension " + std::to_string(values.size()) +
                                     " does not match declared " + std::to_string(dim_));
        }
        out.emplace_back(std::move(values));
    }
    return out;
}

}  // namespace xcot
