#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "narratopo/transcript.hpp"

namespace ntp {

struct SectionKey {
    std::string testimony_id;
    int index = 0;

    bool operator==(const SectionKey&) const = default;
};

struct EmbeddingMatrix {
    std::vector<float> data; // row-major rows() x dim
    std::vector<SectionKey> keys;
    std::string embedder_id;
    int dim = 0;

    size_t rows() const { return keys.size(); }
    std::span<const float> row(size_t i) const {
        return {data.data() + i * static_cast<size_t>(dim), static_cast<size_t>(dim)};
    }
};

// text list -> vector list. Implementations need not normalize;
// embed_corpus L2-normalizes every row at the boundary.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string id() const = 0;
    virtual int dim() const = 0;
    // Appends texts.size() * dim() floats to out.
    virtual void embed(const std::vector<std::string>& texts, std::vector<float>& out) = 0;
};

// Deterministic offline embedder: every token is hashed (with the seed) to a
// coordinate and a sign, counts accumulate, the result is L2-normalized.
// Empty text (or full sign cancellation) maps to the first basis vector.
std::unique_ptr<Embedder> hashed_bow_embedder(int dim, uint64_t seed);

// Embedder with no local runtime: resolves entirely through the vector
// cache and fails with a remediation hint on any miss.
std::unique_ptr<Embedder> cache_only_embedder(std::string id, int dim);

// <cache>/<embedder_id>/<sha256(text)>.vec, little-endian float32.
class VectorCache {
public:
    VectorCache() = default;
    VectorCache(std::filesystem::path root, const std::string& embedder_id, int dim);

    bool enabled() const { return !dir_.empty(); }
    bool load(const std::string& text, std::span<float> out) const;
    void store(const std::string& text, std::span<const float> vec) const;

private:
    std::filesystem::path dir_;
    int dim_ = 0;
};

struct EmbedOptions {
    std::filesystem::path cache_dir; // empty -> no cache
    int batch_size = 64;
};

// One row per section, corpus order. Any per-section failure aborts the
// run; a partial matrix is never returned.
EmbeddingMatrix embed_corpus(const Corpus& corpus, Embedder& embedder,
                             const EmbedOptions& options = {});

} // namespace ntp
