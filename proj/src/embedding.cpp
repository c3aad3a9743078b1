#include "narratopo/embedding.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "narratopo/errors.hpp"
#include "narratopo/hash.hpp"
#include "narratopo/io.hpp"
#include "narratopo/text.hpp"

namespace fs = std::filesystem;

namespace ntp {
namespace {

class HashedBowEmbedder final : public Embedder {
public:
    HashedBowEmbedder(int dim, uint64_t seed) : dim_(dim), seed_(seed) {
        if (dim < 8) throw UserError("hashed embedder dim must be >= 8, got " + std::to_string(dim));
    }

    std::string id() const override {
        return "hashed-bow-d" + std::to_string(dim_) + "-s" + std::to_string(seed_);
    }

    int dim() const override { return dim_; }

    void embed(const std::vector<std::string>& texts, std::vector<float>& out) override {
        for (const std::string& text : texts) {
            size_t base = out.size();
            out.resize(base + static_cast<size_t>(dim_), 0.0f);
            bool any = false;
            for (const std::string& token : tokenize(text)) {
                uint64_t h = mix64(fnv1a64(token, seed_ ^ 0xCBF29CE484222325ULL));
                size_t coord = static_cast<size_t>(h % static_cast<uint64_t>(dim_));
                float sign = (h >> 63) ? -1.0f : 1.0f;
                out[base + coord] += sign;
                any = true;
            }
            double norm2 = 0.0;
            for (int j = 0; j < dim_; ++j) {
                norm2 += static_cast<double>(out[base + j]) * out[base + j];
            }
            if (!any || norm2 < 1e-24) {
                // empty text (or full cancellation) pins to the first basis vector
                std::fill(out.begin() + static_cast<long>(base), out.end(), 0.0f);
                out[base] = 1.0f;
            }
        }
    }

private:
    int dim_;
    uint64_t seed_;
};

class CacheOnlyEmbedder final : public Embedder {
public:
    CacheOnlyEmbedder(std::string id, int dim) : id_(std::move(id)), dim_(dim) {}

    std::string id() const override { return id_; }
    int dim() const override { return dim_; }

    void embed(const std::vector<std::string>&, std::vector<float>&) override {
        throw UserError(
            "embedder '" + id_ + "' has no local runtime and the vector cache does not cover "
            "this corpus; precompute vectors into <cache>/" + id_ +
            "/<sha256(text)>.vec or set embedder.id to a built-in (e.g. hashed-bow)");
    }

private:
    std::string id_;
    int dim_;
};

} // namespace

std::unique_ptr<Embedder> hashed_bow_embedder(int dim, uint64_t seed) {
    return std::make_unique<HashedBowEmbedder>(dim, seed);
}

std::unique_ptr<Embedder> cache_only_embedder(std::string id, int dim) {
    return std::make_unique<CacheOnlyEmbedder>(std::move(id), dim);
}

VectorCache::VectorCache(fs::path root, const std::string& embedder_id, int dim)
    : dir_(std::move(root)), dim_(dim) {
    if (dir_.empty()) return;
    dir_ /= embedder_id;
    fs::create_directories(dir_);
    fs::path meta = dir_ / "meta.json";
    if (fs::exists(meta)) {
        auto j = nlohmann::json::parse(read_file(meta));
        int cached_dim = j.at("dim").get<int>();
        if (cached_dim != dim_) {
            throw UserError("embedding cache at " + dir_.string() + " has dim " +
                            std::to_string(cached_dim) + ", expected " + std::to_string(dim_));
        }
    } else {
        nlohmann::json j;
        j["dim"] = dim_;
        atomic_write_file(meta, j.dump() + "\n");
    }
}

bool VectorCache::load(const std::string& text, std::span<float> out) const {
    if (dir_.empty()) return false;
    fs::path p = dir_ / (sha256_hex(text) + ".vec");
    std::ifstream in(p, std::ios::binary);
    if (!in) return false;
    in.read(reinterpret_cast<char*>(out.data()),
            static_cast<std::streamsize>(out.size() * sizeof(float)));
    return in.gcount() == static_cast<std::streamsize>(out.size() * sizeof(float));
}

void VectorCache::store(const std::string& text, std::span<const float> vec) const {
    if (dir_.empty()) return;
    fs::path p = dir_ / (sha256_hex(text) + ".vec");
    std::string bytes(reinterpret_cast<const char*>(vec.data()), vec.size() * sizeof(float));
    atomic_write_file(p, bytes);
}

EmbeddingMatrix embed_corpus(const Corpus& corpus, Embedder& embedder,
                             const EmbedOptions& options) {
    EmbeddingMatrix matrix;
    matrix.embedder_id = embedder.id();
    matrix.dim = embedder.dim();
    const size_t n = corpus.sections.size();
    const size_t d = static_cast<size_t>(matrix.dim);
    matrix.data.resize(n * d, 0.0f);
    matrix.keys.reserve(n);

    VectorCache cache;
    if (!options.cache_dir.empty()) {
        cache = VectorCache(options.cache_dir, matrix.embedder_id, matrix.dim);
    }

    std::vector<size_t> missing;
    for (size_t i = 0; i < n; ++i) {
        const Section& s = corpus.sections[i];
        matrix.keys.push_back({s.testimony_id, s.index});
        std::span<float> row(matrix.data.data() + i * d, d);
        bool ok = cache.load(s.text, row);
        if (ok) {
            double norm2 = 0.0;
            for (float v : row) norm2 += static_cast<double>(v) * v;
            ok = std::isfinite(norm2) && std::abs(norm2 - 1.0) < 1e-3;
        }
        if (!ok) missing.push_back(i);
    }

    const int batch = options.batch_size > 0 ? options.batch_size : 64;
    std::vector<std::string> texts;
    std::vector<float> batch_out;
    for (size_t start = 0; start < missing.size(); start += static_cast<size_t>(batch)) {
        size_t end = std::min(missing.size(), start + static_cast<size_t>(batch));
        texts.clear();
        batch_out.clear();
        for (size_t k = start; k < end; ++k) {
            texts.push_back(corpus.sections[missing[k]].text);
        }
        embedder.embed(texts, batch_out);
        if (batch_out.size() != texts.size() * d) {
            throw InternalError("embedder '" + matrix.embedder_id + "' returned " +
                                std::to_string(batch_out.size()) + " floats for " +
                                std::to_string(texts.size()) + " texts of dim " + std::to_string(d));
        }
        for (size_t k = start; k < end; ++k) {
            size_t i = missing[k];
            const float* src = batch_out.data() + (k - start) * d;
            double norm2 = 0.0;
            for (size_t j = 0; j < d; ++j) norm2 += static_cast<double>(src[j]) * src[j];
            const Section& s = corpus.sections[i];
            if (!std::isfinite(norm2) || norm2 <= 0.0) {
                throw UserError("embedder '" + matrix.embedder_id +
                                "' produced a non-finite or zero vector for section " +
                                s.testimony_id + "#" + std::to_string(s.index));
            }
            const float inv = static_cast<float>(1.0 / std::sqrt(norm2));
            float* dst = matrix.data.data() + i * d;
            for (size_t j = 0; j < d; ++j) dst[j] = src[j] * inv;
            cache.store(s.text, std::span<const float>(dst, d));
        }
    }
    return matrix;
}

} // namespace ntp
