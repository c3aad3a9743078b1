#include "narratopo/topics.hpp"

#include <algorithm>
#include <iostream>

#include <json.hpp>

#include "narratopo/errors.hpp"
#include "narratopo/io.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace ntp {

std::string TopicModel::title_of(int topic_id) const {
    if (topic_id == kOutlierId) return outlier_title;
    if (topic_id < 0 || topic_id >= topic_count()) {
        throw InternalError("unknown topic id " + std::to_string(topic_id));
    }
    return topics[static_cast<size_t>(topic_id)].title;
}

int TopicModel::assignment_of(const std::string& testimony_id, int section_index) const {
    for (size_t i = 0; i < keys.size(); ++i) {
        if (keys[i].index == section_index && keys[i].testimony_id == testimony_id) {
            return assignments[i];
        }
    }
    throw InternalError("no assignment for section " + testimony_id + "#" +
                        std::to_string(section_index));
}

TopicModel fit_topics(const Corpus& corpus, const EmbeddingMatrix& emb, const TopicConfig& cfg) {
    if (emb.rows() != corpus.sections.size()) {
        throw UserError("embedding matrix has " + std::to_string(emb.rows()) + " rows for " +
                        std::to_string(corpus.sections.size()) + " sections");
    }
    TopicModel model;
    model.keys = emb.keys;

    std::vector<float> reduced =
        reduce_dimensions(emb.data.data(), emb.rows(), emb.dim, cfg.reduce);
    model.assignments =
        cluster_sections(reduced.data(), emb.rows(), cfg.reduce.target_dim, cfg.cluster);

    std::set<std::string> stop;
    if (!cfg.stopwords_path.empty()) stop = load_stopwords(cfg.stopwords_path);
    const std::set<std::string>* stop_ptr = cfg.stopwords_path.empty() ? nullptr : &stop;
    auto words = ctfidf(corpus, model.assignments, cfg.top_k, stop_ptr);

    std::map<int, long> sizes;
    long outliers = 0;
    for (int a : model.assignments) {
        if (a == TopicModel::kOutlierId) ++outliers;
        else ++sizes[a];
    }
    model.outlier_fraction = model.assignments.empty()
                                 ? 0.0
                                 : static_cast<double>(outliers) /
                                       static_cast<double>(model.assignments.size());

    for (const auto& [id, size] : sizes) {
        TopicInfo info;
        info.id = id;
        info.size = size;
        auto it = words.find(id);
        if (it != words.end()) info.words = it->second;
        info.title = info.words.empty() ? ("topic-" + std::to_string(id)) : info.words[0].word;
        model.topics.push_back(std::move(info));
    }
    auto it = words.find(TopicModel::kOutlierId);
    if (it != words.end()) model.outlier_words = it->second;

    model.config_snapshot["reduce.method"] = cfg.reduce.method;
    model.config_snapshot["reduce.target_dim"] = std::to_string(cfg.reduce.target_dim);
    model.config_snapshot["reduce.n_neighbors"] = std::to_string(cfg.reduce.n_neighbors);
    model.config_snapshot["reduce.epochs"] = std::to_string(cfg.reduce.epochs);
    model.config_snapshot["reduce.seed"] = std::to_string(cfg.reduce.seed);
    model.config_snapshot["cluster.min_cluster_size"] = std::to_string(cfg.cluster.min_cluster_size);
    model.config_snapshot["cluster.min_samples"] = std::to_string(cfg.cluster.min_samples);
    model.config_snapshot["topics.top_k"] = std::to_string(cfg.top_k);
    model.config_snapshot["embedder.id"] = emb.embedder_id;
    return model;
}

void apply_label_map(TopicModel& model, const fs::path& label_file) {
    auto j = nlohmann::json::parse(read_file(label_file));
    if (!j.is_object()) throw UserError("label map must be a JSON object: " + label_file.string());
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const std::string title = it.value().get<std::string>();
        bool numeric = !key.empty() && key.find_first_not_of("-0123456789") == std::string::npos;
        if (numeric) {
            int id = std::stoi(key);
            if (id == TopicModel::kOutlierId) {
                model.outlier_title = title;
            } else if (id >= 0 && id < model.topic_count()) {
                model.topics[static_cast<size_t>(id)].title = title;
            } else {
                std::cerr << "warning: label map names nonexistent topic id " << id << "\n";
            }
            continue;
        }
        // signature word: attaches to topics whose top word matches
        bool matched = false;
        for (TopicInfo& t : model.topics) {
            if (!t.words.empty() && t.words[0].word == key) {
                t.title = title;
                matched = true;
            }
        }
        if (!matched) std::cerr << "warning: label map signature '" << key << "' matches no topic\n";
    }
}

std::string model_to_json(const TopicModel& model, const std::string& config_hash) {
    ordered_json j;
    j["config_hash"] = config_hash;
    j["topics"] = ordered_json::array();
    for (const TopicInfo& t : model.topics) {
        ordered_json jt;
        jt["id"] = t.id;
        jt["title"] = t.title;
        jt["size"] = t.size;
        ordered_json jw = ordered_json::array();
        for (const WeightedWord& w : t.words) jw.push_back({w.word, w.weight});
        jt["words"] = std::move(jw);
        j["topics"].push_back(std::move(jt));
    }
    ordered_json jo;
    jo["id"] = TopicModel::kOutlierId;
    jo["title"] = model.outlier_title;
    long outlier_count = 0;
    for (int a : model.assignments) outlier_count += a == TopicModel::kOutlierId;
    jo["size"] = outlier_count;
    ordered_json jw = ordered_json::array();
    for (const WeightedWord& w : model.outlier_words) jw.push_back({w.word, w.weight});
    jo["words"] = std::move(jw);
    j["outlier"] = std::move(jo);
    j["outlier_fraction"] = model.outlier_fraction;
    j["config_snapshot"] = model.config_snapshot;
    j["assignments_path"] = "assignments.csv";
    return j.dump(2) + "\n";
}

std::string assignments_to_csv(const TopicModel& model, const std::string& config_hash) {
    CsvBuilder csv({"testimony_id", "section_index", "topic_id"});
    csv.set_config_hash(config_hash);
    for (size_t i = 0; i < model.keys.size(); ++i) {
        csv.add_row({model.keys[i].testimony_id, std::to_string(model.keys[i].index),
                     std::to_string(model.assignments[i])});
    }
    return csv.str();
}

TopicModel load_model(const fs::path& model_path, const fs::path& assignments_path) {
    TopicModel model;
    auto j = nlohmann::json::parse(read_file(model_path));
    for (const auto& jt : j.at("topics")) {
        TopicInfo t;
        t.id = jt.at("id").get<int>();
        t.title = jt.at("title").get<std::string>();
        t.size = jt.at("size").get<long>();
        for (const auto& jw : jt.at("words")) {
            t.words.push_back({jw.at(0).get<std::string>(), jw.at(1).get<double>()});
        }
        model.topics.push_back(std::move(t));
    }
    if (j.contains("outlier")) {
        model.outlier_title = j["outlier"].at("title").get<std::string>();
        for (const auto& jw : j["outlier"].at("words")) {
            model.outlier_words.push_back({jw.at(0).get<std::string>(), jw.at(1).get<double>()});
        }
    }
    model.outlier_fraction = j.at("outlier_fraction").get<double>();
    if (j.contains("config_snapshot")) {
        for (auto it = j["config_snapshot"].begin(); it != j["config_snapshot"].end(); ++it) {
            model.config_snapshot[it.key()] = it.value().get<std::string>();
        }
    }

    CsvFile csv = read_csv(assignments_path);
    int id_col = csv.column("testimony_id");
    int idx_col = csv.column("section_index");
    int topic_col = csv.column("topic_id");
    if (id_col < 0 || idx_col < 0 || topic_col < 0) {
        throw UserError("assignments file missing required columns: " + assignments_path.string());
    }
    for (const auto& row : csv.rows) {
        model.keys.push_back({row[static_cast<size_t>(id_col)],
                              std::stoi(row[static_cast<size_t>(idx_col)])});
        model.assignments.push_back(std::stoi(row[static_cast<size_t>(topic_col)]));
    }
    return model;
}

} // namespace ntp
