#include "narratopo/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "narratopo/errors.hpp"
#include "narratopo/io.hpp"
#include "narratopo/text.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace ntp {
namespace {

Metadata parse_metadata(const json& j, const std::string& where) {
    Metadata meta;
    if (j.is_null()) return meta;
    if (!j.is_object()) throw UserError(where + ": metadata must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const json& v = it.value();
        if (key == "gender") {
            meta.gender = gender_from_string(v.get<std::string>());
        } else if (key == "birth_year") {
            meta.birth_year = v.get<int>();
        } else if (key == "interview_year") {
            meta.interview_year = v.get<int>();
        } else if (key == "country") {
            meta.country = v.get<std::string>();
        } else {
            meta.extras[key] = v.is_string() ? v.get<std::string>() : v.dump();
        }
    }
    return meta;
}

RawTranscript parse_record(const json& j, const std::string& where) {
    RawTranscript t;
    if (!j.is_object()) throw UserError(where + ": record is not an object");
    if (!j.contains("testimony_id") || !j["testimony_id"].is_string() ||
        j["testimony_id"].get<std::string>().empty()) {
        throw UserError(where + ": missing or empty testimony_id");
    }
    t.testimony_id = j["testimony_id"].get<std::string>();
    if (j.contains("metadata")) t.metadata = parse_metadata(j["metadata"], where);
    if (!j.contains("turns") || !j["turns"].is_array() || j["turns"].empty()) {
        throw UserError(where + ": missing or empty turns");
    }
    for (const json& jt : j["turns"]) {
        if (!jt.is_array() || jt.size() != 2 || !jt[0].is_string() || !jt[1].is_string()) {
            throw UserError(where + ": turn must be [speaker, text]");
        }
        std::string speaker = jt[0].get<std::string>();
        Turn turn;
        if (speaker == "interviewer") turn.speaker = Speaker::interviewer;
        else if (speaker == "subject") turn.speaker = Speaker::subject;
        else throw UserError(where + ": unknown speaker '" + speaker + "'");
        turn.text = trim(jt[1].get<std::string>());
        if (turn.text.empty()) throw UserError(where + ": empty turn text");
        t.turns.push_back(std::move(turn));
    }
    return t;
}

ParseResult parse_jsonl(const fs::path& path) {
    ParseResult result;
    std::string content = read_file(path);
    auto lines = split_lines(content);
    std::string fname = path.filename().string();
    for (size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (trim(line).empty()) continue;
        std::string where = fname + ":" + std::to_string(i + 1);
        try {
            json j = json::parse(line);
            result.transcripts.push_back(parse_record(j, where));
        } catch (const json::exception& e) {
            result.issues.push_back({fname, static_cast<int>(i + 1), e.what()});
        } catch (const UserError& e) {
            result.issues.push_back({fname, static_cast<int>(i + 1), e.what()});
        }
    }
    return result;
}

RawTranscript parse_plain_file(const fs::path& txt_path) {
    RawTranscript t;
    t.testimony_id = txt_path.stem().string();
    fs::path meta_path = txt_path.parent_path() / (t.testimony_id + ".meta.json");
    if (fs::exists(meta_path)) {
        t.metadata = parse_metadata(json::parse(read_file(meta_path)), meta_path.string());
    }
    for (const std::string& raw_line : split_lines(read_file(txt_path))) {
        std::string line = trim(raw_line);
        if (line.empty()) continue;
        if (line.rfind("Q:", 0) == 0) {
            t.turns.push_back({Speaker::interviewer, trim(line.substr(2))});
        } else if (line.rfind("A:", 0) == 0) {
            t.turns.push_back({Speaker::subject, trim(line.substr(2))});
        } else if (!t.turns.empty()) {
            t.turns.back().text += " " + line;
        } else {
            throw UserError(txt_path.string() + ": text before first Q:/A: line");
        }
    }
    if (t.turns.empty()) throw UserError(txt_path.string() + ": no turns");
    for (const Turn& turn : t.turns) {
        if (turn.text.empty()) throw UserError(txt_path.string() + ": empty turn text");
    }
    return t;
}

ParseResult parse_plain(const fs::path& path) {
    ParseResult result;
    std::vector<fs::path> files;
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.path().extension() == ".txt") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(path);
    }
    for (const fs::path& f : files) {
        try {
            result.transcripts.push_back(parse_plain_file(f));
        } catch (const std::exception& e) {
            result.issues.push_back({f.filename().string(), 0, e.what()});
        }
    }
    return result;
}

// Join non-empty parts with single spaces.
std::string join_texts(const std::vector<std::string>& parts) {
    std::string out;
    for (const std::string& p : parts) {
        if (p.empty()) continue;
        if (!out.empty()) out += ' ';
        out += p;
    }
    return out;
}

void append_origin(std::vector<TurnRange>& dest, const std::vector<TurnRange>& src) {
    for (const TurnRange& r : src) {
        if (!dest.empty() && dest.back().end == r.begin) {
            dest.back().end = r.end;
        } else {
            dest.push_back(r);
        }
    }
}

Section merge_group(const std::vector<Section>& group) {
    Section merged;
    merged.testimony_id = group.front().testimony_id;
    std::vector<std::string> texts;
    texts.reserve(group.size());
    for (const Section& s : group) {
        texts.push_back(s.text);
        merged.word_count += s.word_count;
        append_origin(merged.origin, s.origin);
    }
    merged.text = join_texts(texts);
    return merged;
}

} // namespace

InputFormat input_format_from_string(const std::string& s) {
    if (s == "jsonl") return InputFormat::jsonl;
    if (s == "plain_qa" || s == "plain") return InputFormat::plain_qa;
    throw UserError("unknown corpus format: " + s);
}

ParseResult parse_transcripts(const fs::path& path, InputFormat format) {
    if (!fs::exists(path)) throw UserError("corpus path does not exist: " + path.string());
    ParseResult result =
        format == InputFormat::jsonl ? parse_jsonl(path) : parse_plain(path);

    std::set<std::string> seen;
    std::vector<std::string> duplicates;
    for (const RawTranscript& t : result.transcripts) {
        if (!seen.insert(t.testimony_id).second) duplicates.push_back(t.testimony_id);
    }
    if (!duplicates.empty()) {
        std::string msg = "duplicate testimony ids:";
        for (const std::string& d : duplicates) msg += " " + d;
        throw UserError(msg);
    }
    return result;
}

std::vector<Section> pair_turns(const RawTranscript& transcript, bool drop_questions) {
    std::vector<Section> sections;
    const auto& turns = transcript.turns;
    int cur_begin = -1;
    auto emit = [&](int begin, int end) {
        Section s;
        s.testimony_id = transcript.testimony_id;
        s.index = static_cast<int>(sections.size());
        std::vector<std::string> texts;
        for (int i = begin; i < end; ++i) {
            if (drop_questions && turns[i].speaker == Speaker::interviewer) continue;
            texts.push_back(trim(turns[i].text));
        }
        s.text = join_texts(texts);
        s.word_count = count_words(s.text);
        s.origin.push_back({begin, end});
        sections.push_back(std::move(s));
    };
    for (int i = 0; i < static_cast<int>(turns.size()); ++i) {
        if (turns[i].speaker == Speaker::interviewer) {
            if (cur_begin >= 0) emit(cur_begin, i);
            cur_begin = i;
        } else if (cur_begin < 0) {
            cur_begin = i;
        }
    }
    if (cur_begin >= 0) emit(cur_begin, static_cast<int>(turns.size()));
    return sections;
}

std::vector<Section> merge_short_sections(std::vector<Section> sections, int min_words) {
    std::vector<Section> out;
    std::vector<Section> group;
    int group_words = 0;
    for (Section& s : sections) {
        group_words += s.word_count;
        group.push_back(std::move(s));
        if (group_words >= min_words) {
            out.push_back(group.size() == 1 ? std::move(group.front()) : merge_group(group));
            group.clear();
            group_words = 0;
        }
    }
    if (!group.empty()) {
        if (out.empty()) {
            out.push_back(group.size() == 1 ? std::move(group.front()) : merge_group(group));
        } else {
            std::vector<Section> tail;
            tail.push_back(std::move(out.back()));
            out.pop_back();
            for (Section& s : group) tail.push_back(std::move(s));
            out.push_back(merge_group(tail));
        }
    }
    for (size_t i = 0; i < out.size(); ++i) out[i].index = static_cast<int>(i);
    return out;
}

std::vector<Section> split_long_sections(std::vector<Section> sections, int max_words,
                                         int min_words) {
    std::vector<Section> out;
    for (Section& s : sections) {
        if (s.word_count <= max_words) {
            out.push_back(std::move(s));
            continue;
        }
        const auto spans = word_spans(s.text);
        const int total = static_cast<int>(spans.size());
        // boundary_after[i]: a sentence ends at word i (cutting after it is legal)
        std::vector<char> boundary_after(total, 0);
        for (int i = 0; i < total; ++i) {
            boundary_after[i] =
                ends_sentence(std::string_view(s.text).substr(spans[i].begin, spans[i].end - spans[i].begin));
        }
        int offset = 0;
        int remaining = total;
        auto emit_chunk = [&](int n_words) {
            Section chunk;
            chunk.testimony_id = s.testimony_id;
            size_t b = spans[offset].begin;
            size_t e = spans[offset + n_words - 1].end;
            chunk.text = s.text.substr(b, e - b);
            chunk.word_count = n_words;
            chunk.origin = s.origin;
            out.push_back(std::move(chunk));
            offset += n_words;
            remaining -= n_words;
        };
        while (remaining > max_words) {
            const int m_rem = (remaining + max_words - 1) / max_words;
            const int target = (remaining + m_rem - 1) / m_rem;
            // Feasible chunk sizes: near the target, inside the word band, and
            // leaving the remainder partitionable into in-band chunks.
            int lo = std::max({target - 30, min_words, remaining - (m_rem - 1) * max_words});
            int hi = std::min({target + 30, max_words, remaining - (m_rem - 1) * min_words});
            if (lo > hi) {
                // Degenerate config (max_words < 2*min_words); keep chunks valid.
                lo = hi = std::clamp(target, 1, remaining - 1);
            }
            int chosen = -1;
            for (int d = 0; chosen < 0 && d <= hi - lo; ++d) {
                for (int c : {target - d, target + d}) {
                    if (c < lo || c > hi) continue;
                    if (boundary_after[offset + c - 1]) {
                        chosen = c;
                        break;
                    }
                }
            }
            emit_chunk(chosen >= 0 ? chosen : std::clamp(target, lo, hi));
        }
        if (remaining > 0) emit_chunk(remaining);
    }
    for (size_t i = 0; i < out.size(); ++i) out[i].index = static_cast<int>(i);
    return out;
}

Corpus build_corpus(const std::vector<RawTranscript>& transcripts, const IngestConfig& cfg) {
    Corpus corpus;
    for (const RawTranscript& t : transcripts) {
        corpus.testimony_order.push_back(t.testimony_id);
        corpus.transcripts[t.testimony_id] = t.metadata;
        corpus.provenance.total_turns += static_cast<long>(t.turns.size());
        auto sections = pair_turns(t, cfg.drop_questions);
        for (Section& s : sections) corpus.sections.push_back(std::move(s));
    }
    return corpus;
}

Corpus preprocess(const Corpus& corpus, const IngestConfig& cfg) {
    Corpus out;
    out.testimony_order = corpus.testimony_order;
    out.transcripts = corpus.transcripts;
    out.provenance = corpus.provenance;
    out.provenance.flagged_short.clear();

    auto ranges = section_ranges(corpus);
    for (const std::string& id : corpus.testimony_order) {
        auto it = ranges.find(id);
        if (it == ranges.end()) continue;
        std::vector<Section> secs(corpus.sections.begin() + static_cast<long>(it->second.first),
                                  corpus.sections.begin() + static_cast<long>(it->second.second));
        long total_words = 0;
        for (const Section& s : secs) total_words += s.word_count;
        secs = merge_short_sections(std::move(secs), cfg.min_words);
        secs = split_long_sections(std::move(secs), cfg.max_words, cfg.min_words);
        if (total_words < cfg.min_words) out.provenance.flagged_short.push_back(id);
        for (Section& s : secs) out.sections.push_back(std::move(s));
    }
    return out;
}

std::string sections_to_jsonl(const Corpus& corpus) {
    std::string out;
    for (const Section& s : corpus.sections) {
        json j;
        j["testimony_id"] = s.testimony_id;
        j["index"] = s.index;
        j["word_count"] = s.word_count;
        j["text"] = s.text;
        json origin = json::array();
        for (const TurnRange& r : s.origin) origin.push_back({r.begin, r.end});
        j["origin"] = std::move(origin);
        out += j.dump();
        out += '\n';
    }
    return out;
}

void load_sections_jsonl(const fs::path& path, Corpus& corpus) {
    corpus.sections.clear();
    std::string content = read_file(path);
    std::set<std::string> seen(corpus.testimony_order.begin(), corpus.testimony_order.end());
    for (const std::string& line : split_lines(content)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line);
        Section s;
        s.testimony_id = j.at("testimony_id").get<std::string>();
        s.index = j.at("index").get<int>();
        s.word_count = j.at("word_count").get<int>();
        s.text = j.at("text").get<std::string>();
        for (const json& r : j.at("origin")) {
            s.origin.push_back({r.at(0).get<int>(), r.at(1).get<int>()});
        }
        if (seen.insert(s.testimony_id).second) corpus.testimony_order.push_back(s.testimony_id);
        corpus.sections.push_back(std::move(s));
    }
}

} // namespace ntp
