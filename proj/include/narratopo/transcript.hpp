#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ntp {

enum class Gender { male, female, unknown };

std::string to_string(Gender g);
Gender gender_from_string(const std::string& s);

enum class Speaker { interviewer, subject };

struct Turn {
    Speaker speaker = Speaker::subject;
    std::string text;
};

struct Metadata {
    Gender gender = Gender::unknown;
    std::optional<int> birth_year;
    std::optional<int> interview_year;
    std::string country;
    std::map<std::string, std::string> extras;

    // String view of any key ("gender", "birth_year", "interview_year",
    // "country", or an extras key); nullopt when absent.
    std::optional<std::string> value(const std::string& key) const;
};

struct RawTranscript {
    std::string testimony_id;
    Metadata metadata;
    std::vector<Turn> turns;
};

// Half-open range [begin, end) of source turn indices.
struct TurnRange {
    int begin = 0;
    int end = 0;

    bool operator==(const TurnRange&) const = default;
};

struct Section {
    std::string testimony_id;
    int index = 0;
    std::string text;
    int word_count = 0;
    std::vector<TurnRange> origin;
};

struct IngestProvenance {
    // Testimonies kept as a single under-threshold section.
    std::vector<std::string> flagged_short;
    int parse_error_count = 0;
    long total_turns = 0;
};

struct Corpus {
    std::vector<Section> sections;               // grouped by testimony, source order
    std::vector<std::string> testimony_order;    // ids in source order
    std::map<std::string, Metadata> transcripts; // metadata index
    IngestProvenance provenance;

    size_t testimony_count() const { return testimony_order.size(); }
};

// id -> [begin, end) over corpus.sections, built in one pass.
std::map<std::string, std::pair<size_t, size_t>> section_ranges(const Corpus& corpus);

} // namespace ntp
