#include "narratopo/transcript.hpp"

#include "narratopo/errors.hpp"

namespace ntp {

std::string to_string(Gender g) {
    switch (g) {
        case Gender::male: return "male";
        case Gender::female: return "female";
        default: return "unknown";
    }
}

Gender gender_from_string(const std::string& s) {
    if (s == "male") return Gender::male;
    if (s == "female") return Gender::female;
    if (s == "unknown" || s.empty()) return Gender::unknown;
    throw UserError("invalid gender value: " + s);
}

std::optional<std::string> Metadata::value(const std::string& key) const {
    if (key == "gender") return to_string(gender);
    if (key == "birth_year") {
        if (!birth_year) return std::nullopt;
        return std::to_string(*birth_year);
    }
    if (key == "interview_year") {
        if (!interview_year) return std::nullopt;
        return std::to_string(*interview_year);
    }
    if (key == "country") {
        if (country.empty()) return std::nullopt;
        return country;
    }
    auto it = extras.find(key);
    if (it == extras.end()) return std::nullopt;
    return it->second;
}

std::map<std::string, std::pair<size_t, size_t>> section_ranges(const Corpus& corpus) {
    std::map<std::string, std::pair<size_t, size_t>> ranges;
    size_t i = 0;
    while (i < corpus.sections.size()) {
        size_t begin = i;
        const std::string& id = corpus.sections[i].testimony_id;
        while (i < corpus.sections.size() && corpus.sections[i].testimony_id == id) ++i;
        ranges[id] = {begin, i};
    }
    return ranges;
}

} // namespace ntp
