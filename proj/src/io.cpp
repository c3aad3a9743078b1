#include "narratopo/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "narratopo/errors.hpp"

namespace fs = std::filesystem;

namespace ntp {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot read file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void atomic_write_file(const fs::path& path, std::string_view content) {
    fs::path dir = path.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw UserError("cannot write file: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw UserError("short write: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw UserError("rename failed for " + path.string() + ": " + ec.message());
    }
}

std::vector<std::string> split_lines(std::string_view content) {
    std::vector<std::string> lines;
    size_t start = 0;
    while (start <= content.size()) {
        size_t nl = content.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < content.size()) lines.emplace_back(content.substr(start));
            break;
        }
        size_t end = nl;
        if (end > start && content[end - 1] == '\r') --end;
        lines.emplace_back(content.substr(start, end - start));
        start = nl + 1;
    }
    return lines;
}

std::string csv_escape(std::string_view field) {
    bool needs_quote = field.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs_quote) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> csv_split(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

CsvBuilder::CsvBuilder(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvBuilder::add_row(const std::vector<std::string>& fields) {
    if (fields.size() != header_.size()) {
        throw InternalError("csv row width " + std::to_string(fields.size()) +
                            " != header width " + std::to_string(header_.size()));
    }
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) body_ += ',';
        body_ += csv_escape(fields[i]);
    }
    body_ += '\n';
    ++rows_;
}

std::string CsvBuilder::str() const {
    std::string out;
    if (!config_hash_.empty()) out += "# config_hash=" + config_hash_ + "\n";
    for (size_t i = 0; i < header_.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(header_[i]);
    }
    out += '\n';
    out += body_;
    return out;
}

void CsvBuilder::write(const fs::path& path) const {
    atomic_write_file(path, str());
}

std::string CsvFile::comment_value(std::string_view key) const {
    for (const std::string& c : comments) {
        size_t eq = c.find('=');
        if (eq == std::string::npos) continue;
        if (std::string_view(c).substr(0, eq) == key) return c.substr(eq + 1);
    }
    return "";
}

int CsvFile::column(std::string_view name) const {
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

CsvFile read_csv(const fs::path& path) {
    CsvFile out;
    std::string content = read_file(path);
    bool have_header = false;
    for (const std::string& line : split_lines(content)) {
        if (line.empty()) continue;
        if (!have_header && line[0] == '#') {
            std::string c = line.substr(1);
            if (!c.empty() && c[0] == ' ') c.erase(0, 1);
            out.comments.push_back(std::move(c));
            continue;
        }
        if (!have_header) {
            out.header = csv_split(line);
            have_header = true;
        } else {
            out.rows.push_back(csv_split(line));
        }
    }
    return out;
}

} // namespace ntp
