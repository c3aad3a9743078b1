#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ntp {

// Shortest round-trip decimal form (to_chars). Infinities print as
// "inf"/"-inf"; all artifact floats go through here so reruns are
// byte-identical.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);

// Write-to-temp then rename; partial artifacts are never visible.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

std::vector<std::string> split_lines(std::string_view content);

// Minimal RFC-4180 CSV support: quoting only where needed.
std::string csv_escape(std::string_view field);
std::vector<std::string> csv_split(std::string_view line);

// Accumulates rows, then writes atomically with a leading
// "# config_hash=<hex>" comment when a hash is set.
class CsvBuilder {
public:
    explicit CsvBuilder(std::vector<std::string> header);

    void set_config_hash(std::string hash) { config_hash_ = std::move(hash); }
    void add_row(const std::vector<std::string>& fields);
    std::string str() const;
    void write(const std::filesystem::path& path) const;
    size_t row_count() const { return rows_; }

private:
    std::vector<std::string> header_;
    std::string config_hash_;
    std::string body_;
    size_t rows_ = 0;
};

// Parsed CSV artifact: leading # comments captured, header row split out.
struct CsvFile {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Value of "# key=value" comment, empty when absent.
    std::string comment_value(std::string_view key) const;
    int column(std::string_view name) const; // -1 when missing
};

CsvFile read_csv(const std::filesystem::path& path);

} // namespace ntp
