#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "blochframes/types.hpp"

namespace blochframes::cli {

std::string sha256_hex(std::string_view bytes);

/// Shortest round-trip decimal form; identical input gives identical text.
std::string format_double(double x);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    void add_row(const std::vector<double>& values);
    void add_row(const std::vector<std::string>& cells);
    std::string str() const;

private:
    std::size_t width_;
    std::string text_;
};

/// Column blocks as little-endian (re, im) doubles, each block column-major.
std::string encode_blocks(const std::vector<CMat>& blocks);

struct ArtifactRecord {
    std::string file;
    std::string sha256;
    std::size_t bytes = 0;
};

class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }
    void write(const std::string& name, const std::string& bytes);
    void write_json(const std::string& name, const nlohmann::json& doc);
    const std::vector<ArtifactRecord>& records() const { return records_; }
    nlohmann::json manifest_entries() const;

private:
    std::filesystem::path dir_;
    std::vector<ArtifactRecord> records_;
};

}  // namespace blochframes::cli
