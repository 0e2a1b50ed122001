#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>

#include <openssl/evp.h>

#include "blochframes/artifacts.hpp"
#include "blochframes/errors.hpp"

namespace blochframes::cli {

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw InvalidArgument("SHA-256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) x = 0.0;  // drop the sign of negative zero
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : width_(header.size()) { add_row(header); }

void CsvTable::add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    add_row(cells);
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw DimensionMismatch("CSV row width differs from header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) text_ += ',';
        text_ += cells[i];
    }
    text_ += '\n';
}

std::string CsvTable::str() const { return text_; }

std::string encode_blocks(const std::vector<CMat>& blocks) {
    static_assert(std::endian::native == std::endian::little, "binary artifacts assume a little-endian host");
    std::string out;
    for (const auto& b : blocks) {
        const std::size_t n = static_cast<std::size_t>(b.size()) * sizeof(cplx);
        const std::size_t at = out.size();
        out.resize(at + n);
        std::memcpy(out.data() + at, b.data(), n);
    }
    return out;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory", {{"path", dir_.string()}, {"reason", ec.message()}});
}

void ArtifactWriter::write(const std::string& name, const std::string& bytes) {
    const auto path = dir_ / name;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw ConfigError("cannot write artifact", {{"path", path.string()}});
    records_.push_back({name, sha256_hex(bytes), bytes.size()});
}

void ArtifactWriter::write_json(const std::string& name, const nlohmann::json& doc) {
    write(name, doc.dump(2) + "\n");
}

nlohmann::json ArtifactWriter::manifest_entries() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : records_) out.push_back({{"file", r.file}, {"sha256", r.sha256}, {"bytes", r.bytes}});
    return out;
}

}  // namespace blochframes::cli
