#include "sartts/embedding_store.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "sartts/errors.hpp"

namespace sartts {

namespace {

constexpr char kMagic[4] = {'S', 'E', 'M', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

std::string encode_blob(const Matrix& m) {
    std::string bytes;
    bytes.append(kMagic, 4);
    put_u32(bytes, kVersion);
    put_u32(bytes, static_cast<std::uint32_t>(m.rows));
    put_u32(bytes, static_cast<std::uint32_t>(m.cols));
    for (double v : m.data) {
        const float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(bytes, bits);
    }
    return bytes;
}

// Parses and validates the 16-byte header; returns (count, dim).
std::pair<std::uint32_t, std::uint32_t> parse_blob_header(const std::string& bytes,
                                                          const std::string& origin) {
    if (bytes.size() < 16) throw FormatError(origin + ": truncated header");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (std::memcmp(p, kMagic, 4) != 0) throw FormatError(origin + ": bad magic");
    const std::uint32_t version = get_u32(p + 4);
    if (version != kVersion)
        throw FormatError(origin + ": unsupported version " + std::to_string(version));
    const std::uint32_t count = get_u32(p + 8);
    const std::uint32_t dim = get_u32(p + 12);
    const std::size_t expect = 16 + 4ULL * count * dim;
    if (bytes.size() != expect)
        throw FormatError(origin + ": size mismatch, expected " + std::to_string(expect) +
                          " bytes, found " + std::to_string(bytes.size()));
    return {count, dim};
}

Matrix decode_blob(const std::string& bytes, const std::string& origin) {
    const auto [count, dim] = parse_blob_header(bytes, origin);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + 16;
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(count) * dim);
    for (std::size_t i = 0; i < static_cast<std::size_t>(count) * dim; ++i) {
        const std::uint32_t bits = get_u32(p + 4 * i);
        float f;
        std::memcpy(&f, &bits, 4);
        if (!std::isfinite(f)) throw ValidationError(origin + ": non-finite value");
        data.push_back(static_cast<double>(f));
    }
    return Matrix(count, dim, std::move(data));
}

}  // namespace

std::string to_string(Label l) {
    return l == Label::sarcastic ? "sarcastic" : "non_sarcastic";
}

Label parse_label(const std::string& s) {
    if (s == "sarcastic" || s == "1") return Label::sarcastic;
    if (s == "non_sarcastic" || s == "0") return Label::non_sarcastic;
    throw ValidationError("unknown label '" + s + "'");
}

ExemplarIndex build_index(std::vector<UtteranceRecord> records) {
    if (records.empty()) throw EmptyIndexError("cannot build an index from zero records");
    const std::size_t dim = records.front().embedding.dim;
    std::unordered_set<std::string> seen;
    for (const auto& r : records) {
        if (r.embedding.dim != dim)
            throw DimensionError("record '" + r.id + "' has dim " +
                                 std::to_string(r.embedding.dim) + ", index dim is " +
                                 std::to_string(dim));
        if (norm(r.embedding) == 0.0)
            throw ValidationError("record '" + r.id + "' has a zero-norm embedding");
        if (!seen.insert(r.id).second) throw DuplicateIdError("duplicate record id '" + r.id + "'");
        if (r.id.empty()) throw ValidationError("empty record id");
    }
    ExemplarIndex index;
    index.dim = dim;
    index.records = std::move(records);
    return index;
}

void save_index(const ExemplarIndex& index, const std::filesystem::path& manifest_path,
                const std::filesystem::path& blob_path) {
    Matrix emb(index.records.size(), index.dim);
    for (std::size_t i = 0; i < index.records.size(); ++i)
        for (std::size_t j = 0; j < index.dim; ++j)
            emb.at(i, j) = index.records[i].embedding.data[j];
    write_file(blob_path, encode_blob(emb));

    nlohmann::json manifest;
    manifest["version"] = index.version;
    manifest["dim"] = index.dim;
    manifest["count"] = index.records.size();
    auto& recs = manifest["records"] = nlohmann::json::array();
    for (std::size_t i = 0; i < index.records.size(); ++i) {
        const auto& r = index.records[i];
        nlohmann::json j;
        j["id"] = r.id;
        j["label"] = to_string(r.label);
        j["row"] = i;
        if (r.text) j["text"] = *r.text;
        if (r.audio_path) j["audio_path"] = *r.audio_path;
        recs.push_back(std::move(j));
    }
    write_file(manifest_path, manifest.dump(2) + "\n");
}

ExemplarIndex load_index(const std::filesystem::path& manifest_path,
                         const std::filesystem::path& blob_path) {
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("manifest " + manifest_path.string() + ": " + e.what());
    }

    const Matrix emb = decode_blob(read_file(blob_path), "blob " + blob_path.string());

    try {
        const auto version = manifest.at("version").get<std::uint32_t>();
        if (version != kVersion)
            throw FormatError("manifest: unsupported version " + std::to_string(version));
        const auto dim = manifest.at("dim").get<std::size_t>();
        const auto count = manifest.at("count").get<std::size_t>();
        if (count != emb.rows || dim != emb.cols)
            throw FormatError("manifest count/dim (" + std::to_string(count) + "x" +
                              std::to_string(dim) + ") does not match blob (" +
                              std::to_string(emb.rows) + "x" + std::to_string(emb.cols) + ")");
        const auto& recs = manifest.at("records");
        if (recs.size() != count) throw FormatError("manifest records length != count");

        std::vector<UtteranceRecord> records;
        records.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            const auto& j = recs.at(i);
            const auto row = j.at("row").get<std::size_t>();
            if (row != i) throw FormatError("record row out of order at position " + std::to_string(i));
            UtteranceRecord r;
            r.id = j.at("id").get<std::string>();
            r.label = parse_label(j.at("label").get<std::string>());
            if (j.contains("text")) r.text = j.at("text").get<std::string>();
            if (j.contains("audio_path")) r.audio_path = j.at("audio_path").get<std::string>();
            std::vector<double> v(emb.data.begin() + static_cast<std::ptrdiff_t>(i * dim),
                                  emb.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
            r.embedding = Vector(std::move(v));
            records.push_back(std::move(r));
        }
        return build_index(std::move(records));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("manifest " + manifest_path.string() + ": " + e.what());
    }
}

void write_blob(const std::filesystem::path& path, const Matrix& m) {
    write_file(path, encode_blob(m));
}

Matrix read_blob(const std::filesystem::path& path) {
    return decode_blob(read_file(path), "blob " + path.string());
}

}  // namespace sartts
