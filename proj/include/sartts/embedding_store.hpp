#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sartts/numerics.hpp"

namespace sartts {

enum class Label { sarcastic, non_sarcastic };

std::string to_string(Label l);
Label parse_label(const std::string& s);

struct UtteranceRecord {
    std::string id;
    Label label = Label::sarcastic;
    std::optional<std::string> text;
    std::optional<std::string> audio_path;
    Vector embedding;

    bool operator==(const UtteranceRecord&) const = default;
};

// The exemplar database: ordered records, all embeddings of dimension `dim`.
// Immutable after construction.
struct ExemplarIndex {
    std::size_t dim = 0;
    std::vector<UtteranceRecord> records;
    std::uint32_t version = 1;

    bool operator==(const ExemplarIndex&) const = default;
};

ExemplarIndex build_index(std::vector<UtteranceRecord> records);

// Persists metadata to a JSON manifest and embeddings to a binary blob.
// Blob layout: magic "SEMB", then u32-LE version(=1), count, dim, then
// count*dim f32-LE values, record-major. Saving the same index twice
// produces byte-identical files.
void save_index(const ExemplarIndex& index, const std::filesystem::path& manifest_path,
                const std::filesystem::path& blob_path);

ExemplarIndex load_index(const std::filesystem::path& manifest_path,
                         const std::filesystem::path& blob_path);

// Raw blob helpers (rows=count, cols=dim). Shared with prosody features
// and fusion parameter serialization.
void write_blob(const std::filesystem::path& path, const Matrix& m);
Matrix read_blob(const std::filesystem::path& path);

}  // namespace sartts
