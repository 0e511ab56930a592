#include <fstream>

#include <doctest.h>

#include "helpers.hpp"
#include "sartts/embedding_store.hpp"
#include "sartts/errors.hpp"

using namespace sartts;

namespace {

UtteranceRecord rec(const std::string& id, std::vector<double> emb,
                    Label label = Label::sarcastic) {
    UtteranceRecord r;
    r.id = id;
    r.label = label;
    r.embedding = Vector(std::move(emb));
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("build_index contract") {
    CHECK_THROWS_AS(build_index({}), EmptyIndexError);

    const ExemplarIndex idx = build_index({rec("a", {1.0, 2.0})});
    CHECK(idx.dim == 2);
    CHECK(idx.records.size() == 1);

    CHECK_THROWS_AS(build_index({rec("a", {1, 2}), rec("b", {1, 2, 3})}), DimensionError);
    CHECK_THROWS_AS(build_index({rec("a", {1, 2}), rec("a", {3, 4})}), DuplicateIdError);
    CHECK_THROWS_AS(build_index({rec("z", {0.0, 0.0})}), ValidationError);
}

TEST_CASE("build_index preserves record order") {
    std::vector<UtteranceRecord> records;
    for (int i = 0; i < 10; ++i) records.push_back(rec("r" + std::to_string(i), {1.0, double(i)}));
    const ExemplarIndex idx = build_index(records);
    for (int i = 0; i < 10; ++i) CHECK(idx.records[i].id == "r" + std::to_string(i));
}

TEST_CASE("save/load round trip is the identity") {
    const auto dir = testutil::tmp_dir("store_roundtrip");
    auto r1 = rec("u1", {1.0, -0.5}, Label::sarcastic);
    r1.text = "oh great, another meeting";
    r1.audio_path = "u1.wav";
    const ExemplarIndex idx = build_index({r1, rec("u2", {0.25, 0.75}, Label::non_sarcastic)});

    save_index(idx, dir / "m.json", dir / "e.semb");
    const ExemplarIndex back = load_index(dir / "m.json", dir / "e.semb");
    CHECK(back == idx);

    // rewriting produces byte-identical files
    save_index(back, dir / "m2.json", dir / "e2.semb");
    CHECK(slurp(dir / "m.json") == slurp(dir / "m2.json"));
    CHECK(slurp(dir / "e.semb") == slurp(dir / "e2.semb"));
}

TEST_CASE("blob byte layout for a single dim-2 record") {
    const auto dir = testutil::tmp_dir("store_layout");
    save_index(build_index({rec("only", {1.0, 2.0})}), dir / "m.json", dir / "e.semb");
    const std::string bytes = slurp(dir / "e.semb");
    const unsigned char expect[] = {0x53, 0x45, 0x4D, 0x42, 0x01, 0x00, 0x00, 0x00,
                                    0x01, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00,
                                    0x00, 0x00, 0x80, 0x3F, 0x00, 0x00, 0x00, 0x40};
    REQUIRE(bytes.size() == sizeof(expect));
    for (std::size_t i = 0; i < sizeof(expect); ++i)
        CHECK(static_cast<unsigned char>(bytes[i]) == expect[i]);
}

TEST_CASE("load rejects malformed files") {
    const auto dir = testutil::tmp_dir("store_malformed");
    const ExemplarIndex idx = build_index({rec("a", {1, 2}), rec("b", {3, 4})});
    save_index(idx, dir / "m.json", dir / "e.semb");
    const std::string good = slurp(dir / "e.semb");

    SUBCASE("bad magic") {
        std::string bad = good;
        bad[0] = 'X';
        std::ofstream(dir / "bad.semb", std::ios::binary) << bad;
        CHECK_THROWS_AS(load_index(dir / "m.json", dir / "bad.semb"), FormatError);
    }

    SUBCASE("count mismatch between manifest and blob") {
        const auto one = build_index({rec("a", {1, 2})});
        save_index(one, dir / "one.json", dir / "one.semb");
        CHECK_THROWS_AS(load_index(dir / "m.json", dir / "one.semb"), FormatError);
    }

    SUBCASE("any single corrupted header byte is rejected") {
        for (std::size_t byte = 0; byte < 16; ++byte) {
            std::string bad = good;
            bad[byte] = static_cast<char>(bad[byte] ^ 0x5A);
            std::ofstream(dir / "fuzz.semb", std::ios::binary) << bad;
            CHECK_THROWS_AS(load_index(dir / "m.json", dir / "fuzz.semb"), FormatError);
        }
    }

    SUBCASE("missing files") {
        CHECK_THROWS_AS(load_index(dir / "nope.json", dir / "e.semb"), IoError);
        CHECK_THROWS_AS(load_index(dir / "m.json", dir / "nope.semb"), IoError);
    }
}

TEST_CASE("save_index reports unwritable paths") {
    const ExemplarIndex idx = build_index({rec("a", {1, 2})});
    CHECK_THROWS_AS(save_index(idx, "/nonexistent_dir_xyz/m.json", "/nonexistent_dir_xyz/e.semb"),
                    IoError);
}

TEST_CASE("raw blob round trip") {
    const auto dir = testutil::tmp_dir("store_rawblob");
    const Matrix m(3, 2, {0.5, -1.5, 2.0, 0.0, -0.25, 4.0});
    write_blob(dir / "m.semb", m);
    CHECK(read_blob(dir / "m.semb") == m);
}
