#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "rmc/embedder.hpp"
#include "rmc/serialization.hpp"

using namespace rmc;

namespace {

// 4 x 2 projection with distinct rows
ShallowModel tiny() {
    ShallowModel m(4, 2);
    const double w[] = {1, 2, 10, 20, 100, 200, 1000, 2000};
    std::copy(std::begin(w), std::end(w), m.weights().begin());
    return m;
}

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Io;  // no throw
}

std::string to_bytes(const EmbeddingStore& s) {
    std::ostringstream out;
    write_store(s, out);
    return out.str();
}

std::string to_bytes(const ShallowModel& m) {
    std::ostringstream out;
    write_model(m, out);
    return out.str();
}

EmbeddingStore random_store(Rng& rng) {
    EmbeddingStore s(static_cast<std::uint32_t>(1 + rng.uniform_index(16)));
    const auto n = rng.uniform_index(20);
    for (std::uint64_t i = 0; i < n; ++i) {
        std::vector<float> v(s.dim());
        for (auto& x : v) x = static_cast<float>(rng.uniform(-1e3, 1e3));
        if (rng.uniform01() < 0.1) v[0] = -0.0f;
        s.insert("id-" + std::to_string(i) + (rng.uniform01() < 0.3 ? "-\xC3\xA9" : ""), std::span<const float>(v));
    }
    return s;
}

}  // namespace

TEST_CASE("shallow_embed sums weighted rows", "[embedder]") {
    const auto m = tiny();
    // "alpha" hashes to bucket 0 and "graph" to bucket 2 at dim 4
    REQUIRE(feature_bucket("alpha", 4) == 0);
    REQUIRE(feature_bucket("graph", 4) == 2);
    REQUIRE(feature_bucket("edge", 4) == 1);
    const std::string_view fields[] = {"alpha graph", "Graph"};
    CHECK(shallow_embed(m, fields) == Vector{1 + 2 * 100, 2 + 2 * 200});
    CHECK(shallow_embed(m, SparseFeatureVector(4, {{0, 1}, {2, 2}})) == Vector{201, 402});
}

TEST_CASE("shallow_embed degenerate inputs", "[embedder]") {
    const auto m = tiny();
    const std::string_view empty[] = {""};
    CHECK(shallow_embed(m, empty) == Vector{0, 0});
    const ShallowModel zero(8, 3);
    const std::string_view text[] = {"anything at all"};
    CHECK(shallow_embed(zero, text) == Vector{0, 0, 0});
    CHECK(code_of([&] { (void)shallow_embed(m, SparseFeatureVector(8, {{0, 1}})); }) == ErrorCode::DimMismatch);
    CHECK(code_of([] { ShallowModel bad(6, 2); }) == ErrorCode::BadDim);
    CHECK(code_of([] { ShallowModel bad(8, 0); }) == ErrorCode::BadDim);
}

TEST_CASE("shallow provider scopes inputs", "[embedder]") {
    const auto m = tiny();
    const ShallowProvider p(m);
    CHECK(p.dim() == 2);
    PaperRecord rec{"p", "alpha", "graph graph", {"edge"}, {}, {}, {}};
    CHECK(p.content(rec) == Vector{201, 402});
    CHECK(p.reference_title("edge") == Vector{10, 20});
    CHECK(p.reference_title("edge") == p.reference_title("edge"));
    // the title alone, never the abstract, feeds reference embeddings
    CHECK(p.reference_title("alpha") == Vector{1, 2});
}

TEST_CASE("shallow_embed is additive over feature multisets", "[embedder][property]") {
    const auto m = ShallowModel::random(64, 5, 1);
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        TokenSequence a, b;
        for (auto k = rng.uniform_index(10); k > 0; --k) a.push_back("t" + std::to_string(rng.uniform_index(30)));
        for (auto k = rng.uniform_index(10); k > 0; --k) b.push_back("t" + std::to_string(rng.uniform_index(30)));
        TokenSequence ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        const auto va = shallow_embed(m, hash_features(a, 64));
        const auto vb = shallow_embed(m, hash_features(b, 64));
        const auto vab = shallow_embed(m, hash_features(ab, 64));
        for (std::size_t j = 0; j < vab.size(); ++j) CHECK(std::abs(vab[j] - (va[j] + vb[j])) <= 1e-12);
    }
}

TEST_CASE("random init is seeded and bounded", "[embedder]") {
    const auto a = ShallowModel::random(256, 4, 9);
    const auto b = ShallowModel::random(256, 4, 9);
    const auto c = ShallowModel::random(256, 4, 10);
    CHECK(std::equal(a.weights().begin(), a.weights().end(), b.weights().begin()));
    CHECK_FALSE(std::equal(a.weights().begin(), a.weights().end(), c.weights().begin()));
    for (const double w : a.weights()) CHECK(std::abs(w) <= 1.0 / 16.0);
}

TEST_CASE("embedding store lookups and errors", "[embedder][store]") {
    EmbeddingStore s(3);
    s.insert("a", std::vector<double>{1, 2, 3});
    CHECK(s.get("a") == Vector{1, 2, 3});
    CHECK(code_of([&] { (void)s.get("zzz"); }) == ErrorCode::MissingVector);
    CHECK(code_of([&] { s.insert("b", std::vector<double>{1, 2}); }) == ErrorCode::DimMismatch);
    CHECK(code_of([&] { s.insert("a", std::vector<double>{1, 2, 3}); }) == ErrorCode::DuplicateId);
    CHECK(code_of([&] { s.insert("n", std::vector<double>{1, std::nan(""), 3}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("store provider", "[embedder][store]") {
    EmbeddingStore content(2), refs(2);
    content.insert("p", std::vector<double>{0.5, -1});
    refs.insert(normalize_title("Deep  Learning!"), std::vector<double>{3, 4});
    const StoreProvider p(content, refs);
    CHECK(p.dim() == 2);
    CHECK(p.content(PaperRecord{"p", "whatever", "", {}, {}, {}, {}}) == Vector{0.5, -1});
    CHECK(p.reference_title("deep learning") == Vector{3, 4});
    CHECK(code_of([&] { (void)p.content(PaperRecord{"q", "t", "", {}, {}, {}, {}}); }) == ErrorCode::MissingVector);
    CHECK(code_of([&] { (void)p.reference_title("unknown"); }) == ErrorCode::MissingVector);
    EmbeddingStore wide(3);
    wide.insert("x", std::vector<double>{1, 2, 3});
    CHECK(code_of([&] { StoreProvider bad(content, wide); }) == ErrorCode::DimMismatch);
}

TEST_CASE("store file layout", "[embedder][store][format]") {
    EmbeddingStore s(1);
    s.insert("ab", std::vector<float>{1.0f});
    const auto bytes = to_bytes(s);
    const std::string expected("RMCE"
                               "\x01\x00\x00\x00"
                               "\x01\x00\x00\x00"
                               "\x01\x00\x00\x00\x00\x00\x00\x00"
                               "\x02\x00"
                               "ab"
                               "\x00\x00\x80\x3f",
                               4 + 4 + 4 + 8 + 2 + 2 + 4);
    CHECK(bytes == expected);
}

TEST_CASE("store round trips are byte identical", "[embedder][store][roundtrip][property]") {
    Rng rng(77);
    for (int i = 0; i < 100; ++i) {
        const auto s = random_store(rng);
        const auto bytes = to_bytes(s);
        const auto back = parse_store(bytes);
        CHECK(back == s);
        CHECK(to_bytes(back) == bytes);
    }
}

TEST_CASE("corrupt store files are rejected", "[embedder][store][errors]") {
    EmbeddingStore s(2);
    s.insert("a", std::vector<double>{1, 2});
    s.insert("b", std::vector<double>{3, 4});
    const auto bytes = to_bytes(s);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK(code_of([&] { (void)parse_store(bad_magic); }) == ErrorCode::BadMagic);
    auto bad_version = bytes;
    bad_version[4] = 2;
    CHECK(code_of([&] { (void)parse_store(bad_version); }) == ErrorCode::BadVersion);
    for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
        const auto code = code_of([&] { (void)parse_store(std::string_view(bytes).substr(0, cut)); });
        CHECK((code == ErrorCode::TruncatedFile || code == ErrorCode::BadMagic));
    }
    CHECK(code_of([&] { (void)parse_store(bytes + "x"); }) == ErrorCode::TrailingBytes);
    CHECK(code_of([&] { (void)parse_store(bytes, 3); }) == ErrorCode::DimMismatch);
}

TEST_CASE("model round trips and header checks", "[embedder][model][roundtrip]") {
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        const auto m = ShallowModel::random(1U << (1 + rng.uniform_index(6)),
                                            static_cast<std::uint32_t>(1 + rng.uniform_index(8)), rng.next());
        const auto bytes = to_bytes(m);
        const auto back = parse_model(bytes);
        CHECK(back.feature_dim() == m.feature_dim());
        CHECK(to_bytes(back) == bytes);
    }

    const auto bytes = to_bytes(tiny());
    // header: magic, version, F, D, name length, "xxh64", seed
    CHECK(bytes.substr(0, 4) == "RMCM");
    CHECK(bytes.substr(18, 5) == "xxh64");
    CHECK(bytes.size() == 4 + 4 + 4 + 4 + 2 + 5 + 8 + 4 * 2 * 4);

    auto other_hash = bytes;
    other_hash[18] = 'm';
    CHECK(code_of([&] { (void)parse_model(other_hash); }) == ErrorCode::IncompatibleModel);
    auto other_seed = bytes;
    other_seed[23] = 1;
    CHECK(code_of([&] { (void)parse_model(other_seed); }) == ErrorCode::IncompatibleModel);
    CHECK(code_of([&] { (void)parse_model(bytes.substr(0, bytes.size() - 1)); }) == ErrorCode::TruncatedFile);
    CHECK(code_of([&] { (void)parse_model(bytes + std::string(1, '\0')); }) == ErrorCode::TrailingBytes);
}

TEST_CASE("save and load through files", "[embedder][io]") {
    const auto dir = std::filesystem::temp_directory_path() / "rmc_test_embedder";
    std::filesystem::create_directories(dir);
    const auto m = ShallowModel::random(32, 3, 4);
    save_model(m, (dir / "m.bin").string());
    CHECK(to_bytes(load_model((dir / "m.bin").string())) == to_bytes(m));
    EmbeddingStore s(2);
    s.insert("x", std::vector<double>{0.25, 8});
    save_store(s, (dir / "s.bin").string());
    CHECK(load_store((dir / "s.bin").string()) == s);
    CHECK(code_of([&] { (void)load_store((dir / "missing.bin").string()); }) == ErrorCode::Io);
    std::filesystem::remove_all(dir);
}
