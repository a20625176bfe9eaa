#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "rmc/rng.hpp"
#include "rmc/textproc.hpp"

using rmc::TokenSequence;

TEST_CASE("tokenize lowercases and splits on whitespace", "[textproc]") {
    CHECK(rmc::tokenize("Attention Is All You Need") == TokenSequence{"attention", "is", "all", "you", "need"});
    CHECK(rmc::tokenize("").empty());
    CHECK(rmc::tokenize("   \t\n ").empty());
}

TEST_CASE("tokenize splits on punctuation", "[textproc]") {
    CHECK(rmc::tokenize("BM25-based, fast!") == TokenSequence{"bm25", "based", "fast"});
    CHECK(rmc::tokenize("a.b/c:d") == TokenSequence{"a", "b", "c", "d"});
}

TEST_CASE("tokenize handles non-ASCII text", "[textproc]") {
    // U+2014 em dash and U+00A0 no-break space separate; accented capitals lowercase
    CHECK(rmc::tokenize("Caf\xC3\x89\xE2\x80\x94na\xC3\xAFve\xC2\xA0X") == TokenSequence{"caf\xC3\xA9", "na\xC3\xAFve", "x"});
    // Greek capital alpha -> small alpha
    CHECK(rmc::tokenize("\xCE\x91\xCE\xB2") == TokenSequence{"\xCE\xB1\xCE\xB2"});
    // stray continuation byte acts as a separator
    CHECK(rmc::tokenize("ab\x80" "cd") == TokenSequence{"ab", "cd"});
    // truncated multi-byte sequence at the end
    CHECK(rmc::tokenize("ab\xC3") == TokenSequence{"ab"});
}

TEST_CASE("normalize_title collapses case, spacing and punctuation", "[textproc]") {
    CHECK(rmc::normalize_title("  Deep   Learning: A Survey. ") == "deep learning a survey");
    CHECK(rmc::normalize_title("deep learning - a survey") == "deep learning a survey");
}

TEST_CASE("xxh64 matches reference digests", "[textproc][hash]") {
    // Frozen from the reference xxhash implementation (python-xxhash).
    CHECK(rmc::xxh64("", 0) == 0xef46db3751d8e999ULL);
    CHECK(rmc::xxh64("a", 0) == 0xd24ec4f1a98c6e5bULL);
    CHECK(rmc::xxh64("abc", 0) == 0x44bc2cf5ad770999ULL);
    CHECK(rmc::xxh64("abc", 12345) == 0x01700e64f6f23509ULL);
    CHECK(rmc::xxh64("0123456789abcdefghijklmnopqrstuvwxyz", 0) == 0x69196c1b3af0bff9ULL);
    std::string hundred;
    for (int i = 0; i < 100; ++i) hundred.push_back(static_cast<char>(i));
    CHECK(rmc::xxh64(hundred, 0) == 0x6ac1e58032166597ULL);
}

TEST_CASE("hash_features edge cases", "[textproc]") {
    CHECK(rmc::hash_features({}, 16).empty());

    const auto twice = rmc::hash_features({"x", "x"}, 16);
    REQUIRE(twice.entries().size() == 1);
    CHECK(twice.entries()[0].second == 2);

    // Oracle: xxh64("a") % 4 == 3 and xxh64("b") % 4 == 3, so the pair collides.
    const auto dim4 = rmc::hash_features({"a", "b"}, 4);
    CHECK(dim4.entries() == std::vector<rmc::SparseFeatureVector::Entry>{{3, 2}});
    // In 1024 buckets they separate: 603 and 923.
    const auto dim1024 = rmc::hash_features({"a", "b"}, 1024);
    CHECK(dim1024.entries() == std::vector<rmc::SparseFeatureVector::Entry>{{603, 1}, {923, 1}});
}

TEST_CASE("hash_features rejects dims that are not powers of two", "[textproc]") {
    for (const std::uint32_t dim : {0U, 1U, 3U, 6U, 1000U}) {
        try {
            (void)rmc::hash_features({"a"}, dim);
            FAIL("expected BadDim");
        } catch (const rmc::Error& e) {
            CHECK(e.code() == rmc::ErrorCode::BadDim);
        }
    }
}

TEST_CASE("hash_features is pure and conserves token count", "[textproc][property]") {
    rmc::Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        TokenSequence tokens;
        const auto n = rng.uniform_index(60);
        for (std::uint64_t i = 0; i < n; ++i) tokens.push_back("t" + std::to_string(rng.uniform_index(40)));
        const std::uint32_t dim = 1U << (1 + rng.uniform_index(12));
        const auto a = rmc::hash_features(tokens, dim);
        const auto b = rmc::hash_features(tokens, dim);
        CHECK(a == b);
        CHECK(a.total_count() == tokens.size());
        for (const auto& [bucket, count] : a.entries()) {
            CHECK(bucket < dim);
            CHECK(count >= 1);
        }
    }
}
