#pragma once

/** \file textproc.hpp
 *  \brief Tokenization, title normalization and feature hashing.
 *
 * Tokens are maximal runs of letters and digits. Text is decoded as UTF-8;
 * whitespace, ASCII punctuation, the Latin-1 punctuation block, General
 * Punctuation, CJK punctuation and full-width ASCII punctuation separate
 * tokens. Invalid UTF-8 bytes also separate tokens. Lowercasing covers
 * ASCII, Latin-1, basic Greek and basic Cyrillic capitals. No stopwords,
 * no stemming.
 *
 * Feature hashing uses XXH64 with seed 0 (`kFeatureHashName` /
 * `kFeatureHashSeed`). Both are written into model files; a model built
 * with another hash is rejected on load.
 */

#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rmc/error.hpp"

namespace rmc {

inline constexpr std::string_view kFeatureHashName = "xxh64";
inline constexpr std::uint64_t kFeatureHashSeed = 0;

namespace detail {

inline constexpr std::uint64_t kP1 = 11400714785074694791ULL;
inline constexpr std::uint64_t kP2 = 14029467366897019727ULL;
inline constexpr std::uint64_t kP3 = 1609587929392839161ULL;
inline constexpr std::uint64_t kP4 = 9650029242287828579ULL;
inline constexpr std::uint64_t kP5 = 2870177450012600261ULL;

inline std::uint64_t read_le64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline std::uint32_t read_le32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint64_t xxh_round(std::uint64_t acc, std::uint64_t input) {
    acc += input * kP2;
    acc = std::rotl(acc, 31);
    return acc * kP1;
}

inline std::uint64_t xxh_merge(std::uint64_t acc, std::uint64_t val) {
    acc ^= xxh_round(0, val);
    return acc * kP1 + kP4;
}

}  // namespace detail

/// XXH64, byte-order independent.
inline std::uint64_t xxh64(std::string_view data, std::uint64_t seed = 0) {
    using namespace detail;
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    const auto* const end = p + data.size();
    std::uint64_t h = 0;

    if (data.size() >= 32) {
        std::uint64_t v1 = seed + kP1 + kP2;
        std::uint64_t v2 = seed + kP2;
        std::uint64_t v3 = seed;
        std::uint64_t v4 = seed - kP1;
        const auto* const limit = end - 32;
        do {
            v1 = xxh_round(v1, read_le64(p));
            v2 = xxh_round(v2, read_le64(p + 8));
            v3 = xxh_round(v3, read_le64(p + 16));
            v4 = xxh_round(v4, read_le64(p + 24));
            p += 32;
        } while (p <= limit);
        h = std::rotl(v1, 1) + std::rotl(v2, 7) + std::rotl(v3, 12) + std::rotl(v4, 18);
        h = xxh_merge(h, v1);
        h = xxh_merge(h, v2);
        h = xxh_merge(h, v3);
        h = xxh_merge(h, v4);
    } else {
        h = seed + kP5;
    }
    h += static_cast<std::uint64_t>(data.size());

    while (p + 8 <= end) {
        h ^= xxh_round(0, read_le64(p));
        h = std::rotl(h, 27) * kP1 + kP4;
        p += 8;
    }
    if (p + 4 <= end) {
        h ^= static_cast<std::uint64_t>(read_le32(p)) * kP1;
        h = std::rotl(h, 23) * kP2 + kP3;
        p += 4;
    }
    while (p < end) {
        h ^= static_cast<std::uint64_t>(*p) * kP5;
        h = std::rotl(h, 11) * kP1;
        ++p;
    }

    h ^= h >> 33;
    h *= kP2;
    h ^= h >> 29;
    h *= kP3;
    h ^= h >> 32;
    return h;
}

using TokenSequence = std::vector<std::string>;

namespace detail {

constexpr char32_t kInvalid = 0xFFFFFFFF;

// Decodes one code point starting at text[i]; advances i. Returns kInvalid
// for malformed sequences (consuming one byte).
inline char32_t decode_utf8(std::string_view text, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int extra = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        extra = 1;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        extra = 2;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        extra = 3;
        cp = b0 & 0x07;
    } else {
        ++i;
        return kInvalid;
    }
    if (i + static_cast<std::size_t>(extra) >= text.size()) {
        ++i;
        return kInvalid;
    }
    for (int k = 1; k <= extra; ++k) {
        const auto b = static_cast<unsigned char>(text[i + static_cast<std::size_t>(k)]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return kInvalid;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr char32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++i;
        return kInvalid;
    }
    i += static_cast<std::size_t>(extra) + 1;
    return cp;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline bool is_separator(char32_t cp) {
    if (cp == kInvalid) return true;
    if (cp < 0x80) {
        return !((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9'));
    }
    if (cp <= 0xBF) return cp != 0xAA && cp != 0xB5 && cp != 0xBA;
    if (cp == 0xD7 || cp == 0xF7) return true;
    if (cp == 0x1680 || cp == 0xFEFF) return true;
    if (cp >= 0x2000 && cp <= 0x206F) return true;
    if (cp >= 0x2E00 && cp <= 0x2E7F) return true;
    if (cp >= 0x3000 && cp <= 0x303F) return true;
    if (cp >= 0xFE30 && cp <= 0xFE4F) return true;
    if ((cp >= 0xFF00 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
        (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65)) {
        return true;
    }
    return false;
}

inline char32_t to_lower(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
    return cp;
}

}  // namespace detail

inline TokenSequence tokenize(std::string_view text) {
    TokenSequence tokens;
    std::string current;
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t cp = detail::decode_utf8(text, i);
        if (detail::is_separator(cp)) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            detail::append_utf8(current, detail::to_lower(cp));
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

/// Lowercased, punctuation-free, single-space-separated form of a title.
/// Used to match reference titles against paper titles and as the key of
/// reference-title embedding stores.
inline std::string normalize_title(std::string_view title) {
    std::string out;
    for (const auto& token : tokenize(title)) {
        if (!out.empty()) out.push_back(' ');
        out += token;
    }
    return out;
}

constexpr bool is_power_of_two(std::uint64_t v) noexcept { return v >= 2 && std::has_single_bit(v); }

/// Bucket counts sorted by bucket index.
class SparseFeatureVector {
public:
    using Entry = std::pair<std::uint32_t, std::uint32_t>;

    SparseFeatureVector() = default;
    SparseFeatureVector(std::uint32_t dim, std::vector<Entry> entries)
        : dim_(dim), entries_(std::move(entries)) {}

    [[nodiscard]] std::uint32_t dim() const noexcept { return dim_; }
    [[nodiscard]] const std::vector<Entry>& entries() const noexcept { return entries_; }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }

    [[nodiscard]] std::uint64_t total_count() const noexcept {
        std::uint64_t total = 0;
        for (const auto& [bucket, count] : entries_) total += count;
        return total;
    }

    friend bool operator==(const SparseFeatureVector&, const SparseFeatureVector&) = default;

private:
    std::uint32_t dim_ = 0;
    std::vector<Entry> entries_;
};

inline std::uint32_t feature_bucket(std::string_view token, std::uint32_t dim) {
    return static_cast<std::uint32_t>(xxh64(token, kFeatureHashSeed) & (dim - 1));
}

inline SparseFeatureVector hash_features(const TokenSequence& tokens, std::uint32_t dim) {
    if (!is_power_of_two(dim)) throw Error(ErrorCode::BadDim, std::to_string(dim));
    std::map<std::uint32_t, std::uint32_t> counts;
    for (const auto& token : tokens) ++counts[feature_bucket(token, dim)];
    return {dim, {counts.begin(), counts.end()}};
}

}  // namespace rmc
