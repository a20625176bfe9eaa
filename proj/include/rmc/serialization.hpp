#pragma once

/** \file serialization.hpp
 *  \brief Binary embedding-store and model files.
 *
 * All integers and floats are little-endian.
 *
 * Embedding store:
 *   "RMCE" | u32 version (1) | u32 dim | u64 count |
 *   count x ( u16 id_len | id bytes (UTF-8) | dim x f32 )
 *
 * Model:
 *   "RMCM" | u32 version (1) | u32 feature_dim | u32 embed_dim |
 *   u16 hash_name_len | hash name | u64 hash seed |
 *   feature_dim x embed_dim f32, row-major
 *
 * Model weights are held as double in memory and narrowed to f32 on save,
 * so save -> load -> save is byte-identical.
 */

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "rmc/embedder.hpp"
#include "rmc/error.hpp"
#include "rmc/textproc.hpp"

namespace rmc {

inline constexpr std::string_view kStoreMagic = "RMCE";
inline constexpr std::string_view kModelMagic = "RMCM";
inline constexpr std::uint32_t kFormatVersion = 1;

namespace detail {

class ByteWriter {
public:
    explicit ByteWriter(std::ostream& out) : out_(out) {}

    void bytes(std::string_view s) { out_.write(s.data(), static_cast<std::streamsize>(s.size())); }

    template <typename T>
    void uint(T v) {
        char buf[sizeof(T)];
        for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
        out_.write(buf, sizeof(T));
    }

    void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }

private:
    std::ostream& out_;
};

class ByteReader {
public:
    explicit ByteReader(std::string_view data) : data_(data) {}

    std::string_view bytes(std::size_t n) {
        require(n);
        const auto out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    template <typename T>
    T uint() {
        require(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<T>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(T);
        return v;
    }

    float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }

    [[nodiscard]] std::size_t remaining() const noexcept { return data_.size() - pos_; }

    void require(std::size_t n) const {
        if (remaining() < n) {
            throw Error(ErrorCode::TruncatedFile, "need " + std::to_string(n) + " bytes at offset " +
                                                      std::to_string(pos_) + ", have " + std::to_string(remaining()));
        }
    }

private:
    std::string_view data_;
    std::size_t pos_ = 0;
};

inline std::string read_all(std::istream& in) {
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    return read_all(in);
}

inline void check_header(ByteReader& r, std::string_view magic) {
    if (r.remaining() < magic.size() || r.bytes(magic.size()) != magic) {
        throw Error(ErrorCode::BadMagic, "expected " + std::string(magic));
    }
    const auto version = r.uint<std::uint32_t>();
    if (version != kFormatVersion) throw Error(ErrorCode::BadVersion, std::to_string(version));
}

}  // namespace detail

inline void write_store(const EmbeddingStore& store, std::ostream& out) {
    if (store.dim() == 0) throw Error(ErrorCode::BadDim, "store dim 0");
    detail::ByteWriter w(out);
    w.bytes(kStoreMagic);
    w.uint<std::uint32_t>(kFormatVersion);
    w.uint<std::uint32_t>(store.dim());
    w.uint<std::uint64_t>(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        const auto& id = store.ids()[i];
        w.uint<std::uint16_t>(static_cast<std::uint16_t>(id.size()));
        w.bytes(id);
        for (const float x : store.row(i)) w.f32(x);
    }
}

/// `expected_dim` of 0 accepts any dimension.
inline EmbeddingStore parse_store(std::string_view data, std::uint32_t expected_dim = 0) {
    detail::ByteReader r(data);
    detail::check_header(r, kStoreMagic);
    const auto dim = r.uint<std::uint32_t>();
    if (dim == 0) throw Error(ErrorCode::BadDim, "store dim 0");
    if (expected_dim != 0 && dim != expected_dim) {
        throw Error(ErrorCode::DimMismatch, std::to_string(dim) + " != " + std::to_string(expected_dim));
    }
    const auto count = r.uint<std::uint64_t>();
    EmbeddingStore store(dim);
    std::vector<float> row(dim);
    for (std::uint64_t n = 0; n < count; ++n) {
        const auto len = r.uint<std::uint16_t>();
        std::string id(r.bytes(len));
        r.require(static_cast<std::size_t>(dim) * 4);
        for (auto& x : row) x = r.f32();
        store.insert(std::move(id), std::span<const float>(row));
    }
    if (r.remaining() != 0) throw Error(ErrorCode::TrailingBytes, std::to_string(r.remaining()));
    return store;
}

inline void save_store(const EmbeddingStore& store, const std::string& path) {
    std::ostringstream buf;
    write_store(store, buf);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out << buf.str();
    if (!out) throw Error(ErrorCode::Io, "write failed " + path);
}

inline EmbeddingStore load_store(const std::string& path, std::uint32_t expected_dim = 0) {
    return parse_store(detail::read_file(path), expected_dim);
}

inline void write_model(const ShallowModel& model, std::ostream& out) {
    detail::ByteWriter w(out);
    w.bytes(kModelMagic);
    w.uint<std::uint32_t>(kFormatVersion);
    w.uint<std::uint32_t>(model.feature_dim());
    w.uint<std::uint32_t>(model.embed_dim());
    w.uint<std::uint16_t>(static_cast<std::uint16_t>(kFeatureHashName.size()));
    w.bytes(kFeatureHashName);
    w.uint<std::uint64_t>(kFeatureHashSeed);
    for (const double x : model.weights()) w.f32(static_cast<float>(x));
}

inline ShallowModel parse_model(std::string_view data) {
    detail::ByteReader r(data);
    detail::check_header(r, kModelMagic);
    const auto feature_dim = r.uint<std::uint32_t>();
    const auto embed_dim = r.uint<std::uint32_t>();
    const auto name_len = r.uint<std::uint16_t>();
    const auto hash_name = r.bytes(name_len);
    const auto hash_seed = r.uint<std::uint64_t>();
    if (hash_name != kFeatureHashName || hash_seed != kFeatureHashSeed) {
        throw Error(ErrorCode::IncompatibleModel,
                    "model hashes with " + std::string(hash_name) + "/seed " + std::to_string(hash_seed));
    }
    if (!is_power_of_two(feature_dim) || embed_dim == 0) {
        throw Error(ErrorCode::BadDim, std::to_string(feature_dim) + "x" + std::to_string(embed_dim));
    }
    r.require(static_cast<std::size_t>(feature_dim) * embed_dim * 4);
    ShallowModel model(feature_dim, embed_dim);
    for (auto& x : model.weights()) x = r.f32();
    if (r.remaining() != 0) throw Error(ErrorCode::TrailingBytes, std::to_string(r.remaining()));
    return model;
}

inline void save_model(const ShallowModel& model, const std::string& path) {
    std::ostringstream buf;
    write_model(model, buf);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out << buf.str();
    if (!out) throw Error(ErrorCode::Io, "write failed " + path);
}

inline ShallowModel load_model(const std::string& path) { return parse_model(detail::read_file(path)); }

}  // namespace rmc
