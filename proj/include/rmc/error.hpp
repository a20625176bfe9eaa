#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rmc {

enum class ErrorCode {
    MalformedRecord,
    DuplicateId,
    UnknownPaper,
    SelfGold,
    BadSplit,
    BadDim,
    EmptyCorpus,
    UnknownDoc,
    MissingVector,
    BadMagic,
    BadVersion,
    TruncatedFile,
    TrailingBytes,
    DimMismatch,
    EmptyReferences,
    ZeroVector,
    ExhaustedPool,
    EmptyGolds,
    BadK,
    EmptySplit,
    IncompatibleModel,
    BindFailure,
    InvalidArgument,
    Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MalformedRecord: return "MalformedRecord";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::UnknownPaper: return "UnknownPaper";
        case ErrorCode::SelfGold: return "SelfGold";
        case ErrorCode::BadSplit: return "BadSplit";
        case ErrorCode::BadDim: return "BadDim";
        case ErrorCode::EmptyCorpus: return "EmptyCorpus";
        case ErrorCode::UnknownDoc: return "UnknownDoc";
        case ErrorCode::MissingVector: return "MissingVector";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::BadVersion: return "BadVersion";
        case ErrorCode::TruncatedFile: return "TruncatedFile";
        case ErrorCode::TrailingBytes: return "TrailingBytes";
        case ErrorCode::DimMismatch: return "DimMismatch";
        case ErrorCode::EmptyReferences: return "EmptyReferences";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::ExhaustedPool: return "ExhaustedPool";
        case ErrorCode::EmptyGolds: return "EmptyGolds";
        case ErrorCode::BadK: return "BadK";
        case ErrorCode::EmptySplit: return "EmptySplit";
        case ErrorCode::IncompatibleModel: return "IncompatibleModel";
        case ErrorCode::BindFailure: return "BindFailure";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure raised by the library. `detail()` carries the offending
/// value (an id, a line number, a path) without the code prefix.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string detail)
        : std::runtime_error(std::string(to_string(code)) + "(" + detail + ")"),
          code_(code),
          detail_(std::move(detail)) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace rmc
