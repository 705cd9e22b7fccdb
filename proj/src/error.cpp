#include "vecq/error.hpp"

namespace vecq {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid argument";
        case ErrorCode::EmptyInput: return "empty input";
        case ErrorCode::LengthMismatch: return "length mismatch";
        case ErrorCode::ZeroNorm: return "zero norm";
        case ErrorCode::ZeroVariance: return "zero variance";
        case ErrorCode::NonFinite: return "non-finite value";
        case ErrorCode::StaleCache: return "stale cache";
        case ErrorCode::Io: return "i/o error";
        case ErrorCode::BadMagic: return "bad magic";
        case ErrorCode::UnsupportedDtype: return "unsupported dtype";
        case ErrorCode::TruncatedPayload: return "truncated payload";
        case ErrorCode::CrcMismatch: return "crc mismatch";
        case ErrorCode::MalformedJson: return "malformed json";
        case ErrorCode::CorruptDataset: return "corrupt dataset";
    }
    return "unknown";
}

}  // namespace vecq
