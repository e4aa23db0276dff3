#include "defsim/hashing.hpp"

#include <array>

#include "defsim/error.hpp"

namespace defsim {

std::string to_hex(std::uint64_t value) {
  static constexpr std::array<char, 16> kDigits = {'0', '1', '2', '3', '4', '5', '6', '7',
                                                   '8', '9', 'a', 'b', 'c', 'd', 'e', 'f'};
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xfU];
    value >>= 4;
  }
  return out;
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kUnknownId: return "UnknownId";
    case ErrorCode::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kMissingVector: return "MissingVector";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kMalformedFile: return "MalformedFile";
    case ErrorCode::kModelMismatch: return "ModelMismatch";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kUnknownCandidate: return "UnknownCandidate";
    case ErrorCode::kEmptyReferenceSet: return "EmptyReferenceSet";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace defsim
