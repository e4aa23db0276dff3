#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace defsim {

enum class ErrorCode {
  kMalformedRecord,
  kDuplicateId,
  kEmptyCorpus,
  kUnknownId,
  kProviderUnavailable,
  kDimensionMismatch,
  kMissingVector,
  kZeroVector,
  kMalformedFile,
  kModelMismatch,
  kEmptySet,
  kUnknownCandidate,
  kEmptyReferenceSet,
  kMalformedResponse,
  kInvalidArgument,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// CLI and tests can branch on the kind rather than on message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace defsim
