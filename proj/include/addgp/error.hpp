#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace addgp {

enum class Errc {
  kNotPositiveDefinite,
  kNotSymmetric,
  kDimensionMismatch,
  kIndexOutOfRange,
  kNonConvergence,
  kKernelKindMismatch,
  kNonFiniteLoss,
  kDomainError,
  kEmptyBuffer,
  kParseError,
  kUnknownLabelValue,
  kMissingColumn,
  kInsufficientRows,
  kSingleClass,
  kInvalidArgument,
  kIoError,
};

inline std::string_view errc_name(Errc code);

// Every failure raised by the library carries one of the codes above so that
// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kNotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::kNotSymmetric: return "NotSymmetric";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kIndexOutOfRange: return "IndexOutOfRange";
    case Errc::kNonConvergence: return "NonConvergence";
    case Errc::kKernelKindMismatch: return "KernelKindMismatch";
    case Errc::kNonFiniteLoss: return "NonFiniteLoss";
    case Errc::kDomainError: return "DomainError";
    case Errc::kEmptyBuffer: return "EmptyBuffer";
    case Errc::kParseError: return "ParseError";
    case Errc::kUnknownLabelValue: return "UnknownLabelValue";
    case Errc::kMissingColumn: return "MissingColumn";
    case Errc::kInsufficientRows: return "InsufficientRows";
    case Errc::kSingleClass: return "SingleClass";
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace addgp
