#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace syncstab {

enum class ErrorCode {
    ConfigSyntax,
    ConfigInvalid,
    SingularInterior,
    NotPositiveDefinite,
    PfDiverged,
    PfVoltageOutOfBand,
    DegenerateFreq,
    EigpairMismatch,
    AlgebraicLoopSingular,
    MixedPllGains,
    UnknownConverter,
    UnknownCase,
    InvalidArgument,
};

/// Stable machine-readable name, e.g. "SINGULAR_INTERIOR".
std::string_view to_string(ErrorCode code) noexcept;

/// Every recoverable failure in the library surfaces as this exception.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace syncstab
