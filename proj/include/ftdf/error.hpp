#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ftdf {

enum class Errc {
    // ingest
    FileNotFound,
    MalformedRow,
    NonFiniteSample,
    EmptyTrace,
    InvalidFactor,
    InvalidDuration,
    InvalidManifest,
    // windowing
    TraceTooShort,
    InvalidOverlap,
    InvalidWindow,
    IndexOutOfRange,
    // descriptors
    DegenerateSignal,
    InvalidArOrder,
    // fusion
    InsufficientData,
    LagOutOfRange,
    PlanMismatch,
    TooFewWindows,
    InvalidFusionConfig,
    // classify
    EmptyCounts,
    EmptyDataset,
    ShapeMismatch,
    KTooLarge,
    UnknownLabel,
    // model files
    IoError,
    BadMagic,
    VersionUnsupported,
    CorruptModel,
    // eval
    ClassTooSmall,
    LengthMismatch,
    TooFewPerClass,
    // cli
    InvalidConfig,
    InvalidSpec,
};

/// Coarse grouping used by the command-line front end to pick an exit code.
enum class ErrorFamily { Config, Data, Model };

std::string_view errc_name(Errc code);
ErrorFamily family_of(Errc code);

/// The single exception type thrown by the library. `position` carries a
/// line number, sample index or window index when the error has one.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message,
          std::optional<std::size_t> position = std::nullopt);

    Errc code() const noexcept { return code_; }
    ErrorFamily family() const noexcept { return family_of(code_); }
    std::optional<std::size_t> position() const noexcept { return position_; }

private:
    Errc code_;
    std::optional<std::size_t> position_;
};

}  // namespace ftdf
