#include "ftdf/error.hpp"

namespace ftdf {

std::string_view errc_name(Errc code) {
    switch (code) {
        case Errc::FileNotFound: return "FileNotFound";
        case Errc::MalformedRow: return "MalformedRow";
        case Errc::NonFiniteSample: return "NonFiniteSample";
        case Errc::EmptyTrace: return "EmptyTrace";
        case Errc::InvalidFactor: return "InvalidFactor";
        case Errc::InvalidDuration: return "InvalidDuration";
        case Errc::InvalidManifest: return "InvalidManifest";
        case Errc::TraceTooShort: return "TraceTooShort";
        case Errc::InvalidOverlap: return "InvalidOverlap";
        case Errc::InvalidWindow: return "InvalidWindow";
        case Errc::IndexOutOfRange: return "IndexOutOfRange";
        case Errc::DegenerateSignal: return "DegenerateSignal";
        case Errc::InvalidArOrder: return "InvalidArOrder";
        case Errc::InsufficientData: return "InsufficientData";
        case Errc::LagOutOfRange: return "LagOutOfRange";
        case Errc::PlanMismatch: return "PlanMismatch";
        case Errc::TooFewWindows: return "TooFewWindows";
        case Errc::InvalidFusionConfig: return "InvalidFusionConfig";
        case Errc::EmptyCounts: return "EmptyCounts";
        case Errc::EmptyDataset: return "EmptyDataset";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::KTooLarge: return "KTooLarge";
        case Errc::UnknownLabel: return "UnknownLabel";
        case Errc::IoError: return "IoError";
        case Errc::BadMagic: return "BadMagic";
        case Errc::VersionUnsupported: return "VersionUnsupported";
        case Errc::CorruptModel: return "CorruptModel";
        case Errc::ClassTooSmall: return "ClassTooSmall";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::TooFewPerClass: return "TooFewPerClass";
        case Errc::InvalidConfig: return "InvalidConfig";
        case Errc::InvalidSpec: return "InvalidSpec";
    }
    return "Unknown";
}

ErrorFamily family_of(Errc code) {
    switch (code) {
        case Errc::InvalidConfig:
        case Errc::InvalidSpec:
        case Errc::InvalidOverlap:
        case Errc::InvalidWindow:
        case Errc::InvalidFactor:
        case Errc::InvalidDuration:
        case Errc::InvalidArOrder:
        case Errc::InvalidFusionConfig:
        case Errc::KTooLarge:
            return ErrorFamily::Config;
        case Errc::ShapeMismatch:
        case Errc::IoError:
        case Errc::BadMagic:
        case Errc::VersionUnsupported:
        case Errc::CorruptModel:
        case Errc::UnknownLabel:
            return ErrorFamily::Model;
        default:
            return ErrorFamily::Data;
    }
}

Error::Error(Errc code, const std::string& message, std::optional<std::size_t> position)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message),
      code_(code),
      position_(position) {}

}  // namespace ftdf
