#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ftdf/ensemble.hpp"

namespace ftdf {

inline constexpr std::string_view kModelMagic = "FTDF01";
inline constexpr int kModelFormatVersion = 1;

/// Text serialization; the layout is documented in docs/model_format.md.
/// Output is a pure function of the model, so equal models give equal bytes.
std::string serialize_model(const BaggedEnsemble& model);

/// Throws BadMagic, VersionUnsupported and CorruptModel.
BaggedEnsemble parse_model(std::string_view bytes);

/// Writes via a temporary file and rename. Throws IoError.
void save_model(const BaggedEnsemble& model, const std::filesystem::path& path);
BaggedEnsemble load_model(const std::filesystem::path& path);

}  // namespace ftdf
