#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "genreg/features.hpp"
#include "genreg/io_error.hpp"

namespace genreg {

// FIF1 layout (all little-endian):
//   bytes 0-3   "FIF1"
//   bytes 4-7   uint32 version (= 1)
//   bytes 8-11  uint32 V   (views; 1 for geometric fields)
//   bytes 12-15 uint32 N   (points)
//   bytes 16-19 uint32 d   (descriptor dimension)
//   then V·N·d float32, view-major, row-major within a view.
// Sidecar `<file>.json`: {"branch": "img"|"geo", "K": int (img only), "d": int,
//                         "source_model": string}

inline constexpr std::uint32_t kFeatureFormatVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 20;

class FeatureFileError : public IoError {
 public:
  enum class Kind { Io, BadMagic, VersionMismatch, Truncated, DimensionOverflow, DimensionMismatch, Sidecar };

  FeatureFileError(Kind kind, const std::string& what) : IoError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct FeatureSidecar {
  std::string branch;     // "img" or "geo"
  std::optional<int> k;   // image branch only
  int d = 0;
  std::string source_model;
};

struct FeatureFile {
  std::optional<FeatureSidecar> sidecar;  // absent when no `<file>.json` exists
  std::vector<FeatureField> views;
};

std::filesystem::path sidecar_path(const std::filesystem::path& feature_path);

void write_features(const std::filesystem::path& path, const FeatureField& field,
                    const std::string& source_model = "unknown");
void write_features(const std::filesystem::path& path, const ViewFeatureStack& stack,
                    const std::string& source_model = "unknown");

/// Reads the binary payload and, if present, the sidecar; validates one against the other.
FeatureFile read_features(const std::filesystem::path& path);

/// Requires V = 1.
FeatureField read_feature_field(const std::filesystem::path& path);
/// K from the sidecar when present, otherwise √V (which must be an integer).
ViewFeatureStack read_view_stack(const std::filesystem::path& path);

}  // namespace genreg
