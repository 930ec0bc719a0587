#pragma once

// Dataset manifests: CSV with header `path,identity,label`, label spoof or
// bonafide. Relative paths resolve against the manifest's directory.

#include <filesystem>
#include <string>
#include <vector>

#include "chromafool/image.hpp"
#include "chromafool/oracle.hpp"

namespace chromafool {

struct ManifestEntry {
  std::string path;  // as written in the file
  std::string identity;
  Label label = Label::Spoofing;

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> entries;

  std::filesystem::path resolve(const ManifestEntry& e) const;
  // Image id used in reports: the path without directory and extension.
  static std::string image_id(const ManifestEntry& e);
  // Throws FormatError on duplicate paths or empty identities.
  void validate() const;
};

std::string to_string(Label label);  // spoof | bonafide
Label parse_label(const std::string& text);

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

// Gallery with one template per distinct identity, taken from the first
// image of that identity in manifest order.
Gallery enroll_manifest(const Manifest& manifest);

}  // namespace chromafool
