#include "chromafool/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "chromafool/errors.hpp"
#include "chromafool/image_io.hpp"

namespace chromafool {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::filesystem::path Manifest::resolve(const ManifestEntry& e) const {
  const std::filesystem::path p(e.path);
  return p.is_absolute() ? p : base_dir / p;
}

std::string Manifest::image_id(const ManifestEntry& e) { return std::filesystem::path(e.path).stem().string(); }

void Manifest::validate() const {
  std::set<std::string> paths;
  for (const auto& e : entries) {
    if (e.identity.empty()) throw FormatError("manifest entry '" + e.path + "' has an empty identity");
    if (!paths.insert(e.path).second) throw FormatError("duplicate manifest path '" + e.path + "'");
  }
}

std::string to_string(Label label) { return label == Label::Bonafide ? "bonafide" : "spoof"; }

Label parse_label(const std::string& text) {
  if (text == "spoof") return Label::Spoofing;
  if (text == "bonafide") return Label::Bonafide;
  throw FormatError("unknown label '" + text + "' (expected spoof or bonafide)");
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open manifest " + path.string());
  Manifest m;
  m.base_dir = path.parent_path();
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (header) {
      if (fields != std::vector<std::string>{"path", "identity", "label"}) {
        throw FormatError(path.string() + ": header must be 'path,identity,label'");
      }
      header = false;
      continue;
    }
    if (fields.size() != 3) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
    }
    m.entries.push_back({fields[0], fields[1], parse_label(fields[2])});
  }
  if (header) throw FormatError(path.string() + ": empty manifest");
  m.validate();
  return m;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << "path,identity,label\n";
  for (const auto& e : manifest.entries) out << e.path << ',' << e.identity << ',' << to_string(e.label) << '\n';
  if (!out) throw IoError("failed writing manifest " + path.string());
}

Gallery enroll_manifest(const Manifest& manifest) {
  Gallery g;
  std::set<std::string> seen;
  for (const auto& e : manifest.entries) {
    if (!seen.insert(e.identity).second) continue;
    g.enroll(e.identity, load_image(manifest.resolve(e)));
  }
  return g;
}

}  // namespace chromafool
