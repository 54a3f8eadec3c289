#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "seq2vec/io/csv.hpp"

namespace seq2vec::toolkit {

enum class Split { Train, Test, Validation };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Test: return "test";
    case Split::Validation: return "validation";
  }
  return "?";
}

inline Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  if (s == "validation") return Split::Validation;
  throw FormatError("unknown split '" + s + "'");
}

struct ManifestEntry {
  std::string path;  // relative to the manifest's directory unless absolute
  int category_id = 0;
  int class_id = 0;
  Split split = Split::Train;
};

/// Audio files with a two-level label (category > class) and a split.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> categories;
  std::vector<std::string> classes;
  std::filesystem::path base_dir;

  std::size_t size() const { return entries.size(); }

  std::string resolve(const ManifestEntry& e) const {
    const std::filesystem::path p(e.path);
    return (p.is_absolute() ? p : base_dir / p).string();
  }

  std::vector<std::size_t> indices(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (entries[i].split == s) out.push_back(i);
    return out;
  }

  /// Checks unique paths, dense ids and consistent names.
  void validate() const {
    std::set<std::string> paths;
    for (const auto& e : entries) {
      if (!paths.insert(e.path).second) throw DataError("manifest: duplicate path " + e.path);
      if (e.category_id < 0 || e.category_id >= static_cast<int>(categories.size()) || e.class_id < 0 ||
          e.class_id >= static_cast<int>(classes.size()))
        throw DataError("manifest: id out of range for " + e.path);
    }
    for (std::size_t i = 0; i < categories.size(); ++i)
      if (categories[i].empty()) throw DataError("manifest: category ids are not dense");
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i].empty()) throw DataError("manifest: class ids are not dense");
  }
};

/// Sequential three-way split within each class: the first ceil(n/3)
/// entries train, the next ceil(n/3) test, the rest validation.
inline void assign_sequential_splits(DatasetManifest& m) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < m.entries.size(); ++i) by_class[m.entries[i].class_id].push_back(i);
  for (const auto& [cls, idx] : by_class) {
    const std::size_t third = (idx.size() + 2) / 3;
    for (std::size_t j = 0; j < idx.size(); ++j)
      m.entries[idx[j]].split = j < third ? Split::Train : j < 2 * third ? Split::Test : Split::Validation;
  }
}

inline void write_manifest(std::ostream& out, const DatasetManifest& m) {
  out << "path,category_id,category,class_id,class,split\n";
  for (const auto& e : m.entries)
    out << e.path << ',' << e.category_id << ',' << m.categories[static_cast<std::size_t>(e.category_id)] << ','
        << e.class_id << ',' << m.classes[static_cast<std::size_t>(e.class_id)] << ',' << split_name(e.split) << '\n';
}

inline void save_manifest(const DatasetManifest& m, const std::string& path) {
  auto out = io::open_output(path);
  write_manifest(out, m);
  io::finish_output(out, path);
}

inline DatasetManifest parse_manifest(std::istream& in, std::filesystem::path base_dir = {}) {
  const auto t = io::read_csv(in);
  const auto cp = t.column("path"), cci = t.column("category_id"), cc = t.column("category"),
             kci = t.column("class_id"), kc = t.column("class"), cs = t.column("split");
  DatasetManifest m;
  m.base_dir = std::move(base_dir);
  auto name_slot = [](std::vector<std::string>& names, long long id, const std::string& name, const char* what) {
    if (id < 0 || id > 1'000'000) throw FormatError(std::string("manifest: bad ") + what + " id");
    if (names.size() <= static_cast<std::size_t>(id)) names.resize(static_cast<std::size_t>(id) + 1);
    auto& slot = names[static_cast<std::size_t>(id)];
    if (name.empty()) throw FormatError(std::string("manifest: empty ") + what + " name");
    if (!slot.empty() && slot != name)
      throw FormatError(std::string("manifest: ") + what + " id " + std::to_string(id) + " has two names");
    slot = name;
  };
  for (const auto& r : t.rows) {
    ManifestEntry e;
    e.path = r[cp];
    if (e.path.empty()) throw FormatError("manifest: empty path");
    const auto cat = io::parse_int(r[cci]), cls = io::parse_int(r[kci]);
    name_slot(m.categories, cat, r[cc], "category");
    name_slot(m.classes, cls, r[kc], "class");
    e.category_id = static_cast<int>(cat);
    e.class_id = static_cast<int>(cls);
    e.split = parse_split(r[cs]);
    m.entries.push_back(std::move(e));
  }
  m.validate();
  return m;
}

inline DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path);
  return parse_manifest(in, std::filesystem::path(path).parent_path());
}

}  // namespace seq2vec::toolkit
