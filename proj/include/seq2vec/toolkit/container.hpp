#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "seq2vec/audio/boaw.hpp"
#include "seq2vec/audio/standardizer.hpp"
#include "seq2vec/nn/autoencoder.hpp"
#include "seq2vec/nn/classifier.hpp"
#include "seq2vec/tensor.hpp"
#include "seq2vec/train/svm.hpp"

namespace seq2vec::toolkit {

// Layout (all integers little-endian):
//   "S2VC" | u16 major | u16 minor | u64 n | n bytes JSON metadata
//   | u32 sections | per section: u16 n | name | u64 count | count f64
//   | u64 FNV-1a of every preceding byte

inline constexpr std::uint16_t kContainerMajor = 1;
inline constexpr std::uint16_t kContainerMinor = 0;

enum class ContainerErrorCode { BadMagic, Truncated, Checksum, Version, KindMismatch, Malformed };

class ContainerError : public FormatError {
public:
  ContainerError(ContainerErrorCode code, const std::string& what) : FormatError("model container: " + what), code_(code) {}
  ContainerErrorCode code() const noexcept { return code_; }

private:
  ContainerErrorCode code_;
};

struct Section {
  std::string name;
  std::vector<double> values;
};

struct ModelContainer {
  std::string kind;
  nlohmann::json metadata = nlohmann::json::object();  // "kind" is added on save
  std::vector<Section> sections;

  const Section& section(const std::string& name) const {
    for (const auto& s : sections)
      if (s.name == name) return s;
    throw ContainerError(ContainerErrorCode::Malformed, "missing section '" + name + "'");
  }
};

inline std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace detail {

inline void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  std::uint64_t le(int bytes) {
    need(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }
  std::span<const std::uint8_t> take(std::uint64_t n) {
    need(n);
    auto s = b_.subspan(pos_, static_cast<std::size_t>(n));
    pos_ += static_cast<std::size_t>(n);
    return s;
  }
  std::size_t pos() const { return pos_; }

private:
  void need(std::uint64_t n) const {
    if (n > b_.size() - pos_) throw ContainerError(ContainerErrorCode::Truncated, "unexpected end of data");
  }
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> save_container(const ModelContainer& c) {
  std::vector<std::uint8_t> out{'S', '2', 'V', 'C'};
  detail::put_le(out, kContainerMajor, 2);
  detail::put_le(out, kContainerMinor, 2);
  auto meta = c.metadata;
  meta["kind"] = c.kind;
  const std::string text = meta.dump();
  detail::put_le(out, text.size(), 8);
  out.insert(out.end(), text.begin(), text.end());
  detail::put_le(out, c.sections.size(), 4);
  for (const auto& s : c.sections) {
    detail::put_le(out, s.name.size(), 2);
    out.insert(out.end(), s.name.begin(), s.name.end());
    detail::put_le(out, s.values.size(), 8);
    for (double v : s.values) detail::put_le(out, std::bit_cast<std::uint64_t>(v), 8);
  }
  detail::put_le(out, fnv1a64(out), 8);
  return out;
}

inline ModelContainer load_container(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "S2VC", 4) != 0)
    throw ContainerError(ContainerErrorCode::BadMagic, "not a model container");
  detail::Reader r(bytes);
  r.take(4);
  const auto major = r.le(2);
  r.le(2);  // minor versions stay readable
  if (major != kContainerMajor)
    throw ContainerError(ContainerErrorCode::Version, "format version " + std::to_string(major) + " is not supported");
  ModelContainer c;
  const auto n = r.le(8);
  const auto text = r.take(n);
  const auto sections = r.le(4);
  for (std::uint64_t s = 0; s < sections; ++s) {
    Section sec;
    const auto len = r.le(2);
    const auto name = r.take(len);
    sec.name.assign(name.begin(), name.end());
    const auto count = r.le(8);
    if (count > bytes.size() / 8) throw ContainerError(ContainerErrorCode::Truncated, "unexpected end of data");
    sec.values.resize(static_cast<std::size_t>(count));
    for (auto& v : sec.values) v = std::bit_cast<double>(r.le(8));
    c.sections.push_back(std::move(sec));
  }
  const auto body = bytes.first(r.pos());
  const auto stored = r.le(8);
  if (r.pos() != bytes.size()) throw ContainerError(ContainerErrorCode::Malformed, "trailing bytes");
  if (fnv1a64(body) != stored) throw ContainerError(ContainerErrorCode::Checksum, "checksum mismatch");
  try {
    c.metadata = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(ContainerErrorCode::Malformed, std::string("bad metadata: ") + e.what());
  }
  if (!c.metadata.is_object() || !c.metadata.contains("kind") || !c.metadata["kind"].is_string())
    throw ContainerError(ContainerErrorCode::Malformed, "metadata lacks a kind tag");
  c.kind = c.metadata["kind"].get<std::string>();
  c.metadata.erase("kind");
  return c;
}

inline void save_container_file(const ModelContainer& c, const std::string& path) {
  const auto bytes = save_container(c);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("cannot write " + path);
}

inline ModelContainer load_container_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_container(bytes);
}

inline void expect_kind(const ModelContainer& c, const std::string& kind) {
  if (c.kind != kind)
    throw ContainerError(ContainerErrorCode::KindMismatch, "expected kind '" + kind + "', found '" + c.kind + "'");
}

template <ParameterSet P>
void add_params(ModelContainer& c, const std::string& prefix, const P& params) {
  P copy = params;
  copy.visit([&](std::string_view name, std::span<double> d) {
    c.sections.push_back({prefix + std::string(name), std::vector<double>(d.begin(), d.end())});
  });
}

/// Fills an already-shaped parameter set; every section must match in size.
template <ParameterSet P>
void read_params(const ModelContainer& c, const std::string& prefix, P& params) {
  params.visit([&](std::string_view name, std::span<double> d) {
    const auto& s = c.section(prefix + std::string(name));
    if (s.values.size() != d.size())
      throw ContainerError(ContainerErrorCode::Malformed, "section '" + s.name + "' has the wrong size");
    std::copy(s.values.begin(), s.values.end(), d.begin());
  });
}

template <class T>
T meta_get(const ModelContainer& c, const char* key) {
  try {
    return c.metadata.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ContainerError(ContainerErrorCode::Malformed, std::string("metadata field '") + key + "' missing or invalid");
  }
}

// Typed payloads.

inline ModelContainer pack_standardizer(const audio::Standardizer& s) {
  ModelContainer c{"standardizer"};
  c.metadata["dim"] = s.dim();
  add_params(c, "", s);
  return c;
}

inline audio::Standardizer read_standardizer(const ModelContainer& c, const std::string& prefix, Eigen::Index dim) {
  audio::Standardizer s{Vector::Zero(dim), Vector::Zero(dim)};
  read_params(c, prefix, s);
  return s;
}

inline audio::Standardizer unpack_standardizer(const ModelContainer& c) {
  expect_kind(c, "standardizer");
  return read_standardizer(c, "", meta_get<Eigen::Index>(c, "dim"));
}

struct AutoencoderBundle {
  nn::EncoderDecoderModel model;
  audio::Standardizer standardizer;
};

inline ModelContainer pack_autoencoder(const AutoencoderBundle& b, nlohmann::json config = nlohmann::json::object()) {
  ModelContainer c{"autoencoder"};
  c.metadata["feature_dim"] = b.model.feature_dim;
  c.metadata["hidden_units"] = b.model.shape.hidden_units;
  c.metadata["num_layers"] = b.model.shape.num_layers;
  c.metadata["shape"] = b.model.shape.str();
  c.metadata["config"] = std::move(config);
  add_params(c, "", b.model);
  add_params(c, "standardizer/", b.standardizer);
  return c;
}

inline AutoencoderBundle unpack_autoencoder(const ModelContainer& c) {
  expect_kind(c, "autoencoder");
  const int d = meta_get<int>(c, "feature_dim");
  const nn::ModelShape shape{meta_get<int>(c, "hidden_units"), meta_get<int>(c, "num_layers")};
  if (d < 1 || shape.hidden_units < 1 || shape.num_layers < 1)
    throw ContainerError(ContainerErrorCode::Malformed, "invalid autoencoder shape");
  AutoencoderBundle b{nn::EncoderDecoderModel::zeros(d, shape), {}};
  read_params(c, "", b.model);
  b.standardizer = read_standardizer(c, "standardizer/", d);
  return b;
}

inline ModelContainer pack_gru_classifier(const nn::GruClassifier& m, nlohmann::json config = nlohmann::json::object()) {
  ModelContainer c{"gru-classifier"};
  c.metadata["input_dim"] = m.gru.input_dim();
  c.metadata["hidden_units"] = m.gru.hidden();
  c.metadata["num_classes"] = m.output.W.rows();
  c.metadata["config"] = std::move(config);
  add_params(c, "", m);
  return c;
}

inline nn::GruClassifier unpack_gru_classifier(const ModelContainer& c) {
  expect_kind(c, "gru-classifier");
  auto m = nn::GruClassifier::zeros(meta_get<int>(c, "input_dim"), meta_get<int>(c, "hidden_units"),
                                     meta_get<int>(c, "num_classes"));
  read_params(c, "", m);
  return m;
}

inline ModelContainer pack_svm(const train::SvmModel& m, nlohmann::json config = nlohmann::json::object()) {
  ModelContainer c{"svm"};
  c.metadata["input_dim"] = m.dim();
  c.metadata["num_classes"] = m.num_classes();
  c.metadata["C"] = m.C;
  c.metadata["config"] = std::move(config);
  add_params(c, "", m);
  return c;
}

inline train::SvmModel unpack_svm(const ModelContainer& c) {
  expect_kind(c, "svm");
  train::SvmModel m;
  m.W = Matrix::Zero(meta_get<int>(c, "num_classes"), meta_get<int>(c, "input_dim"));
  m.b = Vector::Zero(m.W.rows());
  m.C = meta_get<double>(c, "C");
  read_params(c, "", m);
  return m;
}

struct CodebookBundle {
  audio::BoawCodebook codebook;
  audio::Standardizer standardizer;
};

inline ModelContainer pack_codebook(const CodebookBundle& b, nlohmann::json config = nlohmann::json::object()) {
  ModelContainer c{"codebook"};
  c.metadata["vocab_size"] = b.codebook.vocab_size();
  c.metadata["dim"] = b.codebook.dim();
  c.metadata["assignments_per_frame"] = b.codebook.assignments_per_frame;
  c.metadata["config"] = std::move(config);
  add_params(c, "", b.codebook);
  add_params(c, "standardizer/", b.standardizer);
  return c;
}

inline CodebookBundle unpack_codebook(const ModelContainer& c) {
  expect_kind(c, "codebook");
  const auto d = meta_get<Eigen::Index>(c, "dim");
  CodebookBundle b;
  b.codebook.centroids = Matrix::Zero(meta_get<Eigen::Index>(c, "vocab_size"), d);
  b.codebook.assignments_per_frame = meta_get<int>(c, "assignments_per_frame");
  read_params(c, "", b.codebook);
  b.standardizer = read_standardizer(c, "standardizer/", d);
  return b;
}

}  // namespace seq2vec::toolkit
