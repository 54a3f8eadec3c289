#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "seq2vec/audio/features.hpp"
#include "seq2vec/io/csv.hpp"
#include "seq2vec/tensor.hpp"

namespace seq2vec::toolkit {

// Frame table: entry,frame,c0..c{d-1}; one row per frame, entries in
// manifest order.

inline void write_features(std::ostream& out, std::span<const audio::FeatureSequence> seqs) {
  const Eigen::Index d = seqs.empty() ? 0 : seqs[0].dim();
  out << "entry,frame";
  for (Eigen::Index j = 0; j < d; ++j) out << ",c" << j;
  out << '\n';
  for (std::size_t e = 0; e < seqs.size(); ++e) {
    if (seqs[e].dim() != d) throw DataError("feature table: mixed feature dimensions");
    for (Eigen::Index t = 0; t < seqs[e].frame_count(); ++t) {
      out << e << ',' << t;
      for (Eigen::Index j = 0; j < d; ++j) out << ',' << io::format_double(seqs[e].frames(t, j));
      out << '\n';
    }
  }
}

inline std::vector<audio::FeatureSequence> read_features(std::istream& in) {
  const auto t = io::read_csv(in);
  if (t.header.size() < 3 || t.header[0] != "entry" || t.header[1] != "frame")
    throw FormatError("feature table: expected header entry,frame,c0,...");
  const auto d = static_cast<Eigen::Index>(t.header.size() - 2);
  std::vector<audio::FeatureSequence> out;
  std::vector<std::vector<double>> rows;
  auto flush = [&] {
    audio::FeatureSequence s;
    s.frames.resize(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (Eigen::Index j = 0; j < d; ++j) s.frames(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    out.push_back(std::move(s));
    rows.clear();
  };
  long long current = 0;
  for (const auto& r : t.rows) {
    const auto e = io::parse_int(r[0]), f = io::parse_int(r[1]);
    if (e == current + 1 && !rows.empty()) {
      flush();
      current = e;
    }
    if (e != current || f != static_cast<long long>(rows.size()))
      throw FormatError("feature table: rows out of order at entry " + std::to_string(e) + " frame " + std::to_string(f));
    std::vector<double> v(static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j) v[static_cast<std::size_t>(j)] = io::parse_double(r[static_cast<std::size_t>(j) + 2]);
    rows.push_back(std::move(v));
  }
  if (!rows.empty()) flush();
  return out;
}

inline std::vector<audio::FeatureSequence> read_features_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature table " + path);
  return read_features(in);
}

/// One fixed-length vector per row: id,label,v_0..v_{D-1}.
struct RepresentationTable {
  std::vector<int> ids;
  std::vector<int> labels;
  Matrix values;  // N x D

  std::size_t size() const { return ids.size(); }

  Matrix rows(std::span<const std::size_t> which) const {
    Matrix out(static_cast<Eigen::Index>(which.size()), values.cols());
    for (std::size_t i = 0; i < which.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(which[i]));
    return out;
  }
};

inline void write_representations(std::ostream& out, const RepresentationTable& t) {
  out << "id,label";
  for (Eigen::Index j = 0; j < t.values.cols(); ++j) out << ",v_" << j;
  out << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << t.ids[i] << ',' << t.labels[i];
    for (Eigen::Index j = 0; j < t.values.cols(); ++j) out << ',' << io::format_double(t.values(static_cast<Eigen::Index>(i), j));
    out << '\n';
  }
}

inline RepresentationTable read_representations(std::istream& in) {
  const auto t = io::read_csv(in);
  if (t.header.size() < 3 || t.header[0] != "id" || t.header[1] != "label")
    throw FormatError("representation table: expected header id,label,v_0,...");
  RepresentationTable r;
  const auto D = static_cast<Eigen::Index>(t.header.size() - 2);
  r.values.resize(static_cast<Eigen::Index>(t.rows.size()), D);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    r.ids.push_back(static_cast<int>(io::parse_int(t.rows[i][0])));
    r.labels.push_back(static_cast<int>(io::parse_int(t.rows[i][1])));
    for (Eigen::Index j = 0; j < D; ++j)
      r.values(static_cast<Eigen::Index>(i), j) = io::parse_double(t.rows[i][static_cast<std::size_t>(j) + 2]);
  }
  return r;
}

inline RepresentationTable read_representations_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open representation table " + path);
  return read_representations(in);
}

}  // namespace seq2vec::toolkit
