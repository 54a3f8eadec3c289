#pragma once

#include <sstream>
#include <string>

#include "seq2vec/eval/lda.hpp"
#include "seq2vec/eval/metrics.hpp"
#include "seq2vec/io/csv.hpp"
#include "seq2vec/train/history.hpp"

namespace seq2vec::eval {

// Plot-ready CSV. Header row, LF endings, shortest round-trip numbers.

inline void write_csv(std::ostream& out, const ConfusionMatrix& cm) {
  out << "true,pred,count\n";
  for (int i = 0; i < cm.num_classes(); ++i)
    for (int j = 0; j < cm.num_classes(); ++j) out << i << ',' << j << ',' << cm.at(i, j) << '\n';
}

inline void write_csv(std::ostream& out, const LdaProjection& p) {
  out << "x,y,class\n";
  for (Eigen::Index i = 0; i < p.points.rows(); ++i)
    out << io::format_double(p.points(i, 0)) << ',' << io::format_double(p.points(i, 1)) << ','
        << p.labels[static_cast<std::size_t>(i)] << '\n';
}

inline void write_csv(std::ostream& out, const train::TrainHistory& h) {
  out << "checkpoint,loss,lr\n";
  for (const auto& c : h.checkpoints)
    out << c.index << ',' << io::format_double(c.loss) << ',' << io::format_double(c.lr) << '\n';
}

template <class T>
std::string to_csv(const T& obj) {
  std::ostringstream s;
  write_csv(s, obj);
  return s.str();
}

template <class T>
void export_plot_csv(const T& obj, const std::string& path) {
  auto out = io::open_output(path);
  write_csv(out, obj);
  io::finish_output(out, path);
}

inline ConfusionMatrix parse_confusion_csv(std::istream& in) {
  const auto t = io::read_csv(in);
  const auto ci = t.column("true"), cp = t.column("pred"), cc = t.column("count");
  long long k = 0;
  for (const auto& r : t.rows) k = std::max({k, io::parse_int(r[ci]) + 1, io::parse_int(r[cp]) + 1});
  if (k == 0) throw FormatError("confusion CSV has no rows");
  if (static_cast<long long>(t.rows.size()) != k * k) throw FormatError("confusion CSV is not a complete K x K table");
  ConfusionMatrix cm(static_cast<int>(k));
  for (const auto& r : t.rows) {
    const auto count = io::parse_int(r[cc]);
    if (count < 0) throw FormatError("negative count in confusion CSV");
    cm.at(static_cast<int>(io::parse_int(r[ci])), static_cast<int>(io::parse_int(r[cp]))) = count;
  }
  return cm;
}

inline LdaProjection parse_lda_csv(std::istream& in) {
  const auto t = io::read_csv(in);
  const auto cx = t.column("x"), cy = t.column("y"), cl = t.column("class");
  LdaProjection p;
  p.points.resize(static_cast<Eigen::Index>(t.rows.size()), 2);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    p.points(static_cast<Eigen::Index>(i), 0) = io::parse_double(t.rows[i][cx]);
    p.points(static_cast<Eigen::Index>(i), 1) = io::parse_double(t.rows[i][cy]);
    p.labels.push_back(static_cast<int>(io::parse_int(t.rows[i][cl])));
  }
  return p;
}

inline train::TrainHistory parse_history_csv(std::istream& in) {
  const auto t = io::read_csv(in);
  const auto ci = t.column("checkpoint"), cl = t.column("loss"), cr = t.column("lr");
  train::TrainHistory h;
  for (const auto& r : t.rows) {
    train::Checkpoint c;
    c.index = static_cast<int>(io::parse_int(r[ci]));
    c.loss = io::parse_double(r[cl]);
    c.lr = io::parse_double(r[cr]);
    h.checkpoints.push_back(c);
  }
  return h;
}

}  // namespace seq2vec::eval
