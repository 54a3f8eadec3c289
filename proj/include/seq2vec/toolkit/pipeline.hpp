#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seq2vec/audio/mfcc.hpp"
#include "seq2vec/eval/metrics.hpp"
#include "seq2vec/toolkit/config.hpp"
#include "seq2vec/toolkit/container.hpp"
#include "seq2vec/toolkit/manifest.hpp"
#include "seq2vec/toolkit/parallel.hpp"
#include "seq2vec/toolkit/synth.hpp"
#include "seq2vec/toolkit/tables.hpp"
#include "seq2vec/train/autoencoder_trainer.hpp"
#include "seq2vec/train/classifier_trainer.hpp"
#include "seq2vec/train/svm.hpp"

namespace seq2vec::toolkit {

/// Every tunable of the command-line pipeline. Config keys are the field
/// names prefixed by their group (`ae.batch_size`, `svm.c_grid`, ...).
struct PipelineConfig {
  SynthConfig synth;
  audio::MfccConfig mfcc;
  std::string shape = "64-1";
  train::AutoencoderTrainConfig ae;
  train::ClassifierTrainConfig clf;
  std::vector<int> hidden_grid{128, 256, 512, 1024};
  std::vector<double> c_grid{std::begin(train::kSvmComplexityGrid), std::end(train::kSvmComplexityGrid)};
  double svm_tolerance = 1e-6;
  int boaw_vocab_size = audio::kDefaultVocabSize;
  int boaw_assignments = audio::kDefaultAssignments;
  std::string target = "category";  // or "class"

  ConfigBinder binder() {
    ConfigBinder b;
    b.bind("synth.num_classes", &synth.num_classes)
        .bind("synth.clips_per_class", &synth.clips_per_class)
        .bind("synth.min_duration", &synth.min_duration)
        .bind("synth.max_duration", &synth.max_duration)
        .bind("synth.sample_rate", &synth.sample_rate)
        .bind("synth.seed", &synth.seed)
        .bind("mfcc.window_ms", &mfcc.window_ms)
        .bind("mfcc.hop_ms", &mfcc.hop_ms)
        .bind("mfcc.preemphasis", &mfcc.preemphasis)
        .bind("mfcc.num_filters", &mfcc.num_filters)
        .bind("mfcc.num_cepstra", &mfcc.num_cepstra)
        .bind("mfcc.low_hz", &mfcc.low_hz)
        .bind("mfcc.high_hz", &mfcc.high_hz)
        .bind("ae.shape", &shape)
        .bind("ae.batch_size", &ae.batch_size)
        .bind("ae.initial_lr", &ae.initial_lr)
        .bind("ae.decay", &ae.decay)
        .bind("ae.check_interval", &ae.check_interval)
        .bind("ae.plateau_window", &ae.plateau_window)
        .bind("ae.clip_ratio", &ae.clip_ratio)
        .bind("ae.patience", &ae.patience)
        .bind("ae.seed", &ae.seed)
        .bind("ae.max_checkpoints", &ae.max_checkpoints)
        .bind("clf.initial_lr", &clf.initial_lr)
        .bind("clf.decay_every", &clf.decay_every)
        .bind("clf.decay_rate", &clf.decay_rate)
        .bind("clf.clip_ratio", &clf.clip_ratio)
        .bind("clf.batch_size", &clf.batch_size)
        .bind("clf.epochs", &clf.epochs)
        .bind("clf.hidden_units", &clf.hidden_units)
        .bind("clf.hidden_grid", &hidden_grid)
        .bind("clf.upsample", &clf.upsample)
        .bind("clf.seed", &clf.seed)
        .bind("clf.target", &target)
        .bind("svm.c_grid", &c_grid)
        .bind("svm.tolerance", &svm_tolerance)
        .bind("boaw.vocab_size", &boaw_vocab_size)
        .bind("boaw.assignments", &boaw_assignments);
    return b;
  }

  void apply(const KeyValueConfig& kv) {
    binder().apply(kv);
    if (target != "category" && target != "class") throw ConfigError("clf.target must be 'category' or 'class'");
    if (hidden_grid.empty() || c_grid.empty()) throw ConfigError("search grids must not be empty");
  }

  /// Same seed everywhere unless a group overrides it afterwards.
  void set_seed(std::uint64_t seed) { synth.seed = ae.seed = clf.seed = seed; }
};

/// Labels used for classification.
inline std::vector<int> target_labels(const DatasetManifest& m, const std::string& target) {
  std::vector<int> out;
  for (const auto& e : m.entries) out.push_back(target == "class" ? e.class_id : e.category_id);
  return out;
}

inline int target_count(const DatasetManifest& m, const std::string& target) {
  return static_cast<int>(target == "class" ? m.classes.size() : m.categories.size());
}

inline std::vector<audio::FeatureSequence> extract_features(const DatasetManifest& m, const audio::MfccConfig& cfg,
                                                            bool allow_any_rate) {
  const std::optional<int> rate = allow_any_rate ? std::nullopt : std::optional<int>(audio::kDefaultSampleRate);
  return parallel_map(m.size(), [&](std::size_t i) {
    const auto path = m.resolve(m.entries[i]);
    try {
      const auto clip = audio::load_wav(path, rate);
      auto seq = audio::MfccExtractor(clip.sample_rate, cfg).extract(clip);
      if (seq.frame_count() == 0) throw DataError("no audio samples");
      return seq;
    } catch (const Error& e) {
      throw DataError(path + ": " + e.what());
    }
  });
}

inline std::vector<audio::FeatureSequence> select(std::span<const audio::FeatureSequence> all,
                                                  std::span<const std::size_t> idx) {
  std::vector<audio::FeatureSequence> out;
  for (auto i : idx) {
    if (i >= all.size()) throw DataError("feature table has fewer entries than the manifest");
    out.push_back(all[i]);
  }
  return out;
}

inline RepresentationTable encode_all(const AutoencoderBundle& ae, std::span<const audio::FeatureSequence> features,
                                      std::span<const int> labels) {
  if (labels.size() != features.size()) throw DataError("encode: one label per sequence required");
  const auto reps = parallel_map(features.size(), [&](std::size_t i) {
    const auto z = audio::apply_standardizer(features[i], ae.standardizer);
    return nn::encode(z.frames, nn::full_mask(z.frame_count()), ae.model).v;
  });
  RepresentationTable t;
  t.values.resize(static_cast<Eigen::Index>(reps.size()), ae.model.shape.representation_size());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    t.ids.push_back(static_cast<int>(i));
    t.labels.push_back(labels[i]);
    t.values.row(static_cast<Eigen::Index>(i)) = reps[i].transpose();
  }
  return t;
}

struct Split3 {
  std::vector<std::size_t> train, validation, test;
};

/// Rows of a representation table by split, matched through the id column.
inline Split3 split_rows(const RepresentationTable& t, const DatasetManifest& m) {
  Split3 s;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const auto id = t.ids[r];
    if (id < 0 || static_cast<std::size_t>(id) >= m.size()) throw DataError("table id " + std::to_string(id) + " is not in the manifest");
    switch (m.entries[static_cast<std::size_t>(id)].split) {
      case Split::Train: s.train.push_back(r); break;
      case Split::Validation: s.validation.push_back(r); break;
      case Split::Test: s.test.push_back(r); break;
    }
  }
  return s;
}

inline std::vector<int> pick(std::span<const int> v, std::span<const std::size_t> idx) {
  std::vector<int> out;
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

struct SelectionStep {
  double value;       // hidden units or C
  double validation_f1;
};

struct TrainedClassifier {
  std::string kind;  // "gru" or "svm"
  std::optional<nn::GruClassifier> gru;
  std::optional<train::SvmModel> svm;
  std::vector<SelectionStep> search;

  std::vector<int> predict(const Matrix& reps) const {
    if (gru) return nn::classifier_predict(*gru, reps.transpose());
    return train::svm_predict(*svm, reps);
  }

  ModelContainer pack() const { return gru ? pack_gru_classifier(*gru) : pack_svm(*svm); }
};

inline TrainedClassifier unpack_classifier(const ModelContainer& c) {
  TrainedClassifier t;
  if (c.kind == "gru-classifier") {
    t.kind = "gru";
    t.gru = unpack_gru_classifier(c);
  } else if (c.kind == "svm") {
    t.kind = "svm";
    t.svm = unpack_svm(c);
  } else {
    throw ContainerError(ContainerErrorCode::KindMismatch, "expected a classifier, found '" + c.kind + "'");
  }
  return t;
}

/// Trains one model per grid value on the training rows and keeps the one
/// with the best validation macro F1 (earliest grid value on ties).
inline TrainedClassifier train_classifier(const std::string& kind, const RepresentationTable& t, const DatasetManifest& m,
                                          int num_classes, const PipelineConfig& cfg) {
  const auto s = split_rows(t, m);
  if (s.train.empty()) throw DataError("no training rows");
  const auto& eval_rows = s.validation.empty() ? s.train : s.validation;
  const Matrix Xtr = t.rows(s.train), Xva = t.rows(eval_rows);
  const auto ytr = pick(t.labels, s.train), yva = pick(t.labels, eval_rows);

  TrainedClassifier best;
  double best_f1 = -1.0;
  auto consider = [&](TrainedClassifier cand, double value) {
    const double f1 = eval::macro_f1(eval::confusion(cand.predict(Xva), yva, num_classes));
    best.search.push_back({value, f1});
    if (f1 > best_f1) {
      best_f1 = f1;
      auto search = std::move(best.search);
      best = std::move(cand);
      best.search = std::move(search);
    }
  };
  if (kind == "gru") {
    for (int h : cfg.hidden_grid) {
      auto c = cfg.clf;
      c.hidden_units = h;
      TrainedClassifier cand{"gru"};
      cand.gru = train::train_gru_classifier(Xtr, ytr, num_classes, c).model;
      consider(std::move(cand), h);
    }
  } else if (kind == "svm") {
    for (double C : cfg.c_grid) {
      train::SvmOptions o;
      o.tolerance = cfg.svm_tolerance;
      o.seed = cfg.clf.seed;
      TrainedClassifier cand{"svm"};
      cand.svm = train::train_svm(Xtr, ytr, num_classes, C, o);
      consider(std::move(cand), C);
    }
  } else {
    throw ConfigError("classifier kind must be 'gru' or 'svm'");
  }
  return best;
}

}  // namespace seq2vec::toolkit
