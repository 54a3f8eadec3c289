// seq2vec command-line tool.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seq2vec/audio/boaw.hpp"
#include "seq2vec/eval/export.hpp"
#include "seq2vec/eval/lda.hpp"
#include "seq2vec/nn/gradient_suite.hpp"
#include "seq2vec/toolkit/pipeline.hpp"

using namespace seq2vec;
using namespace seq2vec::toolkit;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kConfig = 2, kData = 3, kNumeric = 4, kIo = 5, kFormat = 6 };

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return kConfig;
    case ErrorKind::Data: return kData;
    case ErrorKind::Numeric: return kNumeric;
    case ErrorKind::Io: return kIo;
    case ErrorKind::Format: return kFormat;
  }
  return kInternal;
}

// Options every command accepts.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "key = value configuration file")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "seed for every random draw of this command");
    app->add_option("--set", overrides, "override one config entry, e.g. --set ae.batch_size=32");
  }

  PipelineConfig load() const {
    PipelineConfig cfg;
    if (!config.empty()) cfg.apply(KeyValueConfig::load(config));
    if (seed) cfg.set_seed(*seed);
    KeyValueConfig kv;
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
      kv.set(o.substr(0, eq), o.substr(eq + 1));
    }
    cfg.apply(kv);
    return cfg;
  }
};

template <class Fn>
void write_file(const std::string& path, Fn&& fn) {
  auto out = io::open_output(path);
  fn(out);
  io::finish_output(out, path);
}

std::string fmt(double v) { return io::format_double(v); }

// synth-data ---------------------------------------------------------------

struct SynthCmd {
  Common common;
  std::string out;
  std::optional<int> classes, clips;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("synth-data", "Generate the synthetic acoustic-event corpus");
    common.attach(app);
    app->add_option("--out", out, "output directory")->required();
    app->add_option("--classes", classes, "number of classes");
    app->add_option("--clips", clips, "clips per class");
    app->final_callback([this] { run(); });
  }

  void run() {
    auto cfg = common.load();
    if (classes) cfg.synth.num_classes = *classes;
    if (clips) cfg.synth.clips_per_class = *clips;
    const auto m = synth_generate(cfg.synth, out);
    std::cout << "wrote " << m.size() << " clips in " << m.categories.size() << " classes to " << out << "\n";
    for (auto s : {Split::Train, Split::Test, Split::Validation})
      std::cout << "  " << split_name(s) << ": " << m.indices(s).size() << "\n";
    std::cout << "manifest: " << (std::filesystem::path(out) / "manifest.csv").string() << "\n";
  }
};

// extract-features ---------------------------------------------------------

struct ExtractCmd {
  Common common;
  std::string manifest, out;
  bool allow_any_rate = false;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("extract-features", "Compute MFCC frame tables for every manifest entry");
    common.attach(app);
    app->add_option("--manifest", manifest, "dataset manifest CSV")->required();
    app->add_option("--out", out, "feature table CSV to write")->required();
    app->add_flag("--allow-any-rate", allow_any_rate, "accept WAV files at rates other than 16 kHz");
    app->final_callback([this] { run(); });
  }

  void run() {
    const auto cfg = common.load();
    const auto m = load_manifest(manifest);
    const auto feats = extract_features(m, cfg.mfcc, allow_any_rate);
    write_file(out, [&](std::ostream& o) { write_features(o, feats); });
    Eigen::Index frames = 0, longest = 0;
    for (const auto& f : feats) {
      frames += f.frame_count();
      longest = std::max(longest, f.frame_count());
    }
    std::cout << "extracted " << feats.size() << " sequences, " << frames << " frames (longest " << longest << ") of "
              << cfg.mfcc.feature_dim() << " coefficients -> " << out << "\n";
  }
};

// train-ae -----------------------------------------------------------------

nlohmann::json echo(const train::AutoencoderTrainConfig& c, const std::string& shape) {
  return {{"shape", shape},
          {"batch_size", c.batch_size},
          {"initial_lr", c.initial_lr},
          {"decay", c.decay},
          {"check_interval", c.check_interval},
          {"plateau_window", c.plateau_window},
          {"clip_ratio", c.clip_ratio},
          {"patience", c.patience},
          {"seed", c.seed},
          {"max_checkpoints", c.max_checkpoints}};
}

struct TrainAeCmd {
  Common common;
  std::string manifest, features, out, log, shape;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("train-ae", "Train the sequence-to-sequence autoencoder on the training split");
    common.attach(app);
    app->add_option("--manifest", manifest, "dataset manifest CSV")->required();
    app->add_option("--features", features, "feature table from extract-features")->required();
    app->add_option("--out", out, "model container to write")->required();
    app->add_option("--shape", shape, "hidden units and layers, e.g. 512-2");
    app->add_option("--log", log, "checkpoint history CSV (checkpoint,loss,lr)");
    app->final_callback([this] { run(); });
  }

  void run() {
    auto cfg = common.load();
    if (!shape.empty()) cfg.shape = shape;
    const auto model_shape = nn::ModelShape::parse(cfg.shape);
    const auto m = load_manifest(manifest);
    const auto all = read_features_file(features);
    if (all.size() != m.size()) throw DataError("feature table and manifest differ in length");
    const auto train_seqs = select(all, m.indices(Split::Train));
    if (train_seqs.empty()) throw DataError("manifest has no training entries");

    const auto standardizer = audio::fit_standardizer(train_seqs);
    std::vector<audio::FeatureSequence> z;
    for (const auto& s : train_seqs) z.push_back(audio::apply_standardizer(s, standardizer));

    std::cout << "training ED " << model_shape.str() << " on " << z.size() << " sequences\n";
    const auto res = train::train_autoencoder(z, model_shape, cfg.ae, [](const train::Checkpoint& c) {
      std::printf("checkpoint %d  batches %ld  loss %.6g  lr %.6g  elapsed %.1fs\n", c.index, c.batches, c.loss, c.lr,
                  c.elapsed_seconds);
      std::fflush(stdout);
    });
    save_container_file(pack_autoencoder({res.model, standardizer}, echo(cfg.ae, model_shape.str())), out);
    if (!log.empty()) eval::export_plot_csv(res.history, log);
    const auto& best = res.history.checkpoints[static_cast<std::size_t>(res.history.best_checkpoint)];
    std::cout << (res.history.stopped_early ? "stopped early" : "reached the checkpoint cap") << "; best checkpoint "
              << best.index << " loss " << fmt(best.loss) << "\nmodel: " << out << "\n";
  }
};

// encode -------------------------------------------------------------------

struct EncodeCmd {
  Common common;
  std::string model, manifest, features, out;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("encode", "Write one fixed-length representation per manifest entry");
    common.attach(app);
    app->add_option("--model", model, "autoencoder container")->required();
    app->add_option("--manifest", manifest, "dataset manifest CSV")->required();
    app->add_option("--features", features, "feature table from extract-features")->required();
    app->add_option("--out", out, "representation table CSV")->required();
    app->final_callback([this] { run(); });
  }

  void run() {
    const auto cfg = common.load();
    const auto bundle = unpack_autoencoder(load_container_file(model));
    const auto m = load_manifest(manifest);
    const auto feats = read_features_file(features);
    if (feats.size() != m.size()) throw DataError("feature table and manifest differ in length");
    const auto table = encode_all(bundle, feats, target_labels(m, cfg.target));
    write_file(out, [&](std::ostream& o) { write_representations(o, table); });
    std::cout << "encoded " << table.size() << " sequences into " << table.values.cols() << "-dimensional vectors -> "
              << out << "\n";
  }
};

// train-clf ----------------------------------------------------------------

struct TrainClfCmd {
  Common common;
  std::string reps, manifest, out, kind = "gru";

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("train-clf", "Train a GRU or SVM classifier, selecting its size on validation");
    common.attach(app);
    app->add_option("--reps", reps, "representation table (encode or boaw output)")->required();
    app->add_option("--manifest", manifest, "dataset manifest CSV")->required();
    app->add_option("--kind", kind, "gru or svm")->check(CLI::IsMember({"gru", "svm"}));
    app->add_option("--out", out, "classifier container to write")->required();
    app->final_callback([this] { run(); });
  }

  void run() {
    const auto cfg = common.load();
    const auto m = load_manifest(manifest);
    const auto table = read_representations_file(reps);
    const auto clf = train_classifier(kind, table, m, target_count(m, cfg.target), cfg);
    const char* what = kind == "gru" ? "hidden units" : "C";
    for (const auto& s : clf.search)
      std::cout << what << " " << fmt(s.value) << ": validation F1 " << fmt(s.validation_f1) << "\n";
    save_container_file(clf.pack(), out);
    std::cout << "selected " << what << " "
              << (clf.gru ? std::to_string(clf.gru->gru.hidden()) : fmt(clf.svm->C)) << "\nmodel: " << out << "\n";
  }
};

// evaluate -----------------------------------------------------------------

struct EvaluateCmd {
  Common common;
  std::string model, reps, manifest, split = "test", predictions, predictions_out, confusion_out, lda_out, metrics_out;
  std::optional<int> classes;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("evaluate", "Macro F1, UA, confusion matrix and LDA projection");
    common.attach(app);
    app->add_option("--model", model, "classifier container");
    app->add_option("--reps", reps, "representation table");
    app->add_option("--manifest", manifest, "dataset manifest CSV");
    app->add_option("--split", split, "split to evaluate")->check(CLI::IsMember({"train", "test", "validation", "all"}));
    app->add_option("--predictions", predictions, "score an existing id,truth,pred file instead of a model");
    app->add_option("--classes", classes, "number of classes for --predictions (default: largest id + 1)");
    app->add_option("--predictions-out", predictions_out, "write id,truth,pred");
    app->add_option("--confusion", confusion_out, "write confusion CSV (true,pred,count)");
    app->add_option("--lda", lda_out, "write 2-D LDA projection CSV (x,y,class)");
    app->add_option("--metrics", metrics_out, "write metric,value CSV");
    app->final_callback([this] { run(); });
  }

  void run() {
    const auto cfg = common.load();
    std::vector<int> ids, truth, pred;
    int K = 0;
    std::optional<RepresentationTable> subset;
    if (!predictions.empty()) {
      const auto t = io::read_csv_file(predictions);
      const auto ci = t.column("id"), ct = t.column("truth"), cp = t.column("pred");
      for (const auto& r : t.rows) {
        ids.push_back(static_cast<int>(io::parse_int(r[ci])));
        truth.push_back(static_cast<int>(io::parse_int(r[ct])));
        pred.push_back(static_cast<int>(io::parse_int(r[cp])));
      }
      for (std::size_t i = 0; i < truth.size(); ++i) K = std::max({K, truth[i] + 1, pred[i] + 1});
      if (classes) K = *classes;
    } else {
      if (model.empty() || reps.empty() || manifest.empty())
        throw ConfigError("evaluate needs --predictions or all of --model, --reps and --manifest");
      const auto clf = unpack_classifier(load_container_file(model));
      const auto m = load_manifest(manifest);
      const auto table = read_representations_file(reps);
      K = target_count(m, cfg.target);
      const auto s = split_rows(table, m);
      std::vector<std::size_t> rows;
      if (split == "all") {
        for (std::size_t i = 0; i < table.size(); ++i) rows.push_back(i);
      } else {
        rows = split == "train" ? s.train : split == "validation" ? s.validation : s.test;
      }
      if (rows.empty()) throw DataError("no rows in split '" + split + "'");
      RepresentationTable sub;
      sub.values = table.rows(rows);
      for (auto r : rows) {
        sub.ids.push_back(table.ids[r]);
        sub.labels.push_back(table.labels[r]);
      }
      ids = sub.ids;
      truth = sub.labels;
      pred = clf.predict(sub.values);
      subset = std::move(sub);
    }

    const auto cm = eval::confusion(pred, truth, K);
    const auto r = eval::evaluate(cm);
    std::cout << "instances " << truth.size() << "\nmacro F1 " << fmt(r.macro_f1) << "\nUA " << fmt(r.unweighted_accuracy)
              << "\nmacro precision " << fmt(r.macro_precision) << "\n";
    for (int k : r.excluded) std::cout << "warning: class " << k << " has no instances and was left out\n";

    if (!predictions_out.empty())
      write_file(predictions_out, [&](std::ostream& o) {
        o << "id,truth,pred\n";
        for (std::size_t i = 0; i < truth.size(); ++i) o << ids[i] << ',' << truth[i] << ',' << pred[i] << '\n';
      });
    if (!confusion_out.empty()) eval::export_plot_csv(cm, confusion_out);
    if (!metrics_out.empty())
      write_file(metrics_out, [&](std::ostream& o) {
        o << "metric,value\nmacro_f1," << fmt(r.macro_f1) << "\nunweighted_accuracy," << fmt(r.unweighted_accuracy)
          << "\nmacro_precision," << fmt(r.macro_precision) << "\ninstances," << truth.size() << '\n';
      });
    if (!lda_out.empty()) {
      if (!subset) throw ConfigError("--lda needs --model, --reps and --manifest");
      eval::export_plot_csv(eval::lda_project(subset->values, subset->labels), lda_out);
    }
  }
};

// gradient-check -----------------------------------------------------------

struct GradCheckCmd {
  Common common;
  int instances = 20;
  double tolerance = 1e-5;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("gradient-check", "Compare analytic gradients with central differences");
    common.attach(app);
    app->add_option("--instances", instances, "number of random instances")->check(CLI::PositiveNumber);
    app->add_option("--tolerance", tolerance, "relative error tolerance");
    app->final_callback([this] { run(); });
  }

  void run() {
    const auto cfg = common.load();
    const auto cases = nn::run_gradient_suite(instances, cfg.ae.seed, 1e-5, tolerance);
    int failed = 0;
    for (const auto& c : cases) {
      std::printf("%-12s %-34s entries %4zu  max rel err %.3e  %s\n", c.kind.c_str(), c.dims.c_str(),
                  c.report.entries_checked, c.report.max_rel_error, c.report.passed() ? "ok" : "FAIL");
      failed += !c.report.passed();
    }
    std::printf("%d of %d instances passed\n", instances - failed, instances);
    if (failed) throw NumericError(std::to_string(failed) + " gradient check(s) failed");
  }
};

// boaw ---------------------------------------------------------------------

struct BoawCmd {
  Common common;
  std::string manifest, features, out, codebook_in, codebook_out;
  std::optional<int> vocab, assignments;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("boaw", "Bag-of-audio-words histograms (baseline representation)");
    common.attach(app);
    app->add_option("--manifest", manifest, "dataset manifest CSV")->required();
    app->add_option("--features", features, "feature table from extract-features")->required();
    app->add_option("--out", out, "representation table CSV")->required();
    app->add_option("--codebook", codebook_in, "use this codebook instead of fitting one");
    app->add_option("--codebook-out", codebook_out, "save the fitted codebook");
    app->add_option("--vocab", vocab, "codebook size");
    app->add_option("--assignments", assignments, "words each frame votes for");
    app->final_callback([this] { run(); });
  }

  void run() {
    auto cfg = common.load();
    if (vocab) cfg.boaw_vocab_size = *vocab;
    if (assignments) cfg.boaw_assignments = *assignments;
    const auto m = load_manifest(manifest);
    const auto feats = read_features_file(features);
    if (feats.size() != m.size()) throw DataError("feature table and manifest differ in length");

    CodebookBundle cb;
    if (!codebook_in.empty()) {
      cb = unpack_codebook(load_container_file(codebook_in));
    } else {
      const auto train_seqs = select(feats, m.indices(Split::Train));
      cb.standardizer = audio::fit_standardizer(train_seqs);
      std::vector<audio::FeatureSequence> z;
      for (const auto& s : train_seqs) z.push_back(audio::apply_standardizer(s, cb.standardizer));
      cb.codebook = audio::fit_boaw_codebook(z, cfg.boaw_vocab_size, mix_seed(cfg.ae.seed, 3), cfg.boaw_assignments);
    }
    const auto hists = parallel_map(feats.size(), [&](std::size_t i) {
      return audio::boaw_encode(audio::apply_standardizer(feats[i], cb.standardizer), cb.codebook);
    });
    RepresentationTable t;
    const auto labels = target_labels(m, cfg.target);
    t.values.resize(static_cast<Eigen::Index>(hists.size()), cb.codebook.vocab_size());
    for (std::size_t i = 0; i < hists.size(); ++i) {
      t.ids.push_back(static_cast<int>(i));
      t.labels.push_back(labels[i]);
      t.values.row(static_cast<Eigen::Index>(i)) = hists[i].transpose();
    }
    write_file(out, [&](std::ostream& o) { write_representations(o, t); });
    if (!codebook_out.empty())
      save_container_file(pack_codebook(cb, {{"vocab_size", cfg.boaw_vocab_size}, {"assignments", cfg.boaw_assignments}}),
                          codebook_out);
    std::cout << "BoAW: " << cb.codebook.vocab_size() << " words, " << cb.codebook.assignments_per_frame
              << " per frame; " << t.size() << " histograms -> " << out << "\n";
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seq2vec: unsupervised audio sequence representations for acoustic event classification"};
  app.require_subcommand(1);
  SynthCmd synth;
  ExtractCmd extract;
  TrainAeCmd train_ae;
  EncodeCmd encode;
  TrainClfCmd train_clf;
  EvaluateCmd evaluate;
  GradCheckCmd grad;
  BoawCmd boaw;
  synth.attach(app);
  extract.attach(app);
  train_ae.attach(app);
  encode.attach(app);
  train_clf.attach(app);
  evaluate.attach(app);
  grad.attach(app);
  boaw.attach(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kOk;
}
