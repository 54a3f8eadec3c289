#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "seq2vec/audio/wav.hpp"
#include "seq2vec/random.hpp"
#include "seq2vec/toolkit/manifest.hpp"
#include "seq2vec/toolkit/parallel.hpp"

namespace seq2vec::toolkit {

struct SynthConfig {
  int num_classes = 5;
  int clips_per_class = 30;
  double min_duration = 0.5;  // seconds
  double max_duration = 4.0;
  int sample_rate = audio::kDefaultSampleRate;
  std::uint64_t seed = 0;

  void validate() const {
    if (num_classes < 2) throw ConfigError("synth: need at least 2 classes");
    if (clips_per_class < 3) throw ConfigError("synth: need at least 3 clips per class to fill every split");
    if (!(min_duration >= 0.1) || !(max_duration <= 10.0) || min_duration > max_duration)
      throw ConfigError("synth: durations must satisfy 0.1 <= min <= max <= 10 seconds");
    if (sample_rate < 8000) throw ConfigError("synth: sample rate must be at least 8000 Hz");
  }
};

enum class Archetype { Tone, Chirp, NoiseBursts, AmTone, Harmonic };

inline constexpr Archetype kArchetypes[] = {Archetype::Tone, Archetype::Chirp, Archetype::NoiseBursts,
                                            Archetype::AmTone, Archetype::Harmonic};

inline const char* archetype_name(Archetype a) {
  switch (a) {
    case Archetype::Tone: return "tone";
    case Archetype::Chirp: return "chirp";
    case Archetype::NoiseBursts: return "noise_bursts";
    case Archetype::AmTone: return "am_tone";
    case Archetype::Harmonic: return "harmonic_stack";
  }
  return "?";
}

/// Class k uses archetype k mod 5; later rounds (k >= 5) shift all
/// frequencies up by a factor 1.5 per round.
struct SynthClass {
  Archetype archetype;
  int variant;
  std::string name;
};

inline SynthClass synth_class(int k) {
  const auto a = kArchetypes[k % 5];
  const int variant = k / 5;
  std::string name = archetype_name(a);
  if (variant > 0) name += "_v" + std::to_string(variant);
  return {a, variant, std::move(name)};
}

/// One clip, fully determined by (class, seed).
inline std::vector<double> synth_clip(const SynthClass& cls, double duration, int rate, Rng& rng) {
  const auto n = static_cast<std::size_t>(std::llround(duration * rate));
  std::vector<double> x(n, 0.0);
  const double scale = std::pow(1.5, cls.variant);
  const double nyq = 0.45 * rate;
  const double two_pi = 2.0 * std::numbers::pi;
  const double amp = rng.uniform(0.3, 0.6);
  auto clampf = [&](double f) { return std::min(f, nyq); };

  switch (cls.archetype) {
    case Archetype::Tone: {
      const double f = clampf(rng.uniform(1500, 2500) * scale), ph = rng.uniform(0, two_pi);
      for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(two_pi * f * i / rate + ph);
      break;
    }
    case Archetype::Chirp: {
      const double f0 = clampf(rng.uniform(200, 500) * scale), f1 = clampf(rng.uniform(2500, 3500) * scale);
      const double T = static_cast<double>(n) / rate, k = (f1 - f0) / T, ph = rng.uniform(0, two_pi);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        x[i] = amp * std::sin(two_pi * (f0 * t + 0.5 * k * t * t) + ph);
      }
      break;
    }
    case Archetype::NoiseBursts: {
      const int bursts = 2 + static_cast<int>(rng.index(4)) + 2 * cls.variant;
      const double decay = rng.uniform(8, 20) * scale;  // 1/s
      std::vector<double> onsets;
      for (int b = 0; b < bursts; ++b) onsets.push_back(rng.uniform(0, duration * 0.9));
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        double env = 0.0;
        for (double o : onsets)
          if (t >= o) env += std::exp(-decay * (t - o));
        x[i] = amp * std::min(env, 1.0) * (2.0 * rng.uniform() - 1.0);
      }
      break;
    }
    case Archetype::AmTone: {
      const double fc = clampf(rng.uniform(400, 800) * scale), fm = rng.uniform(2, 5), depth = rng.uniform(0.7, 0.95);
      const double ph = rng.uniform(0, two_pi), phm = rng.uniform(0, two_pi);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        x[i] = amp * (1.0 - depth * 0.5 * (1.0 + std::sin(two_pi * fm * t + phm))) * std::sin(two_pi * fc * t + ph);
      }
      break;
    }
    case Archetype::Harmonic: {
      const double f0 = rng.uniform(100, 250) * scale;
      double phases[6];
      for (double& p : phases) p = rng.uniform(0, two_pi);
      double norm = 0.0;
      for (int h = 1; h <= 6; ++h) norm += 1.0 / h;
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (int h = 1; h <= 6; ++h)
          if (f0 * h < nyq) s += std::sin(two_pi * f0 * h * i / rate + phases[h - 1]) / h;
        x[i] = amp * s / norm;
      }
      break;
    }
  }
  // 10 ms fades and a faint noise floor
  const auto fade = std::min<std::size_t>(n / 2, static_cast<std::size_t>(rate / 100));
  for (std::size_t i = 0; i < fade; ++i) {
    const double g = static_cast<double>(i) / static_cast<double>(fade);
    x[i] *= g;
    x[n - 1 - i] *= g;
  }
  for (double& v : x) v += 0.005 * rng.normal();
  return x;
}

inline std::vector<std::uint8_t> synth_wav(const SynthConfig& cfg, int k, int clip) {
  Rng rng(mix_seed(mix_seed(cfg.seed, static_cast<std::uint64_t>(k)), static_cast<std::uint64_t>(clip)));
  const double duration = rng.uniform(cfg.min_duration, cfg.max_duration);
  const auto samples = synth_clip(synth_class(k), duration, cfg.sample_rate, rng);
  std::vector<std::int16_t> pcm(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) pcm[i] = audio::to_pcm16(samples[i]);
  return audio::encode_wav_pcm16(pcm, cfg.sample_rate);
}

/// Manifest for the synthetic corpus; each archetype is its own category
/// holding a single class.
inline DatasetManifest synth_manifest(const SynthConfig& cfg) {
  cfg.validate();
  DatasetManifest m;
  for (int k = 0; k < cfg.num_classes; ++k) {
    const auto cls = synth_class(k);
    m.categories.push_back(cls.name);
    m.classes.push_back(cls.name);
    for (int c = 0; c < cfg.clips_per_class; ++c) {
      char file[32];
      std::snprintf(file, sizeof file, "%03d.wav", c);
      m.entries.push_back({cls.name + "/" + file, k, k, Split::Train});
    }
  }
  assign_sequential_splits(m);
  return m;
}

/// Writes the WAV files and manifest.csv under out_dir.
inline DatasetManifest synth_generate(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
  auto m = synth_manifest(cfg);
  m.base_dir = out_dir;
  std::error_code ec;
  for (const auto& name : m.classes) {
    std::filesystem::create_directories(out_dir / name, ec);
    if (ec) throw IoError("cannot create " + (out_dir / name).string() + ": " + ec.message());
  }
  parallel_map(m.entries.size(), [&](std::size_t i) {
    const auto& e = m.entries[i];
    const int clip = static_cast<int>(i) - e.class_id * cfg.clips_per_class;
    const auto bytes = synth_wav(cfg, e.class_id, clip);
    const auto path = m.resolve(e);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("cannot write " + path);
    return 0;
  });
  save_manifest(m, (out_dir / "manifest.csv").string());
  return m;
}

}  // namespace seq2vec::toolkit
