#pragma once

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "seq2vec/audio/features.hpp"
#include "seq2vec/audio/wav.hpp"

namespace seq2vec::audio {

/// HTK-style MFCC front end. Column 0 of the output is the frame
/// log-energy, columns 1..num_cepstra are cepstral coefficients 1..12.
struct MfccConfig {
  double window_ms = 60.0;
  double hop_ms = 60.0;
  double preemphasis = 0.97;
  int num_filters = 26;
  int num_cepstra = 12;
  double low_hz = 0.0;
  double high_hz = 0.0;  // 0 means Nyquist
  double energy_floor = 1e-10;

  int feature_dim() const { return num_cepstra + 1; }
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

inline int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Frame count for a clip: ceil(samples / hop), the last frame zero-padded.
inline Eigen::Index mfcc_frame_count(std::size_t num_samples, int hop_samples) {
  return static_cast<Eigen::Index>((num_samples + static_cast<std::size_t>(hop_samples) - 1) / static_cast<std::size_t>(hop_samples));
}

/// Immutable after construction and safe to share between threads; each
/// extract() call owns its FFT state.
class MfccExtractor {
public:
  MfccExtractor(int sample_rate, MfccConfig cfg = {}) : cfg_(cfg), sample_rate_(sample_rate) {
    if (sample_rate <= 0) throw ConfigError("sample rate must be positive");
    if (cfg.window_ms <= 0 || cfg.hop_ms <= 0) throw ConfigError("window and hop must be positive");
    if (cfg.num_filters < 2 || cfg.num_cepstra < 1 || cfg.num_cepstra >= cfg.num_filters)
      throw ConfigError("need 1 <= num_cepstra < num_filters");
    window_ = static_cast<int>(std::lround(cfg.window_ms * sample_rate / 1000.0));
    hop_ = static_cast<int>(std::lround(cfg.hop_ms * sample_rate / 1000.0));
    if (window_ < 1 || hop_ < 1) throw ConfigError("window or hop shorter than one sample");
    nfft_ = next_pow2(window_);

    hamming_.resize(static_cast<std::size_t>(window_));
    for (int i = 0; i < window_; ++i)
      hamming_[static_cast<std::size_t>(i)] =
          window_ == 1 ? 1.0 : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (window_ - 1));

    build_filterbank();
    build_dct();
  }

  const MfccConfig& config() const { return cfg_; }
  int window_samples() const { return window_; }
  int hop_samples() const { return hop_; }
  int fft_size() const { return nfft_; }
  const Matrix& filterbank() const { return filters_; }

  FeatureSequence extract(const AudioClip& clip) const {
    if (clip.samples.empty()) throw DataError("extract_mfcc: empty clip");
    if (clip.sample_rate != sample_rate_)
      throw DataError("extract_mfcc: clip rate " + std::to_string(clip.sample_rate) + " Hz, extractor built for " +
                      std::to_string(sample_rate_) + " Hz");

    const std::size_t N = clip.samples.size();
    std::vector<double> emphasized(N);
    emphasized[0] = clip.samples[0];
    for (std::size_t i = 1; i < N; ++i) emphasized[i] = clip.samples[i] - cfg_.preemphasis * clip.samples[i - 1];

    const Eigen::Index T = mfcc_frame_count(N, hop_);
    FeatureSequence out;
    out.frames.resize(T, cfg_.feature_dim());

    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    std::vector<double> frame(static_cast<std::size_t>(nfft_));
    std::vector<std::complex<double>> spectrum;
    Vector power(nfft_ / 2 + 1);

    for (Eigen::Index t = 0; t < T; ++t) {
      std::fill(frame.begin(), frame.end(), 0.0);
      const std::size_t start = static_cast<std::size_t>(t) * static_cast<std::size_t>(hop_);
      double energy = 0.0;
      for (int i = 0; i < window_; ++i) {
        const std::size_t idx = start + static_cast<std::size_t>(i);
        const double v = idx < N ? emphasized[idx] * hamming_[static_cast<std::size_t>(i)] : 0.0;
        frame[static_cast<std::size_t>(i)] = v;
        energy += v * v;
      }
      fft.fwd(spectrum, frame);
      for (Eigen::Index k = 0; k < power.size(); ++k) power(k) = std::norm(spectrum[static_cast<std::size_t>(k)]);

      Vector log_mel = filters_ * power;
      for (Eigen::Index j = 0; j < log_mel.size(); ++j) log_mel(j) = std::log(std::max(log_mel(j), cfg_.energy_floor));

      out.frames(t, 0) = std::log(energy + cfg_.energy_floor);
      out.frames.row(t).tail(cfg_.num_cepstra) = (dct_ * log_mel).transpose();
    }
    return out;
  }

private:
  void build_filterbank() {
    const double high = cfg_.high_hz > 0 ? cfg_.high_hz : sample_rate_ / 2.0;
    const double mel_lo = hz_to_mel(cfg_.low_hz), mel_hi = hz_to_mel(high);
    std::vector<double> edges(static_cast<std::size_t>(cfg_.num_filters + 2));
    for (std::size_t i = 0; i < edges.size(); ++i)
      edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / (cfg_.num_filters + 1));

    const int bins = nfft_ / 2 + 1;
    filters_ = Matrix::Zero(cfg_.num_filters, bins);
    for (int m = 0; m < cfg_.num_filters; ++m) {
      const double left = edges[static_cast<std::size_t>(m)], centre = edges[static_cast<std::size_t>(m + 1)],
                   right = edges[static_cast<std::size_t>(m + 2)];
      for (int k = 0; k < bins; ++k) {
        const double f = static_cast<double>(k) * sample_rate_ / nfft_;
        double w = 0.0;
        if (f > left && f <= centre) w = (f - left) / (centre - left);
        else if (f > centre && f < right) w = (right - f) / (right - centre);
        filters_(m, k) = w;
      }
    }
  }

  // Orthonormal DCT-II rows 1..num_cepstra.
  void build_dct() {
    const int M = cfg_.num_filters;
    dct_.resize(cfg_.num_cepstra, M);
    for (int k = 1; k <= cfg_.num_cepstra; ++k)
      for (int n = 0; n < M; ++n)
        dct_(k - 1, n) = std::sqrt(2.0 / M) * std::cos(std::numbers::pi * k * (2.0 * n + 1.0) / (2.0 * M));
  }

  MfccConfig cfg_;
  int sample_rate_;
  int window_ = 0, hop_ = 0, nfft_ = 0;
  std::vector<double> hamming_;
  Matrix filters_;
  Matrix dct_;
};

inline FeatureSequence extract_mfcc(const AudioClip& clip, double window_ms = 60.0, double hop_ms = 60.0) {
  MfccConfig cfg;
  cfg.window_ms = window_ms;
  cfg.hop_ms = hop_ms;
  if (clip.sample_rate <= 0) throw DataError("extract_mfcc: invalid sample rate");
  return MfccExtractor(clip.sample_rate, cfg).extract(clip);
}

}  // namespace seq2vec::audio
