#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "seq2vec/audio/boaw.hpp"
#include "seq2vec/audio/mfcc.hpp"
#include "seq2vec/audio/standardizer.hpp"
#include "seq2vec/audio/wav.hpp"

using namespace seq2vec;
using namespace seq2vec::audio;

namespace {

std::vector<std::uint8_t> wav_of(std::vector<std::int16_t> pcm, int rate = 16000) {
  return encode_wav_pcm16(pcm, rate);
}

AudioClip tone(double seconds, double hz, double amp = 0.5, int rate = 16000) {
  AudioClip c;
  c.sample_rate = rate;
  c.samples.resize(static_cast<std::size_t>(std::lround(seconds * rate)));
  for (std::size_t i = 0; i < c.samples.size(); ++i)
    c.samples[i] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate);
  return c;
}

FeatureSequence random_sequence(Eigen::Index T, Eigen::Index d, Rng& rng, double scale = 1.0, double offset = 0.0) {
  FeatureSequence s;
  s.frames.resize(T, d);
  for (Eigen::Index i = 0; i < s.frames.size(); ++i) s.frames.data()[i] = offset + scale * rng.normal();
  return s;
}

// Straight from the definitions: O(N^2) DFT, triangular filters, DCT-II.
Matrix naive_mfcc(const AudioClip& clip, const MfccExtractor& ex) {
  const auto& cfg = ex.config();
  const int W = ex.window_samples(), H = ex.hop_samples(), NFFT = ex.fft_size();
  const std::size_t N = clip.samples.size();
  const Eigen::Index T = static_cast<Eigen::Index>((N + H - 1) / H);
  Matrix out(T, cfg.num_cepstra + 1);
  for (Eigen::Index t = 0; t < T; ++t) {
    std::vector<double> frame(static_cast<std::size_t>(NFFT), 0.0);
    double energy = 0.0;
    for (int i = 0; i < W; ++i) {
      const std::size_t idx = static_cast<std::size_t>(t * H + i);
      double v = 0.0;
      if (idx < N) v = clip.samples[idx] - (idx > 0 ? 0.97 * clip.samples[idx - 1] : 0.0);
      v *= 0.54 - 0.46 * std::cos(2 * std::numbers::pi * i / (W - 1));
      frame[static_cast<std::size_t>(i)] = v;
      energy += v * v;
    }
    Vector power(NFFT / 2 + 1);
    for (int k = 0; k <= NFFT / 2; ++k) {
      std::complex<double> acc = 0.0;
      for (int n = 0; n < NFFT; ++n) acc += frame[static_cast<std::size_t>(n)] * std::polar(1.0, -2 * std::numbers::pi * k * n / NFFT);
      power(k) = std::norm(acc);
    }
    Vector logmel = (ex.filterbank() * power).cwiseMax(1e-10).array().log().matrix();
    out(t, 0) = std::log(energy + 1e-10);
    const int M = cfg.num_filters;
    for (int c = 1; c <= cfg.num_cepstra; ++c) {
      double s = 0.0;
      for (int m = 0; m < M; ++m) s += logmel(m) * std::cos(std::numbers::pi * c * (m + 0.5) / M);
      out(t, c) = std::sqrt(2.0 / M) * s;
    }
  }
  return out;
}

}  // namespace

TEST(Wav, OneSecondAt16k) {
  const auto clip = decode_wav(wav_of(std::vector<std::int16_t>(16000, 3)));
  EXPECT_EQ(clip.samples.size(), 16000u);
  EXPECT_EQ(clip.sample_rate, 16000);
}

TEST(Wav, ZeroPayload) {
  const auto clip = decode_wav(wav_of(std::vector<std::int16_t>(100, 0)));
  for (double s : clip.samples) EXPECT_EQ(s, 0.0);
}

TEST(Wav, ScalingIdentity) {
  const auto clip = decode_wav(wav_of({-32768, 16384, 32767, 0}));
  EXPECT_EQ(clip.samples[0], -1.0);
  EXPECT_EQ(clip.samples[1], 0.5);
  EXPECT_LT(clip.samples[2], 1.0);
}

TEST(Wav, EncodeDecodeRoundTrip) {
  Rng rng(1);
  std::vector<std::int16_t> pcm(777);
  for (auto& s : pcm) s = static_cast<std::int16_t>(static_cast<int>(rng.index(65536)) - 32768);
  const auto clip = decode_wav(wav_of(pcm));
  for (std::size_t i = 0; i < pcm.size(); ++i) EXPECT_EQ(to_pcm16(clip.samples[i]), pcm[i]);
}

TEST(Wav, SkipsUnknownChunks) {
  auto bytes = wav_of({1, 2, 3});
  std::vector<std::uint8_t> list = {'L', 'I', 'S', 'T', 3, 0, 0, 0, 'a', 'b', 'c', 0};
  bytes.insert(bytes.begin() + 36, list.begin(), list.end());
  EXPECT_EQ(decode_wav(bytes).samples.size(), 3u);
}

TEST(Wav, DistinctErrors) {
  auto code_of = [](std::vector<std::uint8_t> b, std::optional<int> rate = 16000) {
    try {
      decode_wav(b, rate);
    } catch (const WavError& e) {
      return static_cast<int>(e.code());
    }
    return -1;
  };
  const auto good = wav_of({1, 2, 3});
  EXPECT_EQ(code_of({'R', 'I', 'F', 'F'}), static_cast<int>(WavErrorCode::MalformedHeader));
  auto no_data = good;
  no_data.resize(36);
  EXPECT_EQ(code_of(no_data), static_cast<int>(WavErrorCode::MalformedHeader));
  auto float_fmt = good;
  float_fmt[20] = 3;
  EXPECT_EQ(code_of(float_fmt), static_cast<int>(WavErrorCode::UnsupportedEncoding));
  auto stereo = good;
  stereo[22] = 2;
  EXPECT_EQ(code_of(stereo), static_cast<int>(WavErrorCode::UnsupportedChannels));
  auto eight_bit = good;
  eight_bit[34] = 8;
  EXPECT_EQ(code_of(eight_bit), static_cast<int>(WavErrorCode::UnsupportedBitDepth));
  const auto at_8k = wav_of({1, 2, 3}, 8000);
  EXPECT_EQ(code_of(at_8k), static_cast<int>(WavErrorCode::UnsupportedSampleRate));
  EXPECT_EQ(code_of(at_8k, std::nullopt), -1);
}

TEST(Mfcc, TenSecondsGives167Frames) {
  const auto f = extract_mfcc(tone(10.0, 440.0));
  EXPECT_EQ(f.frame_count(), 167);
  EXPECT_EQ(f.dim(), 13);
}

TEST(Mfcc, OneWindowGivesOneFrame) {
  EXPECT_EQ(extract_mfcc(tone(0.06, 440.0)).frame_count(), 1);
}

TEST(Mfcc, FrameCountLaw) {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    AudioClip c;
    c.sample_rate = 16000;
    c.samples.assign(1 + rng.index(40000), 0.1);
    const auto expected = static_cast<Eigen::Index>(std::ceil(static_cast<double>(c.samples.size()) / 960.0));
    EXPECT_EQ(extract_mfcc(c).frame_count(), expected);
  }
  AudioClip c;
  c.sample_rate = 16000;
  c.samples.assign(1000, 0.1);
  EXPECT_EQ(extract_mfcc(c, 25.0, 10.0).frame_count(), 7);  // ceil(1000 / 160)
}

TEST(Mfcc, SilenceSitsOnTheEnergyFloor) {
  AudioClip c;
  c.sample_rate = 16000;
  c.samples.assign(5000, 0.0);
  const auto f = extract_mfcc(c);
  for (Eigen::Index t = 0; t < f.frame_count(); ++t) EXPECT_DOUBLE_EQ(f.frames(t, 0), std::log(1e-10));
}

TEST(Mfcc, MatchesNaiveDefinition) {
  Rng rng(3);
  AudioClip c = tone(0.2, 1234.0, 0.3);
  for (auto& s : c.samples) s += 0.05 * rng.normal();
  const MfccExtractor ex(16000);
  const auto fast = ex.extract(c);
  const Matrix slow = naive_mfcc(c, ex);
  EXPECT_LT((fast.frames - slow).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Mfcc, GeometryDefaults) {
  const MfccExtractor ex(16000);
  EXPECT_EQ(ex.window_samples(), 960);
  EXPECT_EQ(ex.hop_samples(), 960);
  EXPECT_EQ(ex.fft_size(), 1024);
  EXPECT_EQ(ex.filterbank().rows(), 26);
}

TEST(Mfcc, DeterministicAndRejectsEmpty) {
  const auto c = tone(0.5, 700.0);
  EXPECT_EQ(extract_mfcc(c).frames, extract_mfcc(c).frames);
  AudioClip empty;
  empty.sample_rate = 16000;
  EXPECT_THROW(extract_mfcc(empty), DataError);
}

TEST(Mfcc, LouderSignalHasHigherEnergy) {
  const auto quiet = extract_mfcc(tone(0.12, 500.0, 0.01));
  const auto loud = extract_mfcc(tone(0.12, 500.0, 0.5));
  EXPECT_GT(loud.frames(0, 0), quiet.frames(0, 0) + 5.0);
}

TEST(Standardizer, TwoPointStatistics) {
  FeatureSequence s;
  s.frames = Matrix::Zero(2, 13);
  s.frames.row(1).setConstant(2.0);
  const auto st = fit_standardizer(std::span(&s, 1));
  EXPECT_TRUE(st.mean.isConstant(1.0));
  EXPECT_TRUE(st.std.isConstant(1.0));
}

TEST(Standardizer, ConstantCorpusIsFloored) {
  FeatureSequence s;
  s.frames = Matrix::Constant(10, 3, 4.2);
  const auto st = fit_standardizer(std::span(&s, 1));
  EXPECT_TRUE(st.std.isConstant(kStdFloor));
  EXPECT_TRUE(apply_standardizer(s, st).frames.allFinite());
}

TEST(Standardizer, StandardizedCorpusHasZeroMeanUnitStd) {
  Rng rng(4);
  std::vector<FeatureSequence> corpus;
  for (int i = 0; i < 10; ++i) corpus.push_back(random_sequence(100, 13, rng, 3.0, 5.0));
  const auto st = fit_standardizer(corpus);
  Matrix pooled(1000, 13);
  for (int i = 0; i < 10; ++i) pooled.middleRows(100 * i, 100) = apply_standardizer(corpus[static_cast<std::size_t>(i)], st).frames;
  const RowVector mean = pooled.colwise().mean();
  const RowVector sd = ((pooled.rowwise() - mean).array().square().colwise().sum() / 1000.0).sqrt();
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((sd.array() - 1.0).abs().maxCoeff(), 1e-10);
}

TEST(Standardizer, ApplyExamplesAndRoundTrip) {
  Standardizer st{Vector::LinSpaced(3, 1, 3), Vector::LinSpaced(3, 0.5, 2)};
  FeatureSequence s;
  s.frames = st.mean.transpose();
  EXPECT_TRUE(apply_standardizer(s, st).frames.isZero(0.0));
  s.frames = (st.mean + st.std).transpose();
  EXPECT_TRUE(apply_standardizer(s, st).frames.isOnes(1e-15));
  Standardizer ident{Vector::Zero(3), Vector::Ones(3)};
  Rng rng(5);
  const auto r = random_sequence(7, 3, rng);
  EXPECT_EQ(apply_standardizer(r, ident).frames, r.frames);
  const auto back = invert_standardizer(apply_standardizer(r, st), st);
  EXPECT_LT(((back.frames - r.frames).array().abs() / r.frames.array().abs().max(1.0)).maxCoeff(), 1e-9);
  FeatureSequence wrong;
  wrong.frames = Matrix::Zero(2, 4);
  EXPECT_THROW(apply_standardizer(wrong, st), DataError);
}

TEST(Standardizer, NeedsTwoFrames) {
  FeatureSequence s;
  s.frames = Matrix::Zero(1, 3);
  EXPECT_THROW(fit_standardizer(std::span(&s, 1)), DataError);
}

TEST(KMeans, ExactFitOnDistinctPoints) {
  FeatureSequence s;
  s.frames.resize(3, 2);
  s.frames << 0, 0, 5, 1, -3, 4;
  const auto cb = fit_boaw_codebook(std::span(&s, 1), 3, 7, 1);
  for (Eigen::Index i = 0; i < 3; ++i) {
    double best = 1e9;
    for (Eigen::Index c = 0; c < 3; ++c) best = std::min(best, (cb.centroids.row(c) - s.frames.row(i)).norm());
    EXPECT_EQ(best, 0.0);
  }
}

TEST(KMeans, SingleClusterIsTheMean) {
  Rng rng(6);
  const auto s = random_sequence(50, 4, rng);
  const auto res = kmeans(s.frames, 1, 3);
  EXPECT_LT((res.centroids.row(0) - s.frames.colwise().mean()).norm(), 1e-12);
}

TEST(KMeans, RecoversSeparatedBlobs) {
  Rng rng(7);
  Matrix pts(400, 2);
  const RowVector a(RowVector::Constant(2, -5.0)), b(RowVector::Constant(2, 5.0));
  for (Eigen::Index i = 0; i < 400; ++i) pts.row(i) = (i % 2 ? a : b) + 0.3 * RowVector{{rng.normal(), rng.normal()}};
  const auto res = kmeans(pts, 2, 11);
  for (const RowVector& m : {a, b}) {
    const double d = std::min((res.centroids.row(0) - m).norm(), (res.centroids.row(1) - m).norm());
    EXPECT_LT(d, 0.1);
  }
}

TEST(KMeans, ObjectiveNeverIncreases) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_sequence(300, 3, rng);
    const auto res = kmeans(s.frames, 8 + trial, rng.next(), {25, 0.0});
    for (std::size_t i = 1; i < res.objective.size(); ++i) EXPECT_LE(res.objective[i], res.objective[i - 1]);
  }
}

TEST(KMeans, DeterministicForSeedAndRejectsTooFewPoints) {
  Rng rng(9);
  const auto s = random_sequence(100, 3, rng);
  EXPECT_EQ(kmeans(s.frames, 5, 1).centroids, kmeans(s.frames, 5, 1).centroids);
  EXPECT_THROW(kmeans(s.frames.topRows(3), 5, 1), DataError);
}

TEST(Boaw, HistogramIsProbabilityVector) {
  Rng rng(10);
  std::vector<FeatureSequence> train;
  for (int i = 0; i < 5; ++i) train.push_back(random_sequence(40, 3, rng));
  const auto cb = fit_boaw_codebook(train, 16, 1, 4);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector h = boaw_encode(random_sequence(1 + static_cast<Eigen::Index>(rng.index(30)), 3, rng), cb);
    EXPECT_NEAR(h.sum(), 1.0, 1e-9);
    EXPECT_GE(h.minCoeff(), 0.0);
  }
}

TEST(Boaw, SingleAssignment) {
  BoawCodebook cb{Matrix(2, 1), 1};
  cb.centroids << 0.0, 10.0;
  FeatureSequence s;
  s.frames = Matrix(3, 1);
  s.frames << 0.1, -1.0, 2.0;
  const Vector h = boaw_encode(s, cb);
  EXPECT_EQ(h(0), 1.0);
  EXPECT_EQ(h(1), 0.0);
}

TEST(Boaw, MultiAssignmentSplitsVotes) {
  BoawCodebook cb{Matrix(4, 1), 2};
  cb.centroids << 0.0, 1.0, 5.0, 9.0;
  FeatureSequence s;
  s.frames = Matrix::Constant(1, 1, 0.4);
  const Vector h = boaw_encode(s, cb);
  EXPECT_EQ(h(0), 0.5);
  EXPECT_EQ(h(1), 0.5);
  EXPECT_EQ((h.array() == 0.5).count(), 2);
  FeatureSequence wrong;
  wrong.frames = Matrix::Zero(1, 2);
  EXPECT_THROW(boaw_encode(wrong, cb), DataError);
}
