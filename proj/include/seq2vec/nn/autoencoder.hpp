#pragma once

#include <charconv>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seq2vec/nn/affine.hpp"
#include "seq2vec/nn/gru.hpp"

namespace seq2vec::nn {

/// Network shape in "<units>-<layers>" notation, e.g. 512-2.
struct ModelShape {
  int hidden_units = 0;
  int num_layers = 0;

  static ModelShape parse(std::string_view text) {
    const auto dash = text.find('-');
    if (dash == std::string_view::npos) throw ConfigError("model shape must look like <units>-<layers>, got '" + std::string(text) + "'");
    ModelShape s;
    auto parse_int = [&](std::string_view part, int& out) {
      const auto r = std::from_chars(part.data(), part.data() + part.size(), out);
      if (r.ec != std::errc{} || r.ptr != part.data() + part.size() || out <= 0)
        throw ConfigError("invalid model shape '" + std::string(text) + "'");
    };
    parse_int(text.substr(0, dash), s.hidden_units);
    parse_int(text.substr(dash + 1), s.num_layers);
    return s;
  }

  std::string str() const { return std::to_string(hidden_units) + "-" + std::to_string(num_layers); }
  int representation_size() const { return hidden_units * num_layers; }
  bool operator==(const ModelShape&) const = default;
};

/// Fixed-length sequence embedding: every encoder layer's final state,
/// concatenated bottom layer first.
struct Representation {
  Vector v;
};

/// GRU encoder and decoder stacks of equal depth and width, plus the affine
/// readout from the decoder's top hidden state to feature space.
struct EncoderDecoderModel {
  int feature_dim = 0;
  ModelShape shape;
  std::vector<GruLayerParams> encoder;
  std::vector<GruLayerParams> decoder;
  AffineParams projection;

  static EncoderDecoderModel zeros(int feature_dim, ModelShape shape) {
    EncoderDecoderModel m;
    m.feature_dim = feature_dim;
    m.shape = shape;
    for (int l = 0; l < shape.num_layers; ++l) {
      const int in = l == 0 ? feature_dim : shape.hidden_units;
      m.encoder.push_back(GruLayerParams::zeros(in, shape.hidden_units));
      m.decoder.push_back(GruLayerParams::zeros(in, shape.hidden_units));
    }
    m.projection = AffineParams::zeros(shape.hidden_units, feature_dim);
    return m;
  }

  static EncoderDecoderModel create(int feature_dim, ModelShape shape, std::uint64_t seed) {
    if (feature_dim <= 0 || shape.hidden_units <= 0 || shape.num_layers <= 0)
      throw ConfigError("model dimensions must be positive");
    Rng rng(seed);
    EncoderDecoderModel m;
    m.feature_dim = feature_dim;
    m.shape = shape;
    for (int l = 0; l < shape.num_layers; ++l)
      m.encoder.push_back(GruLayerParams::glorot(l == 0 ? feature_dim : shape.hidden_units, shape.hidden_units, rng));
    for (int l = 0; l < shape.num_layers; ++l)
      m.decoder.push_back(GruLayerParams::glorot(l == 0 ? feature_dim : shape.hidden_units, shape.hidden_units, rng));
    m.projection = AffineParams::glorot(shape.hidden_units, feature_dim, rng);
    return m;
  }

  void validate() const {
    if (static_cast<int>(encoder.size()) != shape.num_layers || decoder.size() != encoder.size())
      throw DataError("encoder and decoder must both have " + std::to_string(shape.num_layers) + " layers");
    for (std::size_t l = 0; l < encoder.size(); ++l) {
      const int in = l == 0 ? feature_dim : shape.hidden_units;
      for (const auto* p : {&encoder[l], &decoder[l]})
        if (!p->shapes_consistent() || p->input_dim() != in || p->hidden() != shape.hidden_units)
          throw DataError("layer " + std::to_string(l) + " does not match model shape " + shape.str());
    }
    if (projection.input_dim() != shape.hidden_units || projection.output_dim() != feature_dim ||
        projection.b.size() != feature_dim)
      throw DataError("output projection does not match model shape");
  }

  template <class F>
  void visit(F&& f) {
    for (std::size_t l = 0; l < encoder.size(); ++l) {
      const std::string prefix = "encoder/" + std::to_string(l) + "/";
      encoder[l].visit([&](std::string_view name, std::span<double> d) { f(std::string_view(prefix + std::string(name)), d); });
    }
    for (std::size_t l = 0; l < decoder.size(); ++l) {
      const std::string prefix = "decoder/" + std::to_string(l) + "/";
      decoder[l].visit([&](std::string_view name, std::span<double> d) { f(std::string_view(prefix + std::string(name)), d); });
    }
    projection.visit([&](std::string_view name, std::span<double> d) { f(std::string_view("projection/" + std::string(name)), d); });
  }
};

struct BatchLoss {
  double loss = 0.0;                   // mean over sequences
  std::vector<double> per_sequence;    // masked MSE of each column
  std::vector<Matrix> reconstruction;  // T entries, d x B
  std::vector<Matrix> encoder_final;   // per layer, n x B
};

namespace detail {

inline std::vector<Matrix> reverse_valid_prefix(std::span<const Matrix> steps, std::span<const int> lengths) {
  const std::size_t T = steps.size();
  std::vector<Matrix> rev(T, Matrix::Zero(steps.empty() ? 0 : steps[0].rows(), static_cast<Eigen::Index>(lengths.size())));
  for (std::size_t b = 0; b < lengths.size(); ++b) {
    const auto len = static_cast<std::size_t>(lengths[b]);
    for (std::size_t s = 0; s < len; ++s) rev[s].col(static_cast<Eigen::Index>(b)) = steps[len - 1 - s].col(static_cast<Eigen::Index>(b));
  }
  return rev;
}

inline std::vector<Matrix> shift_right(std::span<const Matrix> steps) {
  std::vector<Matrix> out;
  out.reserve(steps.size());
  if (steps.empty()) return out;
  out.push_back(Matrix::Zero(steps[0].rows(), steps[0].cols()));
  for (std::size_t t = 1; t < steps.size(); ++t) out.push_back(steps[t - 1]);
  return out;
}

inline void check_batch(const EncoderDecoderModel& model, std::span<const Matrix> steps, std::span<const int> lengths) {
  if (steps.empty() || lengths.empty()) throw DataError("empty batch");
  for (const Matrix& s : steps)
    if (s.rows() != model.feature_dim || s.cols() != static_cast<Eigen::Index>(lengths.size()))
      throw DataError("batch feature dimension " + std::to_string(s.rows()) + " does not match model (" +
                      std::to_string(model.feature_dim) + ")");
  for (int len : lengths)
    if (len < 1 || len > static_cast<int>(steps.size())) throw DataError("every sequence needs at least one valid frame");
}

}  // namespace detail

/// Runs the encoder over the time-reversed valid prefix of each column and
/// returns the final state of every layer (n x B each).
inline std::vector<Matrix> encode_batch(const EncoderDecoderModel& model, std::span<const Matrix> steps,
                                        std::span<const int> lengths) {
  detail::check_batch(model, steps, lengths);
  std::vector<Matrix> input = detail::reverse_valid_prefix(steps, lengths);
  std::vector<Matrix> finals;
  const Matrix h0 = Matrix::Zero(model.shape.hidden_units, static_cast<Eigen::Index>(lengths.size()));
  for (const auto& layer : model.encoder) {
    auto r = gru_forward(layer, input, lengths, h0, false);
    finals.push_back(std::move(r.h_final));
    input = std::move(r.hidden);
  }
  return finals;
}

/// Masked reconstruction loss of a padded batch, with optional gradients.
///
/// The encoder reads each valid prefix backwards; decoder layer l starts
/// from encoder layer l's final state and receives x_{t-1} at step t (a
/// zero vector at t = 0). Each sequence's loss is the mean over its valid
/// frames of the squared error summed over feature dimensions; the batch
/// loss is the plain mean over sequences.
inline BatchLoss autoencoder_forward_backward(const EncoderDecoderModel& model, std::span<const Matrix> steps,
                                              std::span<const int> lengths, EncoderDecoderModel* grads = nullptr) {
  detail::check_batch(model, steps, lengths);
  const std::size_t L = model.encoder.size();
  const std::size_t T = steps.size();
  const auto B = static_cast<Eigen::Index>(lengths.size());
  const bool want_grads = grads != nullptr;

  std::vector<GruSequenceResult> enc, dec;
  std::vector<Matrix> input = detail::reverse_valid_prefix(steps, lengths);
  const Matrix zero_state = Matrix::Zero(model.shape.hidden_units, B);
  for (std::size_t l = 0; l < L; ++l) {
    enc.push_back(gru_forward(model.encoder[l], l == 0 ? std::span<const Matrix>(input) : std::span<const Matrix>(enc[l - 1].hidden),
                              lengths, zero_state, want_grads));
  }
  const std::vector<Matrix> dec_input = detail::shift_right(steps);
  for (std::size_t l = 0; l < L; ++l) {
    dec.push_back(gru_forward(model.decoder[l], l == 0 ? std::span<const Matrix>(dec_input) : std::span<const Matrix>(dec[l - 1].hidden),
                              lengths, enc[l].h_final, want_grads));
  }

  BatchLoss out;
  out.per_sequence.assign(static_cast<std::size_t>(B), 0.0);
  out.reconstruction.reserve(T);
  std::vector<Matrix> grad_out;
  if (want_grads) grad_out.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    Matrix y = affine_forward(dec.back().hidden[t], model.projection);
    Matrix diff = y - steps[t];
    for (Eigen::Index b = 0; b < B; ++b) {
      const int len = lengths[static_cast<std::size_t>(b)];
      if (static_cast<int>(t) < len) {
        out.per_sequence[static_cast<std::size_t>(b)] += diff.col(b).squaredNorm() / len;
        diff.col(b) *= 2.0 / (static_cast<double>(len) * static_cast<double>(B));
      } else {
        diff.col(b).setZero();
      }
    }
    if (want_grads) grad_out.push_back(std::move(diff));
    out.reconstruction.push_back(std::move(y));
  }
  double sum = 0.0;
  for (double v : out.per_sequence) sum += v;
  out.loss = sum / static_cast<double>(B);
  for (auto& e : enc) out.encoder_final.push_back(e.h_final);

  if (!want_grads) return out;

  *grads = EncoderDecoderModel::zeros(model.feature_dim, model.shape);
  std::vector<Matrix> grad_top(T);
  for (std::size_t t = 0; t < T; ++t) {
    AffineBackward ab = affine_backward(dec.back().hidden[t], grad_out[t], model.projection);
    grads->projection.W += ab.grads.W;
    grads->projection.b += ab.grads.b;
    grad_top[t] = std::move(ab.input_grad);
  }

  std::vector<Matrix> grad_dec_h0(L);
  std::vector<Matrix> upstream = std::move(grad_top);
  for (std::size_t l = L; l-- > 0;) {
    GruBackwardResult r = gru_backward(model.decoder[l], dec[l].cache, upstream, zero_state);
    grads->decoder[l] = std::move(r.grads);
    grad_dec_h0[l] = std::move(r.grad_h0);
    upstream = std::move(r.input_grads);
  }
  upstream.clear();
  for (std::size_t l = L; l-- > 0;) {
    GruBackwardResult r = gru_backward(model.encoder[l], enc[l].cache, upstream, grad_dec_h0[l]);
    grads->encoder[l] = std::move(r.grads);
    upstream = std::move(r.input_grads);
  }
  return out;
}

// ---- single-sequence interface -------------------------------------------------

struct ReconstructionResult {
  Matrix x_hat;  // T x d
  double loss = 0.0;
};

namespace detail {

inline std::vector<Matrix> to_steps(const Matrix& seq) {
  std::vector<Matrix> steps;
  steps.reserve(static_cast<std::size_t>(seq.rows()));
  for (Eigen::Index t = 0; t < seq.rows(); ++t) steps.emplace_back(seq.row(t).transpose());
  return steps;
}

inline int checked_length(const Matrix& seq, const std::vector<bool>& mask) {
  if (static_cast<Eigen::Index>(mask.size()) != seq.rows()) throw DataError("mask length does not match sequence length");
  const int len = prefix_length(mask);
  if (len < 1) throw DataError("sequence has no valid frames");
  return len;
}

}  // namespace detail

inline std::vector<bool> full_mask(Eigen::Index frames) { return std::vector<bool>(static_cast<std::size_t>(frames), true); }

/// (1/T_valid) * sum over valid t of ||x_t - x_hat_t||^2. Rows are frames.
inline double masked_mse(const Matrix& x, const Matrix& x_hat, const std::vector<bool>& mask) {
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols()) throw DataError("masked_mse: shape mismatch");
  if (static_cast<Eigen::Index>(mask.size()) != x.rows()) throw DataError("masked_mse: mask length mismatch");
  const int len = prefix_length(mask);
  if (len == 0) return 0.0;
  double sum = 0.0;
  // one running sum in frame-major order, no blocked reductions
  for (int t = 0; t < len; ++t)
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double e = x(t, j) - x_hat(t, j);
      sum += e * e;
    }
  return sum / len;
}

/// Encoder final state per layer, each an n-vector.
inline std::vector<Vector> encoder_final_states(const Matrix& seq, const std::vector<bool>& mask,
                                                const EncoderDecoderModel& model) {
  if (seq.cols() != model.feature_dim) throw DataError("encode: sequence dimension does not match model");
  const int lengths[1] = {detail::checked_length(seq, mask)};
  const auto steps = detail::to_steps(seq);
  std::vector<Vector> out;
  for (auto& m : encode_batch(model, steps, lengths)) out.emplace_back(m.col(0));
  return out;
}

inline Representation encode(const Matrix& seq, const std::vector<bool>& mask, const EncoderDecoderModel& model) {
  const auto states = encoder_final_states(seq, mask, model);
  Representation r;
  r.v.resize(model.shape.representation_size());
  for (std::size_t l = 0; l < states.size(); ++l)
    r.v.segment(static_cast<Eigen::Index>(l) * model.shape.hidden_units, model.shape.hidden_units) = states[l];
  return r;
}

/// Teacher-forced reconstruction from given initial decoder states.
inline ReconstructionResult decode_teacher_forced(const Matrix& seq, const std::vector<bool>& mask,
                                                  const EncoderDecoderModel& model,
                                                  const std::vector<Vector>& encoder_final) {
  if (seq.cols() != model.feature_dim) throw DataError("decode: sequence dimension does not match model");
  if (encoder_final.size() != model.decoder.size()) throw DataError("decode: expected one initial state per decoder layer");
  const int lengths[1] = {detail::checked_length(seq, mask)};
  const auto steps = detail::to_steps(seq);
  const auto dec_input = detail::shift_right(steps);

  std::vector<Matrix> input = dec_input;
  for (std::size_t l = 0; l < model.decoder.size(); ++l) {
    if (encoder_final[l].size() != model.shape.hidden_units) throw DataError("decode: initial state has the wrong width");
    input = gru_forward(model.decoder[l], input, lengths, Matrix(encoder_final[l]), false).hidden;
  }
  ReconstructionResult out;
  out.x_hat.resize(seq.rows(), seq.cols());
  for (std::size_t t = 0; t < input.size(); ++t)
    out.x_hat.row(static_cast<Eigen::Index>(t)) = affine_forward(input[t], model.projection).col(0).transpose();
  out.loss = masked_mse(seq, out.x_hat, mask);
  return out;
}

inline ReconstructionResult reconstruct(const Matrix& seq, const std::vector<bool>& mask, const EncoderDecoderModel& model) {
  return decode_teacher_forced(seq, mask, model, encoder_final_states(seq, mask, model));
}

}  // namespace seq2vec::nn
