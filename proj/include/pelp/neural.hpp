#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "pelp/preprocess.hpp"
#include "pelp/tensor.hpp"

namespace pelp {

/// Every learnable tensor of the encoder / attention-decoder. Gate blocks in
/// the GRU matrices are stacked as [reset; update; candidate].
///
/// Encoder step (x = embedded input token, h = previous state):
///   r  = sigmoid(Wi_r x + bi_r + Wh_r h + bh_r)
///   z  = sigmoid(Wi_z x + bi_z + Wh_z h + bh_z)
///   n  = tanh(Wi_n x + bi_n + r * (Wh_n h + bh_n))
///   h' = (1 - z) * n + z * h
///
/// Decoder step (additive attention, query = previous decoder state):
///   a_j     = tanh(Wq h + Wk o_j + b_att)      for every encoder output o_j
///   w       = softmax_j(v . a_j)
///   c       = sum_j w_j o_j
///   h'      = GRU([dropout(E_dec[token]); c], h)
///   logits  = W_out h' + b_out
/// The decoder starts from the encoder's final state.
struct Parameters {
  Tensor encoder_embedding;   // V x d
  Tensor encoder_w_input;     // 3d x d
  Tensor encoder_w_hidden;    // 3d x d
  Tensor encoder_b_input;     // 3d
  Tensor encoder_b_hidden;    // 3d
  Tensor decoder_embedding;   // V x d
  Tensor attention_w_query;   // d x d
  Tensor attention_w_key;     // d x d
  Tensor attention_bias;      // d
  Tensor attention_v;         // d
  Tensor decoder_w_input;     // 3d x 2d
  Tensor decoder_w_hidden;    // 3d x d
  Tensor decoder_b_input;     // 3d
  Tensor decoder_b_hidden;    // 3d
  Tensor output_weight;       // V x d
  Tensor output_bias;         // V

  /// Visits tensors in their fixed checkpoint order as f(name, tensor).
  template <class F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <class F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

  Parameters zeros_like() const;
  std::size_t count() const;
  bool all_finite() const;
  bool operator==(const Parameters&) const = default;

 private:
  template <class Self, class F>
  static void visit(Self& self, F& f) {
    f(std::string_view("encoder_embedding"), self.encoder_embedding);
    f(std::string_view("encoder_w_input"), self.encoder_w_input);
    f(std::string_view("encoder_w_hidden"), self.encoder_w_hidden);
    f(std::string_view("encoder_b_input"), self.encoder_b_input);
    f(std::string_view("encoder_b_hidden"), self.encoder_b_hidden);
    f(std::string_view("decoder_embedding"), self.decoder_embedding);
    f(std::string_view("attention_w_query"), self.attention_w_query);
    f(std::string_view("attention_w_key"), self.attention_w_key);
    f(std::string_view("attention_bias"), self.attention_bias);
    f(std::string_view("attention_v"), self.attention_v);
    f(std::string_view("decoder_w_input"), self.decoder_w_input);
    f(std::string_view("decoder_w_hidden"), self.decoder_w_hidden);
    f(std::string_view("decoder_b_input"), self.decoder_b_input);
    f(std::string_view("decoder_b_hidden"), self.decoder_b_hidden);
    f(std::string_view("output_weight"), self.output_weight);
    f(std::string_view("output_bias"), self.output_bias);
  }
};

using Gradients = Parameters;

struct ModelState {
  std::size_t vocab_size = 0;
  std::size_t hidden_size = 0;
  double dropout = 0.0;
  std::uint64_t seed = 0;
  Parameters params;

  bool operator==(const ModelState&) const = default;
};

/// Searchable and fixed training hyper-parameters.
struct HyperParams {
  double learning_rate = 0.05;
  std::size_t hidden_size = 64;
  double dropout = 0.001;
  WindowSpec window;
  std::size_t max_tokens = 0;  // 0: derive from the training pairs
  std::uint64_t seed = 0;

  static constexpr double kMinLearningRate = 0.001, kMaxLearningRate = 0.3;
  static constexpr std::size_t kMinHidden = 16, kMaxHidden = 1024;
  static constexpr double kMinDropout = 0.001, kMaxDropout = 0.3;

  /// Throws ConfigError for values outside the searchable ranges.
  void validate() const;
};

/// Biases zero, embedding tables standard normal, every other weight uniform
/// in [-1/sqrt(d), 1/sqrt(d)], all drawn from one seeded mt19937_64. No range
/// checks, so tests can build tiny models.
ModelState init_model(std::size_t vocab_size, std::size_t hidden_size, double dropout, std::uint64_t seed);
/// Validated entry point.
ModelState init_model(std::size_t vocab_size, const HyperParams& hyper);

struct EncoderOutput {
  Tensor outputs;                   // T x d
  Buffer final_hidden; // d (zero for empty input)
};

/// Throws ContractError for ids outside the vocabulary.
EncoderOutput encode(const ModelState& model, std::span<const TokenId> x);

/// Encoder outputs together with their projected attention keys, so that
/// repeated decode steps do not recompute them.
struct AttentionMemory {
  Tensor outputs;  // T x d
  Tensor keys;     // T x d  (outputs * Wk^T + b_att)
};

AttentionMemory attention_memory(const ModelState& model, Tensor encoder_outputs);

struct DecodeStep {
  Buffer logits;     // V
  Buffer hidden;     // d
  Buffer attention;  // T, sums to one
};

/// One inference-mode decoder step. Throws ContractError on empty memory.
DecodeStep decode_step(const ModelState& model, TokenId prev_token, std::span<const double> hidden,
                       const AttentionMemory& memory);
DecodeStep decode_step(const ModelState& model, TokenId prev_token, std::span<const double> hidden,
                       const Tensor& encoder_outputs);

/// Everything backward() needs from a teacher-forced forward pass. Matrices
/// are stored flat, row-major, one row per time step.
struct ForwardCache {
  TokenSequence x, y;
  std::vector<TokenId> decoder_inputs;  // SOS, y[0], ..., y[m-2]
  // encoder, T steps
  Buffer enc_input, enc_prev, enc_r, enc_z, enc_n, enc_ghn, enc_out;
  Buffer keys;
  // decoder, m steps
  Buffer dec_input;  // m x 2d: [dropped embedding; context]
  Buffer dec_prev, dec_r, dec_z, dec_n, dec_ghn, dec_out;
  Buffer dropout_scale;  // m x d
  Buffer attention;      // m x T
  Buffer attention_act;  // m x T x d (tanh activations)
  Buffer probs;          // m x V
};

struct ForwardResult {
  double loss = 0.0;  // mean token cross-entropy over y
  ForwardCache cache;
};

/// Teacher-forced loss. Dropout is active only when `dropout_rng` is given.
ForwardResult forward_loss(const ModelState& model, const TrainingPair& pair, std::mt19937_64* dropout_rng = nullptr);
/// Inference-mode loss without keeping a cache.
double evaluate_loss(const ModelState& model, const TrainingPair& pair);

/// Exact gradients of `loss_scale * loss` with respect to every parameter.
Gradients backward(const ModelState& model, const ForwardCache& cache, double loss_scale = 1.0);

/// theta -= lr * grad. Throws NumericError (leaving the model untouched) if
/// any gradient entry is non-finite.
void sgd_step(ModelState& model, const Gradients& grads, double learning_rate);

}  // namespace pelp
