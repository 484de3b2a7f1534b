#include "pelp/neural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "pelp/error.hpp"

namespace pelp {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using Vec = Eigen::VectorXd;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

ConstMatMap mat(const Tensor& t) {
  return {t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}
MatMap mat(Tensor& t) {
  return {t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}
ConstVecMap vec(const Tensor& t) { return {t.data(), static_cast<Eigen::Index>(t.size())}; }
VecMap vec(Tensor& t) { return {t.data(), static_cast<Eigen::Index>(t.size())}; }

ConstMatMap rows(const Buffer& v, std::size_t r, std::size_t c) {
  return {v.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)};
}
MatMap rows(Buffer& v, std::size_t r, std::size_t c) {
  return {v.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)};
}

Eigen::Index ix(std::size_t n) { return static_cast<Eigen::Index>(n); }

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

struct GruWeights {
  const Tensor& w_input;
  const Tensor& w_hidden;
  const Tensor& b_input;
  const Tensor& b_hidden;
};

GruWeights encoder_gru(const Parameters& p) {
  return {p.encoder_w_input, p.encoder_w_hidden, p.encoder_b_input, p.encoder_b_hidden};
}
GruWeights decoder_gru(const Parameters& p) {
  return {p.decoder_w_input, p.decoder_w_hidden, p.decoder_b_input, p.decoder_b_hidden};
}

/// One GRU step given the precomputed input projection gi = Wi x + bi.
void gru_step(const GruWeights& g, std::size_t d, const double* gi, const double* h, double* r, double* z,
              double* n, double* ghn, double* out) {
  const Vec gh = mat(g.w_hidden) * ConstVecMap(h, ix(d)) + vec(g.b_hidden);
  for (std::size_t i = 0; i < d; ++i) {
    r[i] = sigmoid(gi[i] + gh[ix(i)]);
    z[i] = sigmoid(gi[d + i] + gh[ix(d + i)]);
    ghn[i] = gh[ix(2 * d + i)];
    n[i] = std::tanh(gi[2 * d + i] + r[i] * ghn[i]);
    out[i] = (1.0 - z[i]) * n[i] + z[i] * h[i];
  }
}

/// Backward through one GRU step. Writes the gate pre-activation gradients
/// and returns dL/dh_prev.
Vec gru_step_backward(const GruWeights& g, std::size_t d, const double* prev, const double* r, const double* z,
                      const double* n, const double* ghn, const Vec& dh, double* dgi, double* dgh) {
  Vec dprev(ix(d));
  for (std::size_t i = 0; i < d; ++i) {
    const double dhi = dh[ix(i)];
    const double dn_pre = dhi * (1.0 - z[i]) * (1.0 - n[i] * n[i]);
    const double dz_pre = dhi * (prev[i] - n[i]) * z[i] * (1.0 - z[i]);
    const double dr_pre = dn_pre * ghn[i] * r[i] * (1.0 - r[i]);
    dgi[i] = dr_pre;
    dgi[d + i] = dz_pre;
    dgi[2 * d + i] = dn_pre;
    dgh[i] = dr_pre;
    dgh[d + i] = dz_pre;
    dgh[2 * d + i] = dn_pre * r[i];
    dprev[ix(i)] = dhi * z[i];
  }
  dprev.noalias() += mat(g.w_hidden).transpose() * ConstVecMap(dgh, ix(3 * d));
  return dprev;
}

void check_tokens(std::span<const TokenId> tokens, std::size_t vocab_size, const char* what) {
  for (const TokenId t : tokens) {
    if (t >= vocab_size) {
      throw ContractError(std::string(what) + " token id " + std::to_string(t) + " outside vocabulary of size " +
                          std::to_string(vocab_size));
    }
  }
}

/// Numerically stable softmax in place; returns log-sum-exp of the input.
double softmax_inplace(Eigen::Ref<Vec> v) {
  const double mx = v.maxCoeff();
  v = (v.array() - mx).exp();
  const double sum = v.sum();
  v /= sum;
  return mx + std::log(sum);
}

struct EncoderTrace {
  Buffer input, prev, r, z, n, ghn, out;
};

EncoderTrace run_encoder(const ModelState& model, std::span<const TokenId> x) {
  const std::size_t d = model.hidden_size;
  const std::size_t T = x.size();
  const Parameters& p = model.params;
  EncoderTrace e;
  e.input.resize(T * d);
  e.prev.assign(T * d, 0.0);
  e.r.resize(T * d);
  e.z.resize(T * d);
  e.n.resize(T * d);
  e.ghn.resize(T * d);
  e.out.resize(T * d);
  if (T == 0) return e;
  for (std::size_t t = 0; t < T; ++t) {
    const auto row = p.encoder_embedding.row(x[t]);
    std::copy(row.begin(), row.end(), e.input.begin() + static_cast<std::ptrdiff_t>(t * d));
  }
  RowMat gi = rows(e.input, T, d) * mat(p.encoder_w_input).transpose();
  gi.rowwise() += vec(p.encoder_b_input).transpose();
  const GruWeights g = encoder_gru(p);
  for (std::size_t t = 0; t < T; ++t) {
    double* prev = e.prev.data() + t * d;
    if (t > 0) std::copy_n(e.out.data() + (t - 1) * d, d, prev);
    gru_step(g, d, gi.data() + t * 3 * d, prev, e.r.data() + t * d, e.z.data() + t * d, e.n.data() + t * d,
             e.ghn.data() + t * d, e.out.data() + t * d);
  }
  return e;
}

RowMat project_keys(const Parameters& p, const double* outputs, std::size_t T, std::size_t d) {
  RowMat keys = ConstMatMap(outputs, ix(T), ix(d)) * mat(p.attention_w_key).transpose();
  keys.rowwise() += vec(p.attention_bias).transpose();
  return keys;
}

}  // namespace

// ---------------------------------------------------------------------------

Parameters Parameters::zeros_like() const {
  Parameters out;
  const auto& self = *this;
  out.for_each([&](std::string_view name, Tensor& t) {
    self.for_each([&](std::string_view other, const Tensor& src) {
      if (name == other) t = Tensor(src.shape());
    });
  });
  return out;
}

std::size_t Parameters::count() const {
  std::size_t n = 0;
  for_each([&](std::string_view, const Tensor& t) { n += t.size(); });
  return n;
}

bool Parameters::all_finite() const {
  bool finite = true;
  for_each([&](std::string_view, const Tensor& t) { finite = finite && t.all_finite(); });
  return finite;
}

void HyperParams::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(learning_rate >= kMinLearningRate && learning_rate <= kMaxLearningRate)) {
    fail("learning rate " + std::to_string(learning_rate) + " outside [0.001, 0.3]");
  }
  if (hidden_size < kMinHidden || hidden_size > kMaxHidden) {
    fail("hidden size " + std::to_string(hidden_size) + " outside [16, 1024]");
  }
  if (!(dropout >= kMinDropout && dropout <= kMaxDropout)) {
    fail("dropout " + std::to_string(dropout) + " outside [0.001, 0.3]");
  }
  window.validate();
}

ModelState init_model(std::size_t vocab_size, std::size_t hidden_size, double dropout, std::uint64_t seed) {
  if (vocab_size < 3 || hidden_size == 0) throw ConfigError("model needs a vocabulary of at least 3 and d >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  const std::size_t V = vocab_size, d = hidden_size;
  ModelState m;
  m.vocab_size = V;
  m.hidden_size = d;
  m.dropout = dropout;
  m.seed = seed;
  Parameters& p = m.params;
  p.encoder_embedding = Tensor({V, d});
  p.encoder_w_input = Tensor({3 * d, d});
  p.encoder_w_hidden = Tensor({3 * d, d});
  p.encoder_b_input = Tensor({3 * d});
  p.encoder_b_hidden = Tensor({3 * d});
  p.decoder_embedding = Tensor({V, d});
  p.attention_w_query = Tensor({d, d});
  p.attention_w_key = Tensor({d, d});
  p.attention_bias = Tensor({d});
  p.attention_v = Tensor({d});
  p.decoder_w_input = Tensor({3 * d, 2 * d});
  p.decoder_w_hidden = Tensor({3 * d, d});
  p.decoder_b_input = Tensor({3 * d});
  p.decoder_b_hidden = Tensor({3 * d});
  p.output_weight = Tensor({V, d});
  p.output_bias = Tensor({V});

  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  std::uniform_real_distribution<double> uniform(-bound, bound);
  std::normal_distribution<double> normal(0.0, 1.0);
  p.for_each([&](std::string_view name, Tensor& t) {
    const bool bias = name.find("_b_") != std::string_view::npos || name.ends_with("bias");
    if (bias) return;
    if (name.ends_with("embedding")) {
      for (auto& v : t.values()) v = normal(rng);
    } else {
      for (auto& v : t.values()) v = uniform(rng);
    }
  });
  return m;
}

ModelState init_model(std::size_t vocab_size, const HyperParams& hyper) {
  hyper.validate();
  return init_model(vocab_size, hyper.hidden_size, hyper.dropout, hyper.seed);
}

// ---------------------------------------------------------------------------

EncoderOutput encode(const ModelState& model, std::span<const TokenId> x) {
  check_tokens(x, model.vocab_size, "input");
  const std::size_t d = model.hidden_size;
  EncoderTrace e = run_encoder(model, x);
  EncoderOutput out;
  out.outputs = Tensor({x.size(), d});
  std::copy(e.out.begin(), e.out.end(), out.outputs.data());
  out.final_hidden.assign(d, 0.0);
  if (!x.empty()) std::copy_n(e.out.data() + (x.size() - 1) * d, d, out.final_hidden.data());
  return out;
}

AttentionMemory attention_memory(const ModelState& model, Tensor encoder_outputs) {
  const std::size_t d = model.hidden_size;
  if (encoder_outputs.rows() == 0) throw ContractError("attention over an empty encoder output");
  if (encoder_outputs.cols() != d) throw ContractError("encoder outputs do not match the hidden size");
  AttentionMemory mem;
  mem.keys = Tensor({encoder_outputs.rows(), d});
  mat(mem.keys) = project_keys(model.params, encoder_outputs.data(), encoder_outputs.rows(), d);
  mem.outputs = std::move(encoder_outputs);
  return mem;
}

DecodeStep decode_step(const ModelState& model, TokenId prev_token, std::span<const double> hidden,
                       const AttentionMemory& memory) {
  const std::size_t d = model.hidden_size;
  const std::size_t T = memory.outputs.rows();
  if (T == 0) throw ContractError("attention over an empty encoder output");
  if (hidden.size() != d) throw ContractError("hidden state has the wrong size");
  check_tokens(std::span(&prev_token, 1), model.vocab_size, "decoder");
  const Parameters& p = model.params;

  const ConstVecMap h(hidden.data(), ix(d));
  const Vec query = mat(p.attention_w_query) * h;
  const RowMat act = (mat(memory.keys).rowwise() + query.transpose()).array().tanh().matrix();
  Vec weights = act * vec(p.attention_v);
  softmax_inplace(weights);
  const Vec context = mat(memory.outputs).transpose() * weights;

  Vec input(ix(2 * d));
  input.head(ix(d)) = vec(p.decoder_embedding).segment(ix(prev_token * d), ix(d));
  input.tail(ix(d)) = context;
  const Vec gi = mat(p.decoder_w_input) * input + vec(p.decoder_b_input);
  Buffer r(d), z(d), n(d), ghn(d);
  DecodeStep out;
  out.hidden.resize(d);
  gru_step(decoder_gru(p), d, gi.data(), hidden.data(), r.data(), z.data(), n.data(), ghn.data(), out.hidden.data());
  const Vec logits = mat(p.output_weight) * ConstVecMap(out.hidden.data(), ix(d)) + vec(p.output_bias);
  out.logits.assign(logits.data(), logits.data() + logits.size());
  out.attention.assign(weights.data(), weights.data() + weights.size());
  return out;
}

DecodeStep decode_step(const ModelState& model, TokenId prev_token, std::span<const double> hidden,
                       const Tensor& encoder_outputs) {
  return decode_step(model, prev_token, hidden, attention_memory(model, encoder_outputs));
}

// ---------------------------------------------------------------------------

ForwardResult forward_loss(const ModelState& model, const TrainingPair& pair, std::mt19937_64* dropout_rng) {
  const std::size_t d = model.hidden_size;
  const std::size_t V = model.vocab_size;
  const std::size_t T = pair.x.size();
  const std::size_t M = pair.y.size();
  check_tokens(pair.x, V, "input");
  check_tokens(pair.y, V, "target");
  if (T == 0) throw ContractError("training pair has an empty input sequence");
  const Parameters& p = model.params;

  ForwardResult result;
  ForwardCache& c = result.cache;
  c.x = pair.x;
  c.y = pair.y;
  EncoderTrace enc = run_encoder(model, pair.x);
  c.enc_input = std::move(enc.input);
  c.enc_prev = std::move(enc.prev);
  c.enc_r = std::move(enc.r);
  c.enc_z = std::move(enc.z);
  c.enc_n = std::move(enc.n);
  c.enc_ghn = std::move(enc.ghn);
  c.enc_out = std::move(enc.out);
  if (M == 0) return result;

  const ConstMatMap outputs = rows(std::as_const(c.enc_out), T, d);
  c.keys.resize(T * d);
  rows(c.keys, T, d) = project_keys(p, c.enc_out.data(), T, d);
  const ConstMatMap keys = rows(std::as_const(c.keys), T, d);

  c.decoder_inputs.resize(M);
  c.decoder_inputs[0] = Vocabulary::kSos;
  for (std::size_t s = 1; s < M; ++s) c.decoder_inputs[s] = pair.y[s - 1];

  c.dec_input.resize(M * 2 * d);
  c.dec_prev.resize(M * d);
  c.dec_r.resize(M * d);
  c.dec_z.resize(M * d);
  c.dec_n.resize(M * d);
  c.dec_ghn.resize(M * d);
  c.dec_out.resize(M * d);
  c.dropout_scale.assign(M * d, 1.0);
  c.attention.resize(M * T);
  c.attention_act.resize(M * T * d);
  c.probs.resize(M * V);

  if (dropout_rng != nullptr && model.dropout > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double keep_scale = 1.0 / (1.0 - model.dropout);
    for (auto& s : c.dropout_scale) s = u(*dropout_rng) < model.dropout ? 0.0 : keep_scale;
  }

  const GruWeights g = decoder_gru(p);
  const ConstVecMap v = vec(p.attention_v);
  double loss = 0.0;
  const double* h = c.enc_out.data() + (T - 1) * d;
  for (std::size_t s = 0; s < M; ++s) {
    double* prev = c.dec_prev.data() + s * d;
    std::copy_n(h, d, prev);
    const ConstVecMap hv(prev, ix(d));

    const Vec query = mat(p.attention_w_query) * hv;
    MatMap act(c.attention_act.data() + s * T * d, ix(T), ix(d));
    act = (keys.rowwise() + query.transpose()).array().tanh().matrix();
    VecMap weights(c.attention.data() + s * T, ix(T));
    weights = act * v;
    softmax_inplace(weights);

    VecMap input(c.dec_input.data() + s * 2 * d, ix(2 * d));
    const ConstVecMap scale(c.dropout_scale.data() + s * d, ix(d));
    input.head(ix(d)) = vec(p.decoder_embedding).segment(ix(c.decoder_inputs[s] * d), ix(d)).cwiseProduct(scale);
    input.tail(ix(d)).noalias() = outputs.transpose() * weights;

    const Vec gi = mat(p.decoder_w_input) * input + vec(p.decoder_b_input);
    double* out = c.dec_out.data() + s * d;
    gru_step(g, d, gi.data(), prev, c.dec_r.data() + s * d, c.dec_z.data() + s * d, c.dec_n.data() + s * d,
             c.dec_ghn.data() + s * d, out);

    VecMap probs(c.probs.data() + s * V, ix(V));
    probs = mat(p.output_weight) * ConstVecMap(out, ix(d)) + vec(p.output_bias);
    const double gold_logit = probs[ix(pair.y[s])];
    loss += softmax_inplace(probs) - gold_logit;
    h = out;
  }
  result.loss = loss / static_cast<double>(M);
  return result;
}

double evaluate_loss(const ModelState& model, const TrainingPair& pair) { return forward_loss(model, pair).loss; }

Gradients backward(const ModelState& model, const ForwardCache& c, double loss_scale) {
  const std::size_t d = model.hidden_size;
  const std::size_t V = model.vocab_size;
  const std::size_t T = c.x.size();
  const std::size_t M = c.y.size();
  const Parameters& p = model.params;
  Gradients grad = p.zeros_like();
  if (M == 0 || T == 0) return grad;

  // Output projection.
  RowMat dlogits = rows(c.probs, M, V);
  for (std::size_t s = 0; s < M; ++s) dlogits(ix(s), ix(c.y[s])) -= 1.0;
  dlogits *= loss_scale / static_cast<double>(M);
  const ConstMatMap dec_out = rows(c.dec_out, M, d);
  mat(grad.output_weight).noalias() += dlogits.transpose() * dec_out;
  vec(grad.output_bias) += dlogits.colwise().sum().transpose();
  const RowMat dh_logits = dlogits * mat(p.output_weight);

  // Decoder with attention, newest step first.
  const ConstMatMap outputs = rows(std::as_const(c.enc_out), T, d);
  const ConstVecMap v = vec(p.attention_v);
  const GruWeights dg = decoder_gru(p);
  RowMat d_outputs = RowMat::Zero(ix(T), ix(d));
  RowMat d_keys = RowMat::Zero(ix(T), ix(d));
  RowMat dgi_dec(ix(M), ix(3 * d)), dgh_dec(ix(M), ix(3 * d)), dquery(ix(M), ix(d));
  Vec carry = Vec::Zero(ix(d));
  for (std::size_t s = M; s-- > 0;) {
    const Vec dh = dh_logits.row(ix(s)).transpose() + carry;
    const std::size_t o = s * d;
    Vec dprev = gru_step_backward(dg, d, c.dec_prev.data() + o, c.dec_r.data() + o, c.dec_z.data() + o,
                                  c.dec_n.data() + o, c.dec_ghn.data() + o, dh, dgi_dec.row(ix(s)).data(),
                                  dgh_dec.row(ix(s)).data());
    const Vec dinput = mat(p.decoder_w_input).transpose() * dgi_dec.row(ix(s)).transpose();

    const ConstVecMap scale(c.dropout_scale.data() + o, ix(d));
    vec(grad.decoder_embedding).segment(ix(c.decoder_inputs[s] * d), ix(d)) +=
        dinput.head(ix(d)).cwiseProduct(scale);

    const Vec dcontext = dinput.tail(ix(d));
    const ConstVecMap weights(c.attention.data() + s * T, ix(T));
    const ConstMatMap act(c.attention_act.data() + s * T * d, ix(T), ix(d));
    d_outputs.noalias() += weights * dcontext.transpose();
    const Vec dweights = outputs * dcontext;
    const Vec dscore = weights.cwiseProduct((dweights.array() - weights.dot(dweights)).matrix());
    vec(grad.attention_v).noalias() += act.transpose() * dscore;
    const RowMat dpre = ((dscore * v.transpose()).array() * (1.0 - act.array().square())).matrix();
    d_keys += dpre;
    dquery.row(ix(s)) = dpre.colwise().sum();
    dprev.noalias() += mat(p.attention_w_query).transpose() * dquery.row(ix(s)).transpose();
    carry = dprev;
  }
  const ConstMatMap dec_prev = rows(c.dec_prev, M, d);
  mat(grad.decoder_w_input).noalias() += dgi_dec.transpose() * rows(c.dec_input, M, 2 * d);
  mat(grad.decoder_w_hidden).noalias() += dgh_dec.transpose() * dec_prev;
  vec(grad.decoder_b_input) += dgi_dec.colwise().sum().transpose();
  vec(grad.decoder_b_hidden) += dgh_dec.colwise().sum().transpose();
  mat(grad.attention_w_query).noalias() += dquery.transpose() * dec_prev;
  mat(grad.attention_w_key).noalias() += d_keys.transpose() * outputs;
  vec(grad.attention_bias) += d_keys.colwise().sum().transpose();
  d_outputs.noalias() += d_keys * mat(p.attention_w_key);

  // Encoder; `carry` now holds dL/d(final encoder state).
  const GruWeights eg = encoder_gru(p);
  RowMat dgi_enc(ix(T), ix(3 * d)), dgh_enc(ix(T), ix(3 * d));
  for (std::size_t t = T; t-- > 0;) {
    const Vec dh = d_outputs.row(ix(t)).transpose() + carry;
    const std::size_t o = t * d;
    carry = gru_step_backward(eg, d, c.enc_prev.data() + o, c.enc_r.data() + o, c.enc_z.data() + o,
                              c.enc_n.data() + o, c.enc_ghn.data() + o, dh, dgi_enc.row(ix(t)).data(),
                              dgh_enc.row(ix(t)).data());
  }
  mat(grad.encoder_w_input).noalias() += dgi_enc.transpose() * rows(c.enc_input, T, d);
  mat(grad.encoder_w_hidden).noalias() += dgh_enc.transpose() * rows(c.enc_prev, T, d);
  vec(grad.encoder_b_input) += dgi_enc.colwise().sum().transpose();
  vec(grad.encoder_b_hidden) += dgh_enc.colwise().sum().transpose();
  const RowMat dembed = dgi_enc * mat(p.encoder_w_input);
  for (std::size_t t = 0; t < T; ++t) {
    vec(grad.encoder_embedding).segment(ix(c.x[t] * d), ix(d)) += dembed.row(ix(t)).transpose();
  }
  return grad;
}

void sgd_step(ModelState& model, const Gradients& grads, double learning_rate) {
  if (!grads.all_finite()) throw NumericError("non-finite gradient");
  std::vector<const Tensor*> sources;
  grads.for_each([&](std::string_view, const Tensor& t) { sources.push_back(&t); });
  std::size_t i = 0;
  model.params.for_each([&](std::string_view name, Tensor& t) {
    const Tensor& g = *sources[i++];
    if (!t.same_shape(g)) throw ContractError("gradient shape mismatch for " + std::string(name));
    vec(t) -= learning_rate * vec(g);
  });
}

}  // namespace pelp
