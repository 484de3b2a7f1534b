#pragma once

// Test-only reference computations. Everything here is written with plain
// loops over Tensor element access so that it stays independent of the
// Eigen-backed code paths it checks.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pelp/neural.hpp"

namespace pelp::oracle {

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

/// h' for one GRU step with weights stacked [r; z; n].
inline std::vector<double> gru_step(const Tensor& wi, const Tensor& wh, const Tensor& bi, const Tensor& bh,
                                    const std::vector<double>& x, const std::vector<double>& h) {
  const std::size_t d = h.size();
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) {
    double ar = bi[i] + bh[i], az = bi[d + i] + bh[d + i], an_x = bi[2 * d + i], an_h = bh[2 * d + i];
    for (std::size_t k = 0; k < x.size(); ++k) {
      ar += wi(i, k) * x[k];
      az += wi(d + i, k) * x[k];
      an_x += wi(2 * d + i, k) * x[k];
    }
    for (std::size_t k = 0; k < d; ++k) {
      ar += wh(i, k) * h[k];
      az += wh(d + i, k) * h[k];
      an_h += wh(2 * d + i, k) * h[k];
    }
    const double r = sigmoid(ar), z = sigmoid(az);
    const double n = std::tanh(an_x + r * an_h);
    out[i] = (1 - z) * n + z * h[i];
  }
  return out;
}

inline std::vector<std::vector<double>> encoder_states(const ModelState& m, const TokenSequence& x) {
  const auto& p = m.params;
  std::vector<double> h(m.hidden_size, 0.0);
  std::vector<std::vector<double>> states;
  for (const TokenId t : x) {
    std::vector<double> e(m.hidden_size);
    for (std::size_t k = 0; k < m.hidden_size; ++k) e[k] = p.encoder_embedding(t, k);
    h = gru_step(p.encoder_w_input, p.encoder_w_hidden, p.encoder_b_input, p.encoder_b_hidden, e, h);
    states.push_back(h);
  }
  return states;
}

inline std::vector<double> attention_weights(const ModelState& m, const std::vector<double>& h,
                                             const std::vector<std::vector<double>>& outputs) {
  const auto& p = m.params;
  const std::size_t d = m.hidden_size;
  std::vector<double> scores;
  for (const auto& o : outputs) {
    double score = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double pre = p.attention_bias[i];
      for (std::size_t k = 0; k < d; ++k) pre += p.attention_w_query(i, k) * h[k] + p.attention_w_key(i, k) * o[k];
      score += p.attention_v[i] * std::tanh(pre);
    }
    scores.push_back(score);
  }
  const double mx = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (auto& s : scores) sum += (s = std::exp(s - mx));
  for (auto& s : scores) s /= sum;
  return scores;
}

/// Teacher-forced mean cross-entropy without dropout.
inline double loss(const ModelState& m, const TrainingPair& pair) {
  const auto& p = m.params;
  const std::size_t d = m.hidden_size;
  const auto outputs = encoder_states(m, pair.x);
  std::vector<double> h = outputs.back();
  double total = 0.0;
  TokenId prev = Vocabulary::kSos;
  for (const TokenId gold : pair.y) {
    const auto w = attention_weights(m, h, outputs);
    std::vector<double> input(2 * d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      input[k] = p.decoder_embedding(prev, k);
      for (std::size_t j = 0; j < outputs.size(); ++j) input[d + k] += w[j] * outputs[j][k];
    }
    h = gru_step(p.decoder_w_input, p.decoder_w_hidden, p.decoder_b_input, p.decoder_b_hidden, input, h);
    std::vector<double> logits(m.vocab_size);
    for (std::size_t v = 0; v < m.vocab_size; ++v) {
      logits[v] = p.output_bias[v];
      for (std::size_t k = 0; k < d; ++k) logits[v] += p.output_weight(v, k) * h[k];
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (const double l : logits) sum += std::exp(l - mx);
    total += mx + std::log(sum) - logits[gold];
    prev = gold;
  }
  return total / static_cast<double>(pair.y.size());
}

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

struct GradientCheck {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t checked = 0;
};

/// Central differences on every parameter entry. With a dropout seed the same
/// mask is replayed for every evaluation.
inline GradientCheck check_gradients(const ModelState& model, const TrainingPair& pair, double eps = 1e-5,
                                     std::optional<std::uint64_t> dropout_seed = std::nullopt) {
  auto run = [&](const ModelState& m) {
    if (!dropout_seed) return forward_loss(m, pair);
    std::mt19937_64 rng(*dropout_seed);
    return forward_loss(m, pair, &rng);
  };
  const auto fwd = run(model);
  const Gradients grads = backward(model, fwd.cache);
  std::vector<const Tensor*> analytic;
  grads.for_each([&](std::string_view, const Tensor& t) { analytic.push_back(&t); });

  GradientCheck result;
  ModelState probe = model;
  std::size_t index = 0;
  probe.params.for_each([&](std::string_view name, Tensor& t) {
    const Tensor& g = *analytic[index++];
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + eps;
      const double up = run(probe).loss;
      t[i] = saved - eps;
      const double down = run(probe).loss;
      t[i] = saved;
      const double err = relative_error(g[i], (up - down) / (2 * eps));
      ++result.checked;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_parameter = std::string(name) + "[" + std::to_string(i) + "]";
      }
    }
  });
  return result;
}

/// Random pair with tokens drawn from the activity range plus EOT.
inline TrainingPair random_pair(std::size_t vocab, std::size_t x_len, std::size_t y_len, std::mt19937_64& rng) {
  std::uniform_int_distribution<TokenId> tok(1, static_cast<TokenId>(vocab - 1));
  TrainingPair pair;
  for (std::size_t i = 0; i < x_len; ++i) pair.x.push_back(tok(rng));
  for (std::size_t i = 0; i < y_len; ++i) pair.y.push_back(tok(rng));
  return pair;
}

}  // namespace pelp::oracle
