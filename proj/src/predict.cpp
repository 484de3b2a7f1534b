#include "pelp/predict.hpp"

#include <algorithm>

#include "pelp/error.hpp"

namespace pelp {

TokenSequence generate_tokens(const ModelState& model, std::span<const TokenId> x, std::size_t eot_count,
                              std::size_t max_tokens) {
  TokenSequence out;
  if (x.empty() || eot_count == 0) return out;
  const auto enc = encode(model, x);
  const auto memory = attention_memory(model, enc.outputs);
  Buffer hidden = enc.final_hidden;
  TokenId prev = Vocabulary::kSos;
  std::size_t eots = 0;
  while (out.size() < max_tokens && eots < eot_count) {
    auto step = decode_step(model, prev, hidden, memory);
    TokenId best = Vocabulary::kEot;
    for (TokenId v = Vocabulary::kEot + 1; v < step.logits.size(); ++v) {
      if (step.logits[v] > step.logits[best]) best = v;
    }
    out.push_back(best);
    if (best == Vocabulary::kEot) ++eots;
    hidden = std::move(step.hidden);
    prev = best;
  }
  return out;
}

std::vector<Activities> split_generated(std::span<const TokenId> tokens, const Vocabulary& vocab) {
  std::vector<Activities> traces;
  Activities current;
  for (const TokenId t : tokens) {
    if (t == Vocabulary::kEot) {
      if (!current.empty()) traces.push_back(std::move(current));
      current.clear();
    } else if (vocab.is_activity(t)) {
      current.push_back(vocab.decode(t));
    } else {
      throw ContractError("generated token " + std::to_string(t) + " is not an activity");
    }
  }
  return traces;
}

StepResult generate_step(const ModelState& model, const Vocabulary& vocab, std::span<const Activities> input_traces,
                         const WindowSpec& spec, std::size_t max_tokens) {
  if (input_traces.size() != spec.input_traces) {
    throw ContractError("generation window holds " + std::to_string(input_traces.size()) + " traces, expected " +
                        std::to_string(spec.input_traces));
  }
  StepResult r;
  r.tokens = generate_tokens(model, encode_traces(input_traces, vocab), spec.output_traces, max_tokens);
  r.traces = split_generated(r.tokens, vocab);
  return r;
}

std::size_t default_max_tokens(const std::vector<TrainingPair>& pairs) {
  std::size_t longest = 0;
  for (const auto& p : pairs) longest = std::max(longest, p.y.size());
  return 2 * longest;
}

PredictionRun roll_forward(const StepGenerator& generate, const EventLog& train_log, const WindowSpec& spec,
                           std::size_t horizon) {
  spec.validate();
  const std::size_t p = spec.input_traces;
  if (train_log.size() < p) {
    throw ConfigError("prediction needs at least p=" + std::to_string(p) + " training traces, got " +
                      std::to_string(train_log.size()));
  }
  PredictionRun run;
  std::vector<Activities> window;
  for (std::size_t i = train_log.size() - p; i < train_log.size(); ++i) window.push_back(train_log[i].activities);

  std::vector<Activities> produced;
  while (produced.size() < horizon) {
    run.windows.push_back(window);
    auto step = generate(window);
    ++run.steps;
    if (!step.complete()) {
      run.warnings.push_back("step " + std::to_string(run.steps) + " produced no complete trace; stopped after " +
                             std::to_string(produced.size()) + " of " + std::to_string(horizon) + " traces");
      break;
    }
    for (auto& t : step.traces) {
      window.push_back(t);
      if (produced.size() < horizon) produced.push_back(std::move(t));
    }
    window.erase(window.begin(), window.end() - static_cast<std::ptrdiff_t>(p));
  }
  run.predicted = EventLog::from_sequences(std::move(produced));
  return run;
}

PredictionRun roll_forward(const ModelState& model, const Vocabulary& vocab, const EventLog& train_log,
                           const WindowSpec& spec, std::size_t horizon, std::size_t max_tokens) {
  return roll_forward(
      [&](const std::vector<Activities>& window) { return generate_step(model, vocab, window, spec, max_tokens); },
      train_log, spec, horizon);
}

}  // namespace pelp
