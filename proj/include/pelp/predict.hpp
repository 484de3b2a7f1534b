#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pelp/eventlog.hpp"
#include "pelp/neural.hpp"
#include "pelp/preprocess.hpp"

namespace pelp {

/// Greedy decoding: at each step the most likely token other than the start
/// sentinel (lowest id on ties). Stops after `eot_count` end-of-trace tokens
/// or `max_tokens` tokens, whichever comes first.
TokenSequence generate_tokens(const ModelState& model, std::span<const TokenId> x, std::size_t eot_count,
                              std::size_t max_tokens);

/// Complete, non-empty traces of a generated stream. Tokens after the last
/// end-of-trace marker are an incomplete trace and are dropped, as are empty
/// traces (two markers in a row).
std::vector<Activities> split_generated(std::span<const TokenId> tokens, const Vocabulary& vocab);

struct StepResult {
  std::vector<Activities> traces;  // at most q, each non-empty
  TokenSequence tokens;            // raw generated stream
  bool complete() const noexcept { return !traces.empty(); }
};

/// One generation call: encode the p input traces, decode until q traces end
/// or the token budget runs out.
StepResult generate_step(const ModelState& model, const Vocabulary& vocab, std::span<const Activities> input_traces,
                         const WindowSpec& spec, std::size_t max_tokens);

/// max_tokens default: twice the longest target sequence among the pairs.
std::size_t default_max_tokens(const std::vector<TrainingPair>& pairs);

using StepGenerator = std::function<StepResult(const std::vector<Activities>& window)>;

struct PredictionRun {
  EventLog predicted;
  std::size_t steps = 0;
  std::vector<std::vector<Activities>> windows;  // input of every step
  std::vector<std::string> warnings;
};

/// Seeds the window with the last p training traces, then repeatedly
/// generates and slides: the next window is the last p traces of the previous
/// window followed by the newly generated ones. Stops at `horizon` traces, or
/// early (with a warning) when a step yields no complete trace.
PredictionRun roll_forward(const StepGenerator& generate, const EventLog& train_log, const WindowSpec& spec,
                           std::size_t horizon);
PredictionRun roll_forward(const ModelState& model, const Vocabulary& vocab, const EventLog& train_log,
                           const WindowSpec& spec, std::size_t horizon, std::size_t max_tokens);

}  // namespace pelp
