#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pelp/eventlog.hpp"

namespace pelp {

using TokenId = std::uint32_t;
using TokenSequence = std::vector<TokenId>;

/// Keeps ASCII letters and digits only. Throws ConfigError if nothing is left.
std::string sanitize(std::string_view activity);

/// Sanitizes every event's activity in place (before any ordering happens).
void sanitize_events(std::vector<Event>& events);

/// First min(n, |log|) traces.
EventLog select_head(const EventLog& log, std::size_t n);

struct SplitLogs {
  EventLog train;
  EventLog test;
  /// Set when the floor rule leaves no training trace.
  bool degenerate_training = false;
};

/// train = first floor(fraction * T) traces, test = the rest.
SplitLogs split(const EventLog& log, double train_fraction);

/// Dense token ids. Id 0 is the decoder start sentinel, id 1 the end-of-trace
/// marker, activities follow in order of first appearance.
class Vocabulary {
 public:
  static constexpr TokenId kSos = 0;
  static constexpr TokenId kEot = 1;
  static constexpr const char* kSosToken = "<SOS>";
  static constexpr const char* kEotToken = "<EOT>";

  Vocabulary();
  /// Rebuilds a vocabulary from its token list (ids = positions).
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  /// Adds the token if absent; returns its id.
  TokenId add(const std::string& token);
  std::optional<TokenId> find(const std::string& token) const;
  /// Throws ContractError for unknown tokens.
  TokenId encode(const std::string& token) const;
  const std::string& decode(TokenId id) const;
  bool is_activity(TokenId id) const noexcept { return id > kEot && id < tokens_.size(); }

  /// FNV-1a over the token list; identifies a vocabulary inside checkpoints.
  std::uint64_t hash() const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

Vocabulary build_vocab(const EventLog& train);

void write_vocab(const Vocabulary& vocab, const std::filesystem::path& path,
                 const std::string& stamp_json = "{}");
Vocabulary read_vocab(const std::filesystem::path& path);

struct WindowSpec {
  std::size_t input_traces = 1;   // p
  std::size_t output_traces = 1;  // q

  static constexpr std::size_t kMaxTraces = 50;
  /// Throws ConfigError unless 1 <= p, q <= 50.
  void validate() const;
  bool operator==(const WindowSpec&) const = default;
};

struct TrainingPair {
  TokenSequence x;
  TokenSequence y;
  std::size_t index = 0;  // position of the first input trace in the log
};

/// Each trace encoded and terminated by one end-of-trace token.
TokenSequence encode_traces(std::span<const Activities> traces, const Vocabulary& vocab);
/// Splits on end-of-trace tokens; a trailing unterminated run is dropped.
std::vector<Activities> decode_traces(std::span<const TokenId> tokens, const Vocabulary& vocab);

/// Sliding windows with stride one trace: pair k takes traces [k, k+p) as x
/// and [k+p, k+p+q) as y. Throws ConfigError when the log is shorter than p+q.
std::vector<TrainingPair> make_pairs(const EventLog& log, const WindowSpec& spec, const Vocabulary& vocab);

struct PairSet {
  WindowSpec window;
  std::uint64_t vocab_hash = 0;
  std::vector<TrainingPair> pairs;
};

/// Little-endian binary container; see README for the layout.
void write_pairs(const PairSet& set, const std::filesystem::path& path);
PairSet read_pairs(const std::filesystem::path& path);

}  // namespace pelp
