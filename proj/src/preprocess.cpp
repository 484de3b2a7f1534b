#include "pelp/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "binary_io.hpp"
#include "pelp/error.hpp"

namespace pelp {

std::string sanitize(std::string_view activity) {
  std::string out;
  out.reserve(activity.size());
  for (const char c : activity) {
    const bool alnum = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    if (alnum) out.push_back(c);
  }
  if (out.empty()) {
    throw ConfigError("activity '" + std::string(activity) + "' is empty after sanitization");
  }
  return out;
}

void sanitize_events(std::vector<Event>& events) {
  for (auto& e : events) e.activity = sanitize(e.activity);
}

EventLog select_head(const EventLog& log, std::size_t n) { return log.slice(0, n); }

SplitLogs split(const EventLog& log, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie strictly between 0 and 1, got " +
                      std::to_string(train_fraction));
  }
  const auto n_train =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(log.size())));
  SplitLogs out{log.slice(0, n_train), log.slice(n_train, log.size() - n_train), false};
  out.degenerate_training = out.train.empty();
  return out;
}

// ---------------------------------------------------------------------------

Vocabulary::Vocabulary() {
  add(kSosToken);
  add(kEotToken);
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[kSos] != kSosToken || tokens[kEot] != kEotToken) {
    throw ParseError("vocabulary must start with the reserved sentinel tokens");
  }
  Vocabulary vocab;
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    if (vocab.find(tokens[i])) throw ParseError("duplicate vocabulary token '" + tokens[i] + "'");
    vocab.add(tokens[i]);
  }
  return vocab;
}

TokenId Vocabulary::add(const std::string& token) {
  const auto [it, inserted] = ids_.try_emplace(token, static_cast<TokenId>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::optional<TokenId> Vocabulary::find(const std::string& token) const {
  const auto it = ids_.find(token);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::encode(const std::string& token) const {
  const auto id = find(token);
  if (!id) throw ContractError("activity '" + token + "' is not in the vocabulary");
  return *id;
}

const std::string& Vocabulary::decode(TokenId id) const {
  if (id >= tokens_.size()) throw ContractError("token id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (const auto& token : tokens_) {
    for (const unsigned char c : token) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xFF;  // separator, not a valid byte in sanitized labels
    h *= 1099511628211ull;
  }
  return h;
}

Vocabulary build_vocab(const EventLog& train) {
  Vocabulary vocab;
  for (const auto& trace : train.traces()) {
    for (const auto& a : trace.activities) vocab.add(a);
  }
  return vocab;
}

void write_vocab(const Vocabulary& vocab, const std::filesystem::path& path, const std::string& stamp_json) {
  nlohmann::json doc;
  doc["format"] = "pelp-vocab";
  doc["version"] = 1;
  doc["tokens"] = vocab.tokens();
  doc["hash"] = vocab.hash();
  doc["meta"] = nlohmann::json::parse(stamp_json);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

Vocabulary read_vocab(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (doc.value("format", "") != "pelp-vocab" || doc.value("version", 0) != 1) {
    throw ParseError(path.string() + ": not a version 1 vocabulary file");
  }
  return Vocabulary::from_tokens(doc.at("tokens").get<std::vector<std::string>>());
}

// ---------------------------------------------------------------------------

void WindowSpec::validate() const {
  if (input_traces < 1 || input_traces > kMaxTraces || output_traces < 1 || output_traces > kMaxTraces) {
    throw ConfigError("window sizes must lie in [1, 50], got p=" + std::to_string(input_traces) +
                      " q=" + std::to_string(output_traces));
  }
}

TokenSequence encode_traces(std::span<const Activities> traces, const Vocabulary& vocab) {
  TokenSequence out;
  for (const auto& trace : traces) {
    for (const auto& a : trace) out.push_back(vocab.encode(a));
    out.push_back(Vocabulary::kEot);
  }
  return out;
}

std::vector<Activities> decode_traces(std::span<const TokenId> tokens, const Vocabulary& vocab) {
  std::vector<Activities> out;
  Activities current;
  for (const TokenId id : tokens) {
    if (id == Vocabulary::kEot) {
      out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(vocab.decode(id));
    }
  }
  return out;
}

std::vector<TrainingPair> make_pairs(const EventLog& log, const WindowSpec& spec, const Vocabulary& vocab) {
  spec.validate();
  const std::size_t p = spec.input_traces;
  const std::size_t q = spec.output_traces;
  if (log.size() < p + q) {
    throw ConfigError("building pairs with p=" + std::to_string(p) + ", q=" + std::to_string(q) +
                      " needs at least " + std::to_string(p + q) + " traces, log has " +
                      std::to_string(log.size()));
  }
  std::vector<TokenSequence> encoded;
  encoded.reserve(log.size());
  for (const auto& trace : log.traces()) {
    encoded.push_back(encode_traces(std::span(&trace.activities, 1), vocab));
  }
  auto concat = [&](std::size_t first, std::size_t count) {
    TokenSequence out;
    for (std::size_t i = first; i < first + count; ++i) out.insert(out.end(), encoded[i].begin(), encoded[i].end());
    return out;
  };
  std::vector<TrainingPair> pairs;
  pairs.reserve(log.size() - p - q + 1);
  for (std::size_t k = 0; k + p + q <= log.size(); ++k) {
    pairs.push_back(TrainingPair{concat(k, p), concat(k + p, q), k});
  }
  return pairs;
}

// ---------------------------------------------------------------------------

namespace {
constexpr char kPairsMagic[9] = "PELPPAIR";
constexpr std::uint32_t kPairsVersion = 1;
}  // namespace

void write_pairs(const PairSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(kPairsMagic, 8);
  detail::put_u32(out, kPairsVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(set.window.input_traces));
  detail::put_u32(out, static_cast<std::uint32_t>(set.window.output_traces));
  detail::put_u64(out, set.vocab_hash);
  detail::put_u64(out, set.pairs.size());
  for (const auto& pair : set.pairs) {
    detail::put_u64(out, pair.index);
    detail::put_u32(out, static_cast<std::uint32_t>(pair.x.size()));
    for (const TokenId t : pair.x) detail::put_u32(out, t);
    detail::put_u32(out, static_cast<std::uint32_t>(pair.y.size()));
    for (const TokenId t : pair.y) detail::put_u32(out, t);
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

PairSet read_pairs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    detail::expect_magic(in, kPairsMagic, path.string());
    if (detail::get_u32(in) != kPairsVersion) throw ParseError("unsupported pairs file version");
    PairSet set;
    set.window.input_traces = detail::get_u32(in);
    set.window.output_traces = detail::get_u32(in);
    set.vocab_hash = detail::get_u64(in);
    const std::uint64_t count = detail::get_u64(in);
    set.pairs.resize(count);
    for (auto& pair : set.pairs) {
      pair.index = detail::get_u64(in);
      pair.x.resize(detail::get_u32(in));
      for (auto& t : pair.x) t = detail::get_u32(in);
      pair.y.resize(detail::get_u32(in));
      for (auto& t : pair.y) t = detail::get_u32(in);
    }
    return set;
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace pelp
