#include "pelp/checkpoint.hpp"

#include <fstream>
#include <json.hpp>

#include "binary_io.hpp"
#include "pelp/error.hpp"

namespace pelp {

namespace {

constexpr char kMagic[9] = "PELPCKPT";
constexpr int kVersion = 1;

}  // namespace

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto& m = ckpt.model;
  nlohmann::ordered_json h;
  h["format"] = "pelp-checkpoint";
  h["version"] = kVersion;
  h["vocab_size"] = m.vocab_size;
  h["hidden_size"] = m.hidden_size;
  h["dropout"] = m.dropout;
  h["seed"] = m.seed;
  h["learning_rate"] = ckpt.hyper.learning_rate;
  h["input_traces"] = ckpt.hyper.window.input_traces;
  h["output_traces"] = ckpt.hyper.window.output_traces;
  h["max_tokens"] = ckpt.hyper.max_tokens;
  h["vocab"] = ckpt.vocab.tokens();
  h["vocab_hash"] = ckpt.vocab.hash();
  auto& tensors = h["tensors"] = nlohmann::ordered_json::array();
  m.params.for_each([&](std::string_view name, const Tensor& t) {
    tensors.push_back({{"name", std::string(name)}, {"shape", t.shape()}});
  });
  h["meta"] = nlohmann::ordered_json::parse(ckpt.stamp.to_json());
  const std::string header = h.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(kMagic, 8);
  detail::put_u64(out, header.size());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  m.params.for_each([&](std::string_view, const Tensor& t) {
    for (const double v : t.values()) detail::put_f64(out, v);
  });
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const std::string where = path.string();
  detail::expect_magic(in, kMagic, where);
  const std::uint64_t len = detail::get_u64(in);
  if (len > (1u << 26)) throw ParseError(where + ": implausible header length");
  std::string header(len, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(len))) throw ParseError(where + ": truncated header");

  Checkpoint c;
  try {
    const auto h = nlohmann::json::parse(header);
    if (h.at("format") != "pelp-checkpoint" || h.at("version") != kVersion) {
      throw ParseError(where + ": unsupported checkpoint version");
    }
    c.vocab = Vocabulary::from_tokens(h.at("vocab").get<std::vector<std::string>>());
    if (c.vocab.hash() != h.at("vocab_hash").get<std::uint64_t>()) {
      throw ParseError(where + ": vocabulary hash mismatch");
    }
    const auto vocab_size = h.at("vocab_size").get<std::size_t>();
    const auto hidden = h.at("hidden_size").get<std::size_t>();
    if (vocab_size != c.vocab.size()) throw ParseError(where + ": vocabulary size mismatch");
    c.model = init_model(vocab_size, hidden, h.at("dropout").get<double>(), h.at("seed").get<std::uint64_t>());
    c.hyper.learning_rate = h.at("learning_rate").get<double>();
    c.hyper.hidden_size = hidden;
    c.hyper.dropout = c.model.dropout;
    c.hyper.seed = c.model.seed;
    c.hyper.window.input_traces = h.at("input_traces").get<std::size_t>();
    c.hyper.window.output_traces = h.at("output_traces").get<std::size_t>();
    c.hyper.max_tokens = h.at("max_tokens").get<std::size_t>();
    c.stamp = Stamp::from_json(h.at("meta").dump());

    const auto& tensors = h.at("tensors");
    std::size_t i = 0;
    c.model.params.for_each([&](std::string_view name, const Tensor& t) {
      if (i >= tensors.size() || tensors[i].at("name") != name ||
          tensors[i].at("shape").get<std::vector<std::size_t>>() != t.shape()) {
        throw ParseError(where + ": tensor '" + std::string(name) + "' missing or misshapen");
      }
      ++i;
    });
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": bad header: " + e.what());
  }
  c.model.params.for_each([&](std::string_view, Tensor& t) {
    for (auto& v : t.values()) v = detail::get_f64(in);
  });
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError(where + ": trailing bytes after payload");
  return c;
}

}  // namespace pelp
