#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pelp/artifact.hpp"
#include "pelp/checkpoint.hpp"
#include "pelp/error.hpp"

using namespace pelp;

namespace {

std::filesystem::path temp(const std::string& name) { return std::filesystem::temp_directory_path() / ("pelp_test_" + name); }

Checkpoint sample() {
  const auto vocab = build_vocab(EventLog::from_sequences({{"a", "b"}, {"c"}}));
  Checkpoint c;
  c.model = init_model(vocab.size(), 8, 0.1, 77);
  c.hyper.learning_rate = 0.02;
  c.hyper.hidden_size = 8;
  c.hyper.dropout = 0.1;
  c.hyper.seed = 77;
  c.hyper.window = {3, 2};
  c.hyper.max_tokens = 40;
  c.vocab = vocab;
  c.stamp = make_stamp("{\"x\":1}", 77);
  return c;
}

}  // namespace

TEST_CASE("checkpoint round trip is bit exact") {
  const auto c = sample();
  const auto path = temp("model.ckpt");
  write_checkpoint(c, path);
  const auto back = read_checkpoint(path);
  CHECK(back.model == c.model);
  CHECK(back.vocab == c.vocab);
  CHECK(back.hyper.learning_rate == c.hyper.learning_rate);
  CHECK(back.hyper.window == c.hyper.window);
  CHECK(back.hyper.max_tokens == 40);
  CHECK(back.stamp == c.stamp);
  CHECK(back.stamp.tool_version == kToolVersion);

  std::ifstream in(path, std::ios::binary);
  char magic[8];
  in.read(magic, 8);
  CHECK(std::string(magic, 8) == "PELPCKPT");
  std::filesystem::remove(path);
}

TEST_CASE("damaged checkpoints are rejected") {
  const auto c = sample();
  const auto path = temp("damaged.ckpt");
  write_checkpoint(c, path);
  const auto size = std::filesystem::file_size(path);

  SUBCASE("truncated payload") {
    std::filesystem::resize_file(path, size - 8);
    CHECK_THROWS_AS(read_checkpoint(path), ParseError);
  }
  SUBCASE("trailing bytes") {
    std::ofstream(path, std::ios::binary | std::ios::app) << "x";
    CHECK_THROWS_AS(read_checkpoint(path), ParseError);
  }
  SUBCASE("wrong magic") {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.write("XXXX", 4);
    f.close();
    CHECK_THROWS_AS(read_checkpoint(path), ParseError);
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_checkpoint(temp("missing.ckpt")), IoError);
}

TEST_CASE("artifact stamps") {
  CHECK(config_hash("abc") == config_hash("abc"));
  CHECK(config_hash("abc") != config_hash("abd"));
  CHECK(config_hash("").size() == 16);
  CHECK(config_hash("") == "cbf29ce484222325");  // FNV-1a offset basis
  const auto s = make_stamp("cfg", 9);
  CHECK(Stamp::from_json(s.to_json()) == s);

  const auto path = temp("artifact.txt");
  std::ofstream(path) << "a\n";
  CHECK_FALSE(read_sidecar(path));
  write_sidecar(path, s);
  CHECK(read_sidecar(path) == s);
  std::filesystem::remove(path);
  std::filesystem::remove(sidecar_path(path));
}
