#pragma once

#include <filesystem>

#include "pelp/artifact.hpp"
#include "pelp/neural.hpp"
#include "pelp/preprocess.hpp"

namespace pelp {

/// A trained model together with everything needed to run it again.
struct Checkpoint {
  ModelState model;
  HyperParams hyper;
  Vocabulary vocab;
  Stamp stamp;
};

/// Layout: "PELPCKPT", u64 header length, JSON header, then every parameter
/// tensor as little-endian f64 in Parameters::for_each order.
void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// Throws ParseError on a malformed file, including shape or vocabulary hash
/// mismatches between header and payload.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace pelp
