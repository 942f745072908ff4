// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mae4d/simplemae/config.hpp"
#include "mae4d/simplemae/params.hpp"

namespace mae4d::simplemae {

class ContainerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor container on disk:
///
///   line 1   "MAE4D-CONTAINER 1"
///   line 2   header JSON on a single line: {"meta": {...}, "tensors":
///            [{"name", "shape", "offset"}...]}; offsets count float32
///            values from the start of the payload
///   rest     raw little-endian float32 values in manifest order
///
/// Values are stored as float32 and widened back to double on load.
struct Container {
  nlohmann::json meta = nlohmann::json::object();
  ParamSet tensors;
};

/// Writes to `<path>.tmp` and renames over `path`.
void write_container(const std::filesystem::path& path, const Container& c);
Container read_container(const std::filesystem::path& path);

/// Rounds every value through float32, matching what a save/load cycle does.
ParamSet round_to_float32(const ParamSet& params);

struct Checkpoint {
  ModelConfig config;
  ParamSet params;
  nlohmann::json extra = nlohmann::json::object();
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Loads and verifies that every tensor matches the stored config's specs.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mae4d::simplemae
