#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridcurio/nn/layers.hpp"

namespace gridcurio {

struct NamedTensor {
  std::string name;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<float> data;  // column-major
};

/// Layout (little-endian): "GCKP", u32 version, u32 length + config text,
/// u32 tensor count, then per tensor u32 name length, name, u32 rows,
/// u32 cols, rows * cols float32.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;
  std::uint32_t version = kVersion;
  std::string config_echo;
  std::vector<NamedTensor> tensors;
};

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
/// Throws ParseError on a bad magic, unknown version or truncated file.
Checkpoint read_checkpoint(const std::string& path);

Checkpoint snapshot(const nn::ParameterList<float>& params, const std::string& config_echo);
/// Copies values by name; throws UsageError on a missing name or shape mismatch.
void restore(const Checkpoint& ckpt, const nn::ParameterList<float>& params);

}  // namespace gridcurio
