#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "sgood/rng.hpp"
#include "sgood/tensor.hpp"

namespace sgood {

// Named trainable tensors. std::map keeps iteration deterministic.
using ParamSet = std::map<std::string, Tensor>;

Tensor glorot_uniform(int rows, int cols, Rng& rng);

// Checkpoint file: magic + version header, then per tensor the name, shape
// and raw little-endian 64-bit values.
void save_params(const ParamSet& params, const std::filesystem::path& file);
ParamSet load_params(const std::filesystem::path& file);

}  // namespace sgood
