#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "sgood/params.hpp"

namespace sgood {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::int64_t step = 0;
  std::map<std::string, Tensor> m;  // first moments, shaped like the params
  std::map<std::string, Tensor> v;  // second moments
};

// Bias-corrected Adam update, in place. Moments are created on first use.
void adam_step(ParamSet& params, const std::map<std::string, Tensor>& grads, AdamState& state,
               const AdamConfig& cfg);

}  // namespace sgood
