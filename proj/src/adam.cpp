#include "sgood/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace sgood {

void adam_step(ParamSet& params, const std::map<std::string, Tensor>& grads, AdamState& state,
               const AdamConfig& cfg) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (auto& [name, p] : params) {
    const auto it = grads.find(name);
    if (it == grads.end()) throw std::invalid_argument("adam_step: missing gradient for " + name);
    const Tensor& g = it->second;
    if (!g.same_shape(p)) throw std::invalid_argument("adam_step: gradient shape mismatch for " + name);
    Tensor& m = state.m.try_emplace(name, Tensor(p.rows, p.cols)).first->second;
    Tensor& v = state.v.try_emplace(name, Tensor(p.rows, p.cols)).first->second;
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g.data[i];
      v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g.data[i] * g.data[i];
      const double m_hat = m.data[i] / bc1;
      const double v_hat = v.data[i] / bc2;
      p.data[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

}  // namespace sgood
