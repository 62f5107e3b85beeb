#include "snakesynth/adam.hpp"

#include <cmath>

namespace snakesynth {

template <typename T>
void adam_step(std::span<Parameter<T>* const> params, const AdamConfig& config) {
  for (Parameter<T>* p : params) {
    ++p->step_count;
    const double t = static_cast<double>(p->step_count);
    const double correct1 = 1.0 - std::pow(config.beta1, t);
    const double correct2 = 1.0 - std::pow(config.beta2, t);
    T* w = p->value.raw();
    T* m = p->adam_m.raw();
    T* v = p->adam_v.raw();
    const T* g = p->grad.raw();
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double gi = g[i];
      const double mi = config.beta1 * m[i] + (1.0 - config.beta1) * gi;
      const double vi = config.beta2 * v[i] + (1.0 - config.beta2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double m_hat = mi / correct1;
      const double v_hat = vi / correct2;
      w[i] = static_cast<T>(w[i] - config.lr * m_hat / (std::sqrt(v_hat) + config.eps));
    }
  }
}

template void adam_step<float>(std::span<Parameter<float>* const>, const AdamConfig&);
template void adam_step<double>(std::span<Parameter<double>* const>, const AdamConfig&);

}  // namespace snakesynth
