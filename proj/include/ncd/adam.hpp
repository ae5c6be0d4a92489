#ifndef NCD_ADAM_HPP
#define NCD_ADAM_HPP

#include <vector>

#include "ncd/matrix.hpp"

namespace ncd {

struct AdamConfig {
  double lr = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard Adam with bias correction over a fixed set of tensors. Moments are
// allocated up front from the parameter shapes; step() throws on any shape
// drift. Fully deterministic: no internal randomness, fixed update order.
class Adam {
 public:
  Adam(AdamConfig cfg, const std::vector<const Matrix*>& params);

  void step(const std::vector<Matrix*>& params,
            const std::vector<const Matrix*>& grads);

  long steps_taken() const { return t_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace ncd

#endif  // NCD_ADAM_HPP
