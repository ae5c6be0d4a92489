#include "ncd/adam.hpp"

#include <cmath>

#include "ncd/errors.hpp"

namespace ncd {

Adam::Adam(AdamConfig cfg, const std::vector<const Matrix*>& params) : cfg_(cfg) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Matrix* p : params) {
    m_.emplace_back(p->rows(), p->cols());
    v_.emplace_back(p->rows(), p->cols());
  }
}

void Adam::step(const std::vector<Matrix*>& params,
                const std::vector<const Matrix*>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ValidationError("adam_step: tensor count mismatch");
  }
  ++t_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i];
    const Matrix& g = *grads[i];
    if (!p.same_shape(m_[i]) || !g.same_shape(m_[i])) {
      throw ValidationError("adam_step: shape mismatch");
    }
    double* pd = p.data().data();
    const double* gd = g.data().data();
    double* md = m_[i].data().data();
    double* vd = v_[i].data().data();
    std::size_t n = p.size();
    for (std::size_t j = 0; j < n; ++j) {
      md[j] = cfg_.beta1 * md[j] + (1.0 - cfg_.beta1) * gd[j];
      vd[j] = cfg_.beta2 * vd[j] + (1.0 - cfg_.beta2) * gd[j] * gd[j];
      double m_hat = md[j] / bc1;
      double v_hat = vd[j] / bc2;
      pd[j] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

}  // namespace ncd
