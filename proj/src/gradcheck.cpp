#include "ncd/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ncd/errors.hpp"

namespace ncd {

std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> at, double h) {
  if (!(h > 0.0)) throw ValidationError("finite_diff_grad: h must be positive");
  std::vector<double> grad(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double x0 = at[i];
    at[i] = x0 + h;
    const double fp = f(at);
    at[i] = x0 - h;
    const double fm = f(at);
    at[i] = x0;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericError("finite_diff_grad: objective non-finite at coordinate " +
                         std::to_string(i));
    }
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

double max_rel_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ValidationError("max_rel_error: length mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({1.0, std::abs(a[i]), std::abs(b[i])});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

}  // namespace ncd
