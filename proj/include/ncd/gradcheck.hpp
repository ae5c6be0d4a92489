#ifndef NCD_GRADCHECK_HPP
#define NCD_GRADCHECK_HPP

#include <functional>
#include <span>
#include <vector>

namespace ncd {

// Central differences (f(x+h e_i) - f(x-h e_i)) / (2h) per coordinate.
// Throws NumericError if f evaluates to a non-finite value.
std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> at, double h);

// max_i |a_i - b_i| / max(1, |a_i|, |b_i|); the relative-error metric every
// gradient check in this repo is held to.
double max_rel_error(std::span<const double> a, std::span<const double> b);

}  // namespace ncd

#endif  // NCD_GRADCHECK_HPP
