#pragma once

#include <functional>
#include <vector>

#include "crc/autodiff.hpp"

namespace crc {

// Builds a scalar on the given tape from leaves holding the inputs.
using ScalarFn = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t worst_input = 0;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t checked = 0;
};

// Compares reverse-mode gradients with central differences
// (f(x+eps e) - f(x-eps e)) / 2eps, element by element. Relative error uses
// the denominator max(|analytic|, |numeric|, 1e-8). Throws NumericError if f
// is not finite at any evaluated point.
GradCheckReport grad_check(const ScalarFn& f, const std::vector<Tensor>& inputs, double eps = 1e-6);

double grad_check(const std::function<Var(Var)>& f, const Tensor& x, double eps = 1e-6);

}  // namespace crc
