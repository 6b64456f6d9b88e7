#include "crc/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "crc/error.hpp"

namespace crc {
namespace {

double evaluate(const ScalarFn& f, const std::vector<Tensor>& inputs) {
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(inputs.size());
    for (const auto& t : inputs) leaves.push_back(tape.constant(t));
    const Var out = f(tape, leaves);
    if (out.value().size() != 1) throw DimensionError("grad_check needs a scalar-valued function");
    const double v = out.value()[0];
    if (!std::isfinite(v)) throw NumericError("grad_check: function is not finite");
    return v;
}

}  // namespace

GradCheckReport grad_check(const ScalarFn& f, const std::vector<Tensor>& inputs, double eps) {
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(inputs.size());
    for (const auto& t : inputs) leaves.push_back(tape.leaf(t, true));
    const Var out = f(tape, leaves);
    if (out.value().size() != 1) throw DimensionError("grad_check needs a scalar-valued function");
    if (!std::isfinite(out.value()[0])) throw NumericError("grad_check: function is not finite");
    tape.backward(out);

    GradCheckReport report;
    std::vector<Tensor> probe = inputs;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const Tensor analytic = tape.grad(leaves[i]);
        for (std::size_t j = 0; j < inputs[i].size(); ++j) {
            const double orig = probe[i][j];
            probe[i][j] = orig + eps;
            const double fp = evaluate(f, probe);
            probe[i][j] = orig - eps;
            const double fm = evaluate(f, probe);
            probe[i][j] = orig;
            const double numeric = (fp - fm) / (2.0 * eps);
            const double a = analytic[j];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
            const double rel = std::abs(a - numeric) / denom;
            ++report.checked;
            if (rel > report.max_rel_error || report.checked == 1) {
                report.max_rel_error = std::max(rel, report.max_rel_error);
                if (rel >= report.max_rel_error) {
                    report.worst_input = i;
                    report.worst_index = j;
                    report.analytic = a;
                    report.numeric = numeric;
                }
            }
        }
    }
    return report;
}

double grad_check(const std::function<Var(Var)>& f, const Tensor& x, double eps) {
    return grad_check([&f](Tape&, const std::vector<Var>& v) { return f(v[0]); }, {x}, eps).max_rel_error;
}

}  // namespace crc
