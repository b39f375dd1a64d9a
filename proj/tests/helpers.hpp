#pragma once

#include <functional>

#include "camloc/rng.hpp"
#include "camloc/tensor.hpp"

namespace camloc::testing {

inline DTensor random_dtensor(const std::vector<int>& shape, Rng& rng, double scale = 1.0) {
    DTensor t(shape);
    for (auto& v : t.data) v = rng.normal() * scale;
    return t;
}

inline double rel_err(double got, double want) {
    const double denom = std::max({std::abs(got), std::abs(want), 1e-8});
    return std::abs(got - want) / denom;
}

// Largest relative error between an analytic gradient and central differences
// of `loss` with respect to `x`.
inline double max_grad_rel_err(DTensor& x, const DTensor& analytic,
                               const std::function<double()>& loss, double h = 1e-5) {
    double worst = 0.0;
    for (int64_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double up = loss();
        x[i] = orig - h;
        const double down = loss();
        x[i] = orig;
        const double fd = (up - down) / (2.0 * h);
        worst = std::max(worst, rel_err(analytic[i], fd));
    }
    return worst;
}

}  // namespace camloc::testing
