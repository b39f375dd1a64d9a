#pragma once

#include <cmath>
#include <vector>

#include "camloc/tensor.hpp"

namespace camloc {

// SGD with momentum and decoupled-from-bias L2 decay. One velocity tensor
// per parameter tensor, registered in update order.
template <class T>
struct OptimizerStateT {
    std::vector<TensorT<T>> velocity;
    T momentum = T(0.8);
    T weight_decay = T(0.0005);
    T base_lr = T(0.01);
    T decay_per_epoch = T(0.01);

    void validate() const {
        check(momentum >= T(0) && momentum < T(1), "optimizer: momentum must be in [0,1)");
        check(weight_decay >= T(0), "optimizer: weight decay must be non-negative");
        check(base_lr > T(0), "optimizer: base learning rate must be positive");
    }
};

using OptimizerState = OptimizerStateT<float>;

template <class T>
T lr_at_epoch(const OptimizerStateT<T>& state, int epoch) {
    check(epoch >= 0, "lr schedule: epoch must be non-negative");
    return state.base_lr * static_cast<T>(std::pow(double(T(1) - state.decay_per_epoch), epoch));
}

// v <- momentum*v - lr*(grad + decay*param); param <- param + v.
// decay_mask[i] false exempts biases and batch-norm affine parameters.
template <class T>
void sgd_momentum_step(std::vector<TensorT<T>*>& params, const std::vector<const TensorT<T>*>& grads,
                       OptimizerStateT<T>& state, T lr, const std::vector<bool>& decay_mask) {
    check(params.size() == grads.size() && params.size() == decay_mask.size(),
          "optimizer: params/grads/mask size mismatch");
    if (state.velocity.empty())
        for (const auto* p : params) state.velocity.emplace_back(p->shape);
    check(state.velocity.size() == params.size(), "optimizer: velocity count mismatch");
    for (size_t i = 0; i < params.size(); ++i) {
        TensorT<T>& p = *params[i];
        const TensorT<T>& g = *grads[i];
        TensorT<T>& v = state.velocity[i];
        check(v.same_shape(p) && g.same_shape(p), "optimizer: shape mismatch at parameter " +
                                                      std::to_string(i));
        const T wd = decay_mask[i] ? state.weight_decay : T(0);
        for (int64_t j = 0; j < p.size(); ++j) {
            v[j] = state.momentum * v[j] - lr * (g[j] + wd * p[j]);
            p[j] += v[j];
        }
    }
}

}  // namespace camloc
