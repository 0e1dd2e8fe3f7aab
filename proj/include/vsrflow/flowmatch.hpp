#pragma once

#include "vsrflow/common.hpp"
#include "vsrflow/tensor.hpp"
#include "vsrflow/video.hpp"

namespace vsrflow {

// Linear interpolation path z_t = (1-t)*z_hr + t*eps with velocity target
// v = z_hr - eps. eps is retained so tests can reconstruct the pair.
template <class T>
struct TrainingPair {
    LatentVideo<T> z_t;
    LatentVideo<T> v_target;
    T t = T(0);
    LatentVideo<T> eps;
};

template <class T>
inline TrainingPair<T> make_training_pair(const LatentVideo<T>& z_hr, const LatentVideo<T>& eps,
                                          T t) {
    check_contract(t >= T(0) && t <= T(1), "training pair: t out of [0,1]");
    check_shape(z_hr.data.same_shape(eps.data), "training pair: shape mismatch");
    TrainingPair<T> pair;
    pair.t = t;
    pair.eps = eps;
    pair.z_t = z_hr;
    pair.v_target = z_hr;
    for (size_t i = 0; i < z_hr.data.data.size(); ++i) {
        pair.z_t.data.data[i] = (T(1) - t) * z_hr.data.data[i] + t * eps.data.data[i];
        pair.v_target.data.data[i] = z_hr.data.data[i] - eps.data.data[i];
    }
    return pair;
}

template <class T>
inline double mse_loss(const LatentVideo<T>& pred, const LatentVideo<T>& target) {
    check_shape(pred.data.same_shape(target.data), "mse_loss: shape mismatch");
    return mean_sq_diff(pred.data, target.data);
}

// LR conditioning noise augmentation; u lives on the same thousandths axis as
// the flow-matching time and is passed onward as a micro condition.
template <class T>
inline LatentVideo<T> noise_augment(const LatentVideo<T>& lr, int64_t u, const LatentVideo<T>& eps) {
    check_contract(u >= 0 && u <= 1000, "noise_augment: u out of [0,1000]");
    check_shape(lr.data.same_shape(eps.data), "noise_augment: shape mismatch");
    T t_aug = T(double(u) / 1000.0);
    LatentVideo<T> out = lr;
    for (size_t i = 0; i < out.data.data.size(); ++i)
        out.data.data[i] = (T(1) - t_aug) * lr.data.data[i] + t_aug * eps.data.data[i];
    return out;
}

}  // namespace vsrflow
