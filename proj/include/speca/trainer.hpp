#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "speca/denoiser.hpp"
#include "speca/gmm.hpp"
#include "speca/schedule.hpp"

namespace speca {

struct TrainConfig {
    int steps = 5000;
    int batch = 256;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LossCurve {
    std::vector<double> losses;
};

/// Gradient of the per-sample denoising loss ||eps_hat - eps||^2 with
/// respect to all parameters, accumulated into grad (scaled by weight).
/// Returns the sample loss.
double backprop_sample(const LayeredDenoiser& model, const Tensor& x_t, int t,
                       const Tensor& eps_target, std::vector<double>& grad,
                       double weight);

/// Denoising-objective training (MSE against the forward-process noise),
/// Adam, timesteps uniform in 1..T. Deterministic given cfg.seed.
LossCurve train(LayeredDenoiser& model, const GmmSpec& gmm,
                const DiffusionSchedule& sched, const TrainConfig& cfg);

/// Max relative deviation between backprop and central finite differences
/// (step 1e-5) on 64 randomly chosen parameters.
double grad_check(const LayeredDenoiser& model, const Tensor& x, int t,
                  const DiffusionSchedule& sched, std::uint64_t seed = 1234);

}  // namespace speca
