#pragma once

#include <string>
#include <vector>

#include "speca/rng.hpp"
#include "speca/tensor.hpp"

namespace speca {

enum class ScheduleKind { Linear, Cosine };

/// Noise schedule over T steps. Indexing is 1-based in the API (t = 1..T),
/// with alpha_bar(0) == 1 by convention.
struct DiffusionSchedule {
    ScheduleKind kind = ScheduleKind::Linear;
    int T = 0;
    double beta_start = 0.0;
    double beta_end = 0.0;
    std::vector<double> betas;       // betas[t-1] = beta_t
    std::vector<double> alphas;      // 1 - beta_t
    std::vector<double> alpha_bars;  // prod_{s<=t} alpha_s
    std::vector<double> sigmas;      // sqrt(beta_t)

    double beta(int t) const { return betas.at(t - 1); }
    double alpha(int t) const { return alphas.at(t - 1); }
    double sigma(int t) const { return sigmas.at(t - 1); }
    double alpha_bar(int t) const { return t == 0 ? 1.0 : alpha_bars.at(t - 1); }
};

DiffusionSchedule build_schedule(ScheduleKind kind, int T,
                                 double beta_start = 1e-4, double beta_end = 2e-2);

enum class SamplerTag { Ddpm, Ddim };

struct SamplerKind {
    SamplerTag tag = SamplerTag::Ddim;
    double eta = 0.0;  // ignored for ddpm; 0 = deterministic ddim
};

/// One reverse DDPM step: posterior mean plus sigma_t * z, z suppressed at t = 1.
Tensor ddpm_step(const Tensor& x_t, const Tensor& eps_hat, int t,
                 const DiffusionSchedule& sched, SeededRng& rng);

/// Posterior mean only (no noise term), for the degeneracy checks.
Tensor ddpm_posterior_mean(const Tensor& x_t, const Tensor& eps_hat, int t,
                           const DiffusionSchedule& sched);

/// Deterministic DDIM update (eta = 0 form) from t to t_prev < t.
Tensor ddim_step(const Tensor& x_t, const Tensor& eps_hat, int t, int t_prev,
                 const DiffusionSchedule& sched);

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& s);

}  // namespace speca
