#pragma once

#include <vector>

#include "speca/rng.hpp"
#include "speca/schedule.hpp"
#include "speca/tensor.hpp"

namespace speca {

/// Isotropic Gaussian mixture in d dimensions; the tractable data
/// distribution whose diffused marginals have a closed-form score.
struct GmmSpec {
    std::vector<double> weights;
    std::vector<Tensor> means;
    std::vector<double> sigmas;

    std::size_t dim() const { return means.empty() ? 0 : means[0].size(); }
    std::size_t components() const { return weights.size(); }
    void validate() const;

    /// K equally weighted components on a circle of the given radius.
    static GmmSpec ring(int k, double radius, double sigma);
};

/// Exact noise prediction for the diffused mixture: the marginal at step t is
/// sum_i w_i N(sqrt(ab)*mu_i, (ab*s_i^2 + 1 - ab) I); returns
/// -sqrt(1-ab) * grad log p_t(x), with responsibilities in log space.
Tensor gmm_eps(const GmmSpec& spec, const Tensor& x, int t,
               const DiffusionSchedule& sched);

/// Log density of the diffused marginal p_t (used by the score oracle tests).
double gmm_log_pt(const GmmSpec& spec, const Tensor& x, int t,
                  const DiffusionSchedule& sched);

std::vector<Tensor> gmm_sample(const GmmSpec& spec, std::size_t n, SeededRng& rng);

}  // namespace speca
