#include "speca/target_model.hpp"

#include <stdexcept>

namespace speca {

PartialVerifyResult DenoiserTarget::verify_block(const std::vector<Tensor>& predicted,
                                                 int verify_layer, const Tensor& x,
                                                 int t,
                                                 const DiffusionSchedule& sched) const {
    (void)sched;
    VerifierConfig cfg;
    cfg.verify_layer = verify_layer;
    return partial_verify_pass(model_, predicted, cfg, x, t);
}

double GmmTarget::flops() const {
    // per-component: squared distance (d MACs) + score accumulation (d MACs)
    return 2.0 * static_cast<double>(spec_.components()) * spec_.dim();
}

ModelOutput GmmTarget::forward(const Tensor& x, int t,
                               const DiffusionSchedule& sched) const {
    ModelOutput out;
    out.eps_hat = gmm_eps(spec_, x, t, sched);
    out.layer_features = {out.eps_hat};
    out.flops = flops();
    return out;
}

PartialVerifyResult GmmTarget::verify_block(const std::vector<Tensor>& predicted,
                                            int verify_layer, const Tensor& x, int t,
                                            const DiffusionSchedule& sched) const {
    (void)predicted;
    if (verify_layer != 0)
        throw std::invalid_argument("gmm target has a single pseudo-layer");
    PartialVerifyResult r;
    r.actual_feature = gmm_eps(spec_, x, t, sched);
    r.verify_flops = flops();
    return r;
}

}  // namespace speca
