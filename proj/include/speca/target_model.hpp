#pragma once

#include <memory>
#include <vector>

#include "speca/denoiser.hpp"
#include "speca/gmm.hpp"
#include "speca/schedule.hpp"
#include "speca/tensor.hpp"
#include "speca/verifier.hpp"

namespace speca {

/// What the sampling engine needs from a "full" model: forward passes with
/// per-layer features, the head that maps the final feature to eps_hat, and
/// a partial recomputation of one block for verification.
class TargetModel {
public:
    virtual ~TargetModel() = default;

    virtual int layers() const = 0;
    virtual int dim() const = 0;
    virtual double flops() const = 0;
    virtual double head_flops() const = 0;

    virtual ModelOutput forward(const Tensor& x, int t,
                                const DiffusionSchedule& sched) const = 0;
    virtual Tensor head(const Tensor& final_feature) const = 0;
    virtual PartialVerifyResult verify_block(const std::vector<Tensor>& predicted,
                                             int verify_layer, const Tensor& x, int t,
                                             const DiffusionSchedule& sched) const = 0;
};

class DenoiserTarget : public TargetModel {
public:
    explicit DenoiserTarget(LayeredDenoiser model) : model_(std::move(model)) {}

    const LayeredDenoiser& model() const { return model_; }

    int layers() const override { return model_.layers(); }
    int dim() const override { return model_.dim(); }
    double flops() const override { return model_.flops(); }
    double head_flops() const override { return model_.output_head_flops(); }

    ModelOutput forward(const Tensor& x, int t,
                        const DiffusionSchedule& sched) const override {
        return model_.forward(x, t, sched);
    }
    Tensor head(const Tensor& f) const override { return model_.output_head(f); }
    PartialVerifyResult verify_block(const std::vector<Tensor>& predicted,
                                     int verify_layer, const Tensor& x, int t,
                                     const DiffusionSchedule& sched) const override;

private:
    LayeredDenoiser model_;
};

/// The analytic mixture model exposed as a single pseudo-layer whose feature
/// is its exact eps output; the head is the identity. Verification against
/// it degenerates to a full recomputation (gamma = 1).
class GmmTarget : public TargetModel {
public:
    explicit GmmTarget(GmmSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

    const GmmSpec& spec() const { return spec_; }

    int layers() const override { return 1; }
    int dim() const override { return static_cast<int>(spec_.dim()); }
    double flops() const override;
    double head_flops() const override { return 0.0; }

    ModelOutput forward(const Tensor& x, int t,
                        const DiffusionSchedule& sched) const override;
    Tensor head(const Tensor& f) const override { return f; }
    PartialVerifyResult verify_block(const std::vector<Tensor>& predicted,
                                     int verify_layer, const Tensor& x, int t,
                                     const DiffusionSchedule& sched) const override;

private:
    GmmSpec spec_;
};

}  // namespace speca
