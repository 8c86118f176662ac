#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "speca/rng.hpp"
#include "speca/schedule.hpp"
#include "speca/tensor.hpp"

namespace speca {

/// One full forward pass: noise prediction, per-block post-residual
/// features, and the multiply-accumulate count for the pass.
struct ModelOutput {
    Tensor eps_hat;
    std::vector<Tensor> layer_features;
    double flops = 0.0;
};

/// Residual MLP denoiser: [x | sinusoidal time embedding] -> input head ->
/// L residual blocks (affine, silu, affine, skip add) -> output head.
/// Parameters live in one flat vector so the trainer can do Adam and
/// finite-difference checks without touching the layout.
class LayeredDenoiser {
public:
    LayeredDenoiser() = default;
    LayeredDenoiser(int L, int H, int d, int time_embed_dim);

    static LayeredDenoiser random_init(int L, int H, int d, int time_embed_dim,
                                       std::uint64_t seed);

    int layers() const { return L_; }
    int hidden() const { return H_; }
    int dim() const { return d_; }
    int time_embed_dim() const { return te_; }
    bool initialized() const { return !params_.empty(); }

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    std::size_t param_count() const { return params_.size(); }

    ModelOutput forward(const Tensor& x, int t, const DiffusionSchedule& sched) const;

    /// Closed-form multiply-accumulate count of one full pass.
    double flops() const;
    double block_flops() const { return 2.0 * H_ * H_; }
    double input_head_flops() const { return static_cast<double>(H_) * (d_ + te_); }
    double output_head_flops() const { return static_cast<double>(d_) * H_; }

    /// Input-head embedding h0 (the "layer -1" feature fed to block 0).
    Tensor input_embedding(const Tensor& x, int t) const;

    /// Recompute a single residual block from a given input feature.
    Tensor run_block(int l, const Tensor& h_in) const;

    /// Output head applied to a final-layer feature.
    Tensor output_head(const Tensor& feature) const;

    Tensor time_embedding(int t) const;

    void save(const std::string& path) const;
    static LayeredDenoiser load(const std::string& path);

    // flat-parameter layout offsets (used by the trainer's backprop)
    std::size_t off_in_w() const { return 0; }
    std::size_t off_in_b() const { return static_cast<std::size_t>(H_) * (d_ + te_); }
    std::size_t off_block(int l) const {
        return off_in_b() + H_ + static_cast<std::size_t>(l) * (2 * H_ * H_ + 2 * H_);
    }
    std::size_t off_out_w() const { return off_block(L_); }
    std::size_t off_out_b() const { return off_out_w() + static_cast<std::size_t>(d_) * H_; }

private:
    int L_ = 0, H_ = 0, d_ = 0, te_ = 0;
    std::vector<double> params_;

    void require_init() const;
};

inline double silu(double x) { return x / (1.0 + std::exp(-x)); }
inline double silu_grad(double x) {
    double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

/// Crude empirical Lipschitz estimate of x -> eps_hat at fixed t.
double estimate_lipschitz(const LayeredDenoiser& model, const Tensor& x, int t,
                          const DiffusionSchedule& sched, int n_probes, SeededRng& rng);

}  // namespace speca
