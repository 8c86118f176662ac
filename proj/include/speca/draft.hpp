#pragma once

#include <deque>
#include <string>
#include <vector>

#include "speca/stats.hpp"
#include "speca/tensor.hpp"

namespace speca {

class TargetModel;

enum class DraftKind { Taylor, AdamsBashforth, Reuse };

std::string to_string(DraftKind k);
DraftKind draft_kind_from_string(const std::string& s);

/// Per-layer history of anchor features at spacing N, newest anchor first
/// (smallest timestep; sampling runs T -> 0, so older anchors sit at larger
/// timesteps). At most order+1 entries are retained per layer.
class FeatureCache {
public:
    FeatureCache(int anchor_gap, int order, int layers);

    int anchor_gap() const { return gap_; }
    int order() const { return order_; }
    int layers() const { return layers_; }

    /// Anchors currently held (same for every layer).
    int history_len() const;
    int newest_t() const;

    /// Append a full computation's features at timestep t. Without the reset
    /// flag, t must extend the anchor chain by exactly one gap.
    void push(int t, const std::vector<Tensor>& features, bool reset = false);

    void clear();

    /// Delta^i F at the newest anchor: sum_j (-1)^(i-j) C(i,j) F(t + jN),
    /// j = 0 at the newest anchor, increasing toward older ones.
    Tensor finite_difference(int layer, int i) const;

    /// Extrapolate the layer feature k steps past the newest anchor by
    /// evaluating the order-m Newton difference polynomial at t - k
    /// (exact for trajectories polynomial in the timestep of degree <= m).
    Tensor taylor_predict(int layer, int k) const;

    /// Two-step Adams-Bashforth on the anchor slopes; falls back to linear
    /// extrapolation when only two anchors are held.
    Tensor adams_bashforth_predict(int layer, int k) const;

    bool warm(DraftKind kind) const;

    const Tensor& anchor_feature(int layer, int age = 0) const;

private:
    int gap_;
    int order_;
    int layers_;
    std::vector<std::deque<Tensor>> history_;  // [layer], front = newest
    std::deque<int> times_;                    // front = newest (smallest t)
};

struct DraftPrediction {
    std::vector<Tensor> layer_features;
    Tensor eps_hat;
    double flops = 0.0;  // charged to C_pred
};

/// Predict every layer's feature k steps ahead and form eps_hat by running
/// the predicted final-layer feature through the model's output head.
DraftPrediction predict_all_layers(const FeatureCache& cache, DraftKind kind, int k,
                                   const TargetModel& model);

}  // namespace speca
