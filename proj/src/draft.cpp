#include "speca/draft.hpp"

#include <stdexcept>

#include "speca/target_model.hpp"

namespace speca {

std::string to_string(DraftKind k) {
    switch (k) {
        case DraftKind::Taylor: return "taylor";
        case DraftKind::AdamsBashforth: return "adams_bashforth";
        case DraftKind::Reuse: return "reuse";
    }
    throw std::logic_error("unreachable");
}

DraftKind draft_kind_from_string(const std::string& s) {
    if (s == "taylor") return DraftKind::Taylor;
    if (s == "adams_bashforth") return DraftKind::AdamsBashforth;
    if (s == "reuse") return DraftKind::Reuse;
    throw std::invalid_argument("unknown draft kind: " + s);
}

FeatureCache::FeatureCache(int anchor_gap, int order, int layers)
    : gap_(anchor_gap), order_(order), layers_(layers), history_(layers) {
    if (anchor_gap < 1) throw std::invalid_argument("anchor_gap must be >= 1");
    if (order < 0 || order > 12) throw std::invalid_argument("order overflow");
    if (layers < 1) throw std::invalid_argument("cache needs >= 1 layer");
}

int FeatureCache::history_len() const { return static_cast<int>(times_.size()); }

int FeatureCache::newest_t() const {
    if (times_.empty()) throw std::invalid_argument("cold cache");
    return times_.front();
}

void FeatureCache::clear() {
    times_.clear();
    for (auto& h : history_) h.clear();
}

void FeatureCache::push(int t, const std::vector<Tensor>& features, bool reset) {
    if (static_cast<int>(features.size()) != layers_)
        throw std::invalid_argument("cache_push: layer count mismatch");
    if (reset) clear();
    if (!times_.empty() && t != times_.front() - gap_)
        throw std::invalid_argument("broken anchor chain");
    times_.push_front(t);
    for (int l = 0; l < layers_; ++l) {
        if (!history_[l].empty() && !history_[l].front().same_shape(features[l]))
            throw std::invalid_argument("cache_push: feature shape mismatch");
        history_[l].push_front(features[l]);
    }
    while (static_cast<int>(times_.size()) > order_ + 1) {
        times_.pop_back();
        for (auto& h : history_) h.pop_back();
    }
}

const Tensor& FeatureCache::anchor_feature(int layer, int age) const {
    if (layer < 0 || layer >= layers_) throw std::invalid_argument("layer out of range");
    if (age < 0 || age >= history_len()) throw std::invalid_argument("cold cache");
    return history_[layer][age];
}

Tensor FeatureCache::finite_difference(int layer, int i) const {
    if (i < 0 || i > order_) throw std::invalid_argument("order overflow");
    if (history_len() < i + 1) throw std::invalid_argument("cold cache");
    Tensor acc = Tensor::zeros(anchor_feature(layer, 0).shape);
    for (int j = 0; j <= i; ++j) {
        double sign = ((i - j) % 2 == 0) ? 1.0 : -1.0;
        double coef = sign * static_cast<double>(binomial(i, j));
        axpy(coef, anchor_feature(layer, j), acc);
    }
    return acc;
}

Tensor FeatureCache::taylor_predict(int layer, int k) const {
    if (k < 1) throw std::invalid_argument("lookahead must be >= 1");
    if (history_len() < order_ + 1) throw std::invalid_argument("cold cache");
    // Newton difference polynomial through the m+1 anchors, evaluated at
    // t - k: coeff_i = binom(s, i) with s = -k/N over the forward
    // differences toward older anchors.
    double s = -static_cast<double>(k) / gap_;
    Tensor out = anchor_feature(layer, 0);
    double coef = 1.0;
    for (int i = 1; i <= order_; ++i) {
        coef *= (s - (i - 1)) / i;
        axpy(coef, finite_difference(layer, i), out);
    }
    out.require_finite("taylor_predict");
    return out;
}

Tensor FeatureCache::adams_bashforth_predict(int layer, int k) const {
    if (k < 1) throw std::invalid_argument("lookahead must be >= 1");
    if (history_len() < 2) throw std::invalid_argument("cold cache");
    const Tensor& f0 = anchor_feature(layer, 0);  // F(t)
    const Tensor& f1 = anchor_feature(layer, 1);  // F(t+N)
    Tensor s0 = Tensor::zeros(f0.shape);
    axpy(1.0 / gap_, f0, s0);
    axpy(-1.0 / gap_, f1, s0);
    Tensor out = f0;
    if (history_len() >= 3) {
        const Tensor& f2 = anchor_feature(layer, 2);  // F(t+2N)
        Tensor s1 = Tensor::zeros(f0.shape);
        axpy(1.0 / gap_, f1, s1);
        axpy(-1.0 / gap_, f2, s1);
        axpy(1.5 * k, s0, out);
        axpy(-0.5 * k, s1, out);
    } else {
        axpy(static_cast<double>(k), s0, out);
    }
    out.require_finite("adams_bashforth_predict");
    return out;
}

bool FeatureCache::warm(DraftKind kind) const {
    switch (kind) {
        case DraftKind::Reuse: return history_len() >= 1;
        case DraftKind::AdamsBashforth: return history_len() >= 2;
        case DraftKind::Taylor: return history_len() >= order_ + 1;
    }
    return false;
}

DraftPrediction predict_all_layers(const FeatureCache& cache, DraftKind kind, int k,
                                   const TargetModel& model) {
    if (!cache.warm(kind)) throw std::invalid_argument("cold cache");
    DraftPrediction pred;
    pred.layer_features.reserve(cache.layers());
    double extrap_macs = 0.0;
    for (int l = 0; l < cache.layers(); ++l) {
        Tensor f;
        switch (kind) {
            case DraftKind::Reuse:
                f = cache.anchor_feature(l, 0);
                break;
            case DraftKind::AdamsBashforth:
                f = cache.adams_bashforth_predict(l, k);
                extrap_macs += 2.0 * f.size();
                break;
            case DraftKind::Taylor:
                f = cache.taylor_predict(l, k);
                extrap_macs += static_cast<double>(cache.order()) * f.size();
                break;
        }
        pred.layer_features.push_back(std::move(f));
    }
    pred.eps_hat = model.head(pred.layer_features.back());
    pred.flops = model.head_flops() + extrap_macs;
    return pred;
}

}  // namespace speca
