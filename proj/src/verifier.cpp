#include "speca/verifier.hpp"

#include <cmath>
#include <stdexcept>

namespace speca {

std::string to_string(ErrorNorm n) {
    switch (n) {
        case ErrorNorm::L1: return "l1";
        case ErrorNorm::L2: return "l2";
        case ErrorNorm::Linf: return "linf";
        case ErrorNorm::Cosine: return "cosine";
    }
    throw std::logic_error("unreachable");
}

ErrorNorm error_norm_from_string(const std::string& s) {
    if (s == "l1") return ErrorNorm::L1;
    if (s == "l2") return ErrorNorm::L2;
    if (s == "linf") return ErrorNorm::Linf;
    if (s == "cosine") return ErrorNorm::Cosine;
    throw std::invalid_argument("unknown error norm: " + s);
}

void VerifierConfig::validate(int layers) const {
    if (!(tau0 >= 0)) throw std::invalid_argument("verifier: tau0 must be >= 0");
    if (!(decay > 0 && decay < 1)) throw std::invalid_argument("verifier: decay in (0,1)");
    if (!(epsilon > 0)) throw std::invalid_argument("verifier: epsilon must be > 0");
    if (verify_layer >= layers) throw std::invalid_argument("verifier: verify_layer >= L");
    if (max_draft_len < 0) throw std::invalid_argument("verifier: max_draft_len < 0");
}

int VerifierConfig::resolved_verify_layer(int layers) const {
    return verify_layer < 0 ? layers - 1 : verify_layer;
}

double relative_error(const Tensor& pred, const Tensor& actual,
                      const VerifierConfig& cfg) {
    if (!pred.same_shape(actual))
        throw std::invalid_argument("relative_error: shape mismatch");
    if (cfg.norm_kind == ErrorNorm::Cosine) {
        double na = 0, np = 0, dot = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            np += pred[i] * pred[i];
            na += actual[i] * actual[i];
            dot += pred[i] * actual[i];
        }
        if (np == 0.0 || na == 0.0) return 1.0;
        return 1.0 - dot / std::sqrt(np * na);
    }
    NormKind nk = cfg.norm_kind == ErrorNorm::L1   ? NormKind::L1
                  : cfg.norm_kind == ErrorNorm::L2 ? NormKind::L2
                                                   : NormKind::Linf;
    return norm(pred - actual, nk) / (norm(actual, nk) + cfg.epsilon);
}

double threshold_at(const VerifierConfig& cfg, int t, int T) {
    return cfg.tau0 * std::pow(cfg.decay, static_cast<double>(T - t) / T);
}

PartialVerifyResult partial_verify_pass(const LayeredDenoiser& model,
                                        const std::vector<Tensor>& predicted,
                                        const VerifierConfig& cfg,
                                        const Tensor& x, int t) {
    int v = cfg.resolved_verify_layer(model.layers());
    PartialVerifyResult r;
    if (v == 0) {
        Tensor h0 = model.input_embedding(x, t);
        r.actual_feature = model.run_block(0, h0);
        r.verify_flops = model.input_head_flops() + model.block_flops();
    } else {
        if (static_cast<int>(predicted.size()) <= v - 1 || predicted[v - 1].empty())
            throw std::invalid_argument("partial_verify_pass: missing predicted input");
        r.actual_feature = model.run_block(v, predicted[v - 1]);
        r.verify_flops = model.block_flops();
    }
    return r;
}

VerificationOutcome sequential_validate(const std::vector<double>& errors,
                                        const std::vector<double>& thresholds) {
    if (errors.size() != thresholds.size())
        throw std::invalid_argument("sequential_validate: length mismatch");
    VerificationOutcome out;
    out.errors = errors;
    out.thresholds = thresholds;
    bool rejecting = false;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        int k = static_cast<int>(i) + 1;
        if (!rejecting && errors[i] <= thresholds[i]) {
            out.accepted.push_back(k);
        } else {
            rejecting = true;
            out.rejected.push_back(k);
        }
    }
    return out;
}

}  // namespace speca
