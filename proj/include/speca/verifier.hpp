#pragma once

#include <string>
#include <vector>

#include "speca/denoiser.hpp"
#include "speca/stats.hpp"
#include "speca/tensor.hpp"

namespace speca {

enum class ErrorNorm { L1, L2, Linf, Cosine };

std::string to_string(ErrorNorm n);
ErrorNorm error_norm_from_string(const std::string& s);

struct VerifierConfig {
    double tau0 = 0.5;
    double decay = 0.05;        // beta in (0,1)
    double epsilon = 1e-8;      // relative-error stabilizer
    ErrorNorm norm_kind = ErrorNorm::L2;
    int verify_layer = -1;      // -1 = last layer
    int max_draft_len = 8;      // K
    // off by default: substitute the recomputed verify-layer feature for the
    // predicted one on accepted steps (strictly-better variant)
    bool substitute_recomputed = false;

    void validate(int layers) const;
    int resolved_verify_layer(int layers) const;
};

/// Relative error e_k between predicted and actual features.
double relative_error(const Tensor& pred, const Tensor& actual, const VerifierConfig& cfg);

/// Adaptive threshold tau_t = tau0 * decay^((T - t)/T).
double threshold_at(const VerifierConfig& cfg, int t, int T);

/// Recompute only the verify layer's true output from the predicted
/// previous-layer feature (or from the input embedding of x when the verify
/// layer is block 0). Returns the recomputed feature and the flops charged
/// to verification.
struct PartialVerifyResult {
    Tensor actual_feature;
    double verify_flops = 0.0;
};
PartialVerifyResult partial_verify_pass(const LayeredDenoiser& model,
                                        const std::vector<Tensor>& predicted,
                                        const VerifierConfig& cfg,
                                        const Tensor& x, int t);

/// Sequential accept/reject scan: accepted steps form a prefix; the first
/// violation sends that step and all later ones to the reject set.
struct VerificationOutcome {
    std::vector<int> accepted;  // k indices (1-based) in acceptance order
    std::vector<int> rejected;
    std::vector<double> errors;
    std::vector<double> thresholds;
};
VerificationOutcome sequential_validate(const std::vector<double>& errors,
                                        const std::vector<double>& thresholds);

}  // namespace speca
