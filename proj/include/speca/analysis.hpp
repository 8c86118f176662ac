#pragma once

#include <optional>
#include <string>
#include <vector>

#include "speca/engine.hpp"
#include "speca/gmm.hpp"

namespace speca {

/// Brute-force energy distance 2 E|A-B| - E|A-A'| - E|B-B'| over all pairs.
double energy_distance(const std::vector<Tensor>& a, const std::vector<Tensor>& b);

/// Per-step l2 gap between two trajectories on the same timestep grid.
std::vector<double> trajectory_deviation(const Trajectory& a, const Trajectory& b);

struct CorrelationTable {
    std::vector<std::optional<double>> layer_r;  // absent on degenerate variance
    int sample_count = 0;
};

/// Paired SpeCa-vs-full runs with equal seeds; correlates each layer's mean
/// predicted-feature error at accepted steps (capped at 16 probes per run)
/// against the terminal l2 deviation from the full baseline.
CorrelationTable layer_error_correlation(const TargetModel& model,
                                         const DiffusionSchedule& sched,
                                         const EngineConfig& cfg, int n_samples,
                                         std::uint64_t base_seed);

struct Theorem1Result {
    std::vector<double> errors;  // relative error per lookahead k
    std::vector<int> ks;
    bool exact = false;          // polynomial degree <= m case
    double max_rel_error = 0.0;
    double slope = 0.0;          // log-log fit, meaningful when !exact
    bool pass = false;
};

enum class Theorem1Trajectory { Polynomial, Exponential };

/// Synthetic scalar-feature growth check of the k^(m+1) error law: for
/// polynomial trajectories of degree <= m the predictor is exact; for the
/// smooth exponential trajectory the fitted log-log slope must fall inside
/// [m + 0.5, m + 1.5].
Theorem1Result theorem1_growth_check(Theorem1Trajectory kind, int degree, int m,
                                     int N, int k_max);

struct Theorem2Margin {
    std::vector<double> margins;  // bound(t) - tau_t per step
    double min_margin = 0.0;
    double median_margin = 0.0;
};

/// Diagnostic margin sqrt(beta_t (1 - alpha_bar_t) / (1 + |F|^2)) - tau_t.
Theorem2Margin theorem2_margin(const DiffusionSchedule& sched, const VerifierConfig& cfg,
                               const std::vector<double>& feature_norms);

enum class AblationAxis { Tau0, Decay, VerifyLayer, Norm, Draft };

std::string to_string(AblationAxis a);
AblationAxis ablation_axis_from_string(const std::string& s);

struct AblationCell {
    std::string value;          // axis value, printed
    double avg_total_flops = 0;
    double avg_speedup = 0;
    double avg_accept_rate = 0;
    double energy = 0;          // energy distance to reference samples
    std::vector<std::uint64_t> seeds;
};

struct AblationGrid {
    AblationAxis axis = AblationAxis::Tau0;
    std::vector<AblationCell> cells;
};

struct AxisValues {
    std::vector<double> numeric;       // tau0 / decay
    std::vector<int> layer_indices;    // verify_layer
    std::vector<ErrorNorm> norms;
    std::vector<DraftKind> drafts;
};

AxisValues default_axis_values(AblationAxis axis, int layers);

/// Seeds-averaged sweep over one axis: per cell, run_batch per seed and
/// record flops, measured speedup, acceptance rate, and energy distance of
/// the pooled terminal samples against reference mixture draws.
AblationGrid ablation_sweep(AblationAxis axis, const AxisValues& values,
                            const TargetModel& model, const GmmSpec& reference,
                            const DiffusionSchedule& sched, const EngineConfig& base,
                            int n_samples, const std::vector<std::uint64_t>& seeds);

}  // namespace speca
