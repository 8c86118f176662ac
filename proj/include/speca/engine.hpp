#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "speca/draft.hpp"
#include "speca/schedule.hpp"
#include "speca/target_model.hpp"
#include "speca/verifier.hpp"

namespace speca {

enum class StepKind { Full, AcceptedSpec, RejectedFull };

std::string to_string(StepKind k);

struct StepRecord {
    int t = 0;
    StepKind kind = StepKind::Full;
    double e_k = 0.0;    // only meaningful for speculated steps
    double tau_t = 0.0;
    double flops = 0.0;
};

struct Trajectory {
    std::vector<std::pair<int, Tensor>> states;  // (t, x_t), t = T down to 0
    Tensor terminal;                             // x_0
    std::vector<StepRecord> steps;               // one per sampler step
};

/// Cost accounting for one run. All costs are multiply-accumulate counts.
struct CostLedger {
    int T = 0;               // reference protocol length
    int steps_performed = 0;
    int T_full = 0;
    int T_spec = 0;          // accepted speculative steps
    int n_rejected = 0;      // rejected speculation attempts
    double C = 0.0;          // full pass cost
    double C_pred = 0.0;     // per speculated step
    double C_verify = 0.0;   // per speculated step
    double overhead = 0.0;   // rejected attempts' pred+verify work
    double total = 0.0;

    double accept_rate() const { return T == 0 ? 0.0 : static_cast<double>(T_spec) / T; }
    double verify_ratio() const { return C == 0.0 ? 0.0 : C_verify / C; }

    /// Checks total == T_full*C + T_spec*(C_pred + C_verify) + overhead against
    /// the summed per-step records; throws on mismatch.
    void reconcile(const Trajectory& traj) const;
};

struct Speedup {
    double theoretical = 1.0;   // 1 / (1 - a + a*g), g = C_verify / C
    double measured = 1.0;      // T*C / total
    double lower_bound = 1.0;   // 1 / (1 - a(1 - g - C_overhead/C))
};

Speedup speedup(const CostLedger& ledger);

struct EngineConfig {
    DraftKind draft = DraftKind::Taylor;
    int order = 1;       // m
    int anchor_gap = 4;  // N
    VerifierConfig verifier;
    SamplerKind sampler;
    std::uint64_t seed = 0;

    int cache_order() const { return draft == DraftKind::Reuse ? 0 : order; }
    int warmup_anchors() const {
        switch (draft) {
            case DraftKind::Reuse: return 1;
            case DraftKind::AdamsBashforth: return 2;
            case DraftKind::Taylor: return order + 1;
        }
        return 1;
    }
};

/// Called on each accepted speculative step with the timestep, predicted
/// per-layer features, and the state the step was taken from. Observer work
/// is diagnostic only; it must not touch the rng or the ledger.
using SpecObserver = std::function<void(int t, const std::vector<Tensor>& predicted,
                                        const Tensor& x_before)>;

/// The speculate-verify sampling loop: warm-up anchors, per-step draft
/// prediction and single-block verification, rejection re-anchoring, and a
/// forced full pass after max_draft_len consecutive acceptances.
std::pair<Trajectory, CostLedger> run_speca(const TargetModel& model,
                                            const DiffusionSchedule& sched,
                                            const EngineConfig& cfg, SeededRng& rng,
                                            const SpecObserver& observer = {});

enum class BaselineKind { Full, StepReduction, Fora, ForecastOnly };

std::string to_string(BaselineKind k);
BaselineKind baseline_kind_from_string(const std::string& s);

struct BaselineConfig {
    BaselineKind kind = BaselineKind::Full;
    double fraction = 0.5;  // step_reduction
    int anchor_gap = 4;     // fora / forecast_only
    int order = 1;          // forecast_only
    SamplerKind sampler;
    std::uint64_t seed = 0;
};

std::pair<Trajectory, CostLedger> run_baseline(const TargetModel& model,
                                               const DiffusionSchedule& sched,
                                               const BaselineConfig& cfg,
                                               SeededRng& rng);

struct BatchResult {
    std::vector<Trajectory> trajectories;
    std::vector<CostLedger> ledgers;
};

/// Independent runs with per-sample rng streams derived from the base seed.
BatchResult run_batch(const TargetModel& model, const DiffusionSchedule& sched,
                      const EngineConfig& cfg, std::size_t n_samples,
                      std::uint64_t base_seed);

BatchResult run_batch_baseline(const TargetModel& model, const DiffusionSchedule& sched,
                               const BaselineConfig& cfg, std::size_t n_samples,
                               std::uint64_t base_seed);

}  // namespace speca
