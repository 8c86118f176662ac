#include "speca/engine.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace speca {

std::string to_string(StepKind k) {
    switch (k) {
        case StepKind::Full: return "full";
        case StepKind::AcceptedSpec: return "accepted_spec";
        case StepKind::RejectedFull: return "rejected_full";
    }
    throw std::logic_error("unreachable");
}

std::string to_string(BaselineKind k) {
    switch (k) {
        case BaselineKind::Full: return "full";
        case BaselineKind::StepReduction: return "step_reduction";
        case BaselineKind::Fora: return "fora";
        case BaselineKind::ForecastOnly: return "forecast_only";
    }
    throw std::logic_error("unreachable");
}

BaselineKind baseline_kind_from_string(const std::string& s) {
    if (s == "full") return BaselineKind::Full;
    if (s == "step_reduction") return BaselineKind::StepReduction;
    if (s == "fora") return BaselineKind::Fora;
    if (s == "forecast_only") return BaselineKind::ForecastOnly;
    throw std::invalid_argument("unknown baseline kind: " + s);
}

void CostLedger::reconcile(const Trajectory& traj) const {
    double summed = 0.0;
    for (const auto& s : traj.steps) summed += s.flops;
    double expect = T_full * C + T_spec * (C_pred + C_verify) + overhead;
    auto close = [](double a, double b) {
        return std::fabs(a - b) <= 1e-6 * std::max({std::fabs(a), std::fabs(b), 1.0});
    };
    if (!close(summed, total) || !close(expect, total))
        throw std::runtime_error("ledger does not reconcile against step records");
    if (T_full + T_spec != steps_performed)
        throw std::runtime_error("ledger step counts do not add up");
}

Speedup speedup(const CostLedger& ledger) {
    Speedup s;
    double a = ledger.accept_rate();
    double g = ledger.verify_ratio();
    s.theoretical = 1.0 / (1.0 - a + a * g);
    double reference = ledger.T * ledger.C;
    s.measured = ledger.total > 0 ? reference / ledger.total : 1.0;
    double c_ov = ledger.T_spec > 0
                      ? ledger.C_pred + ledger.overhead / ledger.T_spec
                      : 0.0;
    s.lower_bound = 1.0 / (1.0 - a * (1.0 - g - c_ov / ledger.C));
    return s;
}

namespace {

Tensor draw_initial(int d, SeededRng& rng) {
    Tensor x = Tensor::zeros({static_cast<std::size_t>(d)});
    for (int j = 0; j < d; ++j) x[j] = rng.normal();
    return x;
}

Tensor advance(const Tensor& x, const Tensor& eps, int t, int t_prev,
               const DiffusionSchedule& sched, const SamplerKind& sampler,
               SeededRng& rng) {
    if (sampler.tag == SamplerTag::Ddpm) {
        if (t_prev != t - 1)
            throw std::invalid_argument("ddpm sampling cannot skip steps");
        return ddpm_step(x, eps, t, sched, rng);
    }
    return ddim_step(x, eps, t, t_prev, sched);
}

}  // namespace

std::pair<Trajectory, CostLedger> run_speca(const TargetModel& model,
                                            const DiffusionSchedule& sched,
                                            const EngineConfig& cfg, SeededRng& rng,
                                            const SpecObserver& observer) {
    const int L = model.layers();
    cfg.verifier.validate(L);
    const int v = cfg.verifier.resolved_verify_layer(L);
    const int N = cfg.anchor_gap;
    const int K = cfg.verifier.max_draft_len;
    const int T = sched.T;
    if (N < 1) throw std::invalid_argument("engine: anchor_gap must be >= 1");
    if (K > 0 && T < cfg.warmup_anchors() * N)
        throw std::invalid_argument("engine: T too small for warm-up");

    Trajectory traj;
    CostLedger led;
    led.T = T;
    led.C = model.flops();

    Tensor x = draw_initial(model.dim(), rng);
    traj.states.reserve(T + 1);
    traj.states.emplace_back(T, x);
    traj.steps.reserve(T);

    FeatureCache cache(N, cfg.cache_order(), L);
    int consec = 0;
    bool force_full = false;

    for (int t = T; t >= 1; --t) {
        bool speculated = false;
        if (K > 0 && !force_full && cache.warm(cfg.draft)) {
            int k = cache.newest_t() - t;
            DraftPrediction pred = predict_all_layers(cache, cfg.draft, k, model);
            PartialVerifyResult pv =
                model.verify_block(pred.layer_features, v, x, t, sched);
            double e = relative_error(pred.layer_features[v], pv.actual_feature,
                                      cfg.verifier);
            double tau = threshold_at(cfg.verifier, t, T);
            led.C_pred = pred.flops;
            led.C_verify = pv.verify_flops;
            if (e <= tau) {
                if (observer) observer(t, pred.layer_features, x);
                Tensor eps = pred.eps_hat;
                if (cfg.verifier.substitute_recomputed && v == L - 1)
                    eps = model.head(pv.actual_feature);
                x = advance(x, eps, t, t - 1, sched, cfg.sampler, rng);
                traj.steps.push_back(
                    {t, StepKind::AcceptedSpec, e, tau, pred.flops + pv.verify_flops});
                led.T_spec += 1;
                led.total += pred.flops + pv.verify_flops;
                if (++consec >= K) force_full = true;
                speculated = true;
            } else {
                ModelOutput out = model.forward(x, t, sched);
                cache.push(t, out.layer_features, /*reset=*/true);
                x = advance(x, out.eps_hat, t, t - 1, sched, cfg.sampler, rng);
                double fl = led.C + pred.flops + pv.verify_flops;
                traj.steps.push_back({t, StepKind::RejectedFull, e, tau, fl});
                led.T_full += 1;
                led.n_rejected += 1;
                led.overhead += pred.flops + pv.verify_flops;
                led.total += fl;
                consec = 0;
                speculated = true;
            }
        }
        if (!speculated) {
            ModelOutput out = model.forward(x, t, sched);
            if (force_full) {
                cache.push(t, out.layer_features, /*reset=*/true);
                force_full = false;
            } else if (cache.history_len() == 0 || t == cache.newest_t() - N) {
                cache.push(t, out.layer_features);
            }
            x = advance(x, out.eps_hat, t, t - 1, sched, cfg.sampler, rng);
            traj.steps.push_back({t, StepKind::Full, 0.0, 0.0, out.flops});
            led.T_full += 1;
            led.total += out.flops;
            consec = 0;
        }
        traj.states.emplace_back(t - 1, x);
    }

    traj.terminal = x;
    led.steps_performed = static_cast<int>(traj.steps.size());
    led.reconcile(traj);
    return {std::move(traj), std::move(led)};
}

std::pair<Trajectory, CostLedger> run_baseline(const TargetModel& model,
                                               const DiffusionSchedule& sched,
                                               const BaselineConfig& cfg,
                                               SeededRng& rng) {
    const int T = sched.T;
    Trajectory traj;
    CostLedger led;
    led.T = T;
    led.C = model.flops();
    Tensor x = draw_initial(model.dim(), rng);
    traj.states.emplace_back(T, x);

    const double inf = std::numeric_limits<double>::infinity();

    switch (cfg.kind) {
        case BaselineKind::Full: {
            for (int t = T; t >= 1; --t) {
                ModelOutput out = model.forward(x, t, sched);
                x = advance(x, out.eps_hat, t, t - 1, sched, cfg.sampler, rng);
                traj.steps.push_back({t, StepKind::Full, 0.0, 0.0, out.flops});
                led.T_full += 1;
                led.total += out.flops;
                traj.states.emplace_back(t - 1, x);
            }
            break;
        }
        case BaselineKind::StepReduction: {
            if (!(cfg.fraction > 0.0 && cfg.fraction <= 1.0))
                throw std::invalid_argument("step_reduction: fraction in (0,1]");
            int n = std::max(1, static_cast<int>(std::lround(T * cfg.fraction)));
            std::vector<int> grid;  // descending, starts at T, ends implicit 0
            for (int i = 0; i < n; ++i) {
                int ti = static_cast<int>(std::lround(
                    static_cast<double>(T) * (n - i) / n));
                if (grid.empty() || ti < grid.back()) grid.push_back(ti);
            }
            if (grid.empty() || grid.front() != T) grid.insert(grid.begin(), T);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                int t = grid[i];
                int t_prev = i + 1 < grid.size() ? grid[i + 1] : 0;
                ModelOutput out = model.forward(x, t, sched);
                x = ddim_step(x, out.eps_hat, t, t_prev, sched);
                traj.steps.push_back({t, StepKind::Full, 0.0, 0.0, out.flops});
                led.T_full += 1;
                led.total += out.flops;
                traj.states.emplace_back(t_prev, x);
            }
            break;
        }
        case BaselineKind::Fora: {
            if (cfg.anchor_gap < 1) throw std::invalid_argument("fora: N >= 1");
            Tensor eps;
            for (int t = T; t >= 1; --t) {
                if ((T - t) % cfg.anchor_gap == 0) {
                    ModelOutput out = model.forward(x, t, sched);
                    eps = out.eps_hat;
                    traj.steps.push_back({t, StepKind::Full, 0.0, 0.0, out.flops});
                    led.T_full += 1;
                    led.total += out.flops;
                } else {
                    traj.steps.push_back({t, StepKind::AcceptedSpec, 0.0, inf, 0.0});
                    led.T_spec += 1;
                }
                x = advance(x, eps, t, t - 1, sched, cfg.sampler, rng);
                traj.states.emplace_back(t - 1, x);
            }
            break;
        }
        case BaselineKind::ForecastOnly: {
            const int N = cfg.anchor_gap;
            if (N < 1) throw std::invalid_argument("forecast_only: N >= 1");
            FeatureCache cache(N, cfg.order, model.layers());
            for (int t = T; t >= 1; --t) {
                bool aligned = cache.history_len() == 0 || t == cache.newest_t() - N;
                bool warm = cache.warm(DraftKind::Taylor);
                if (aligned || !warm) {
                    ModelOutput out = model.forward(x, t, sched);
                    if (aligned) cache.push(t, out.layer_features);
                    x = advance(x, out.eps_hat, t, t - 1, sched, cfg.sampler, rng);
                    traj.steps.push_back({t, StepKind::Full, 0.0, 0.0, out.flops});
                    led.T_full += 1;
                    led.total += out.flops;
                } else {
                    int k = cache.newest_t() - t;
                    DraftPrediction pred =
                        predict_all_layers(cache, DraftKind::Taylor, k, model);
                    led.C_pred = pred.flops;
                    x = advance(x, pred.eps_hat, t, t - 1, sched, cfg.sampler, rng);
                    traj.steps.push_back({t, StepKind::AcceptedSpec, 0.0, inf, pred.flops});
                    led.T_spec += 1;
                    led.total += pred.flops;
                }
                traj.states.emplace_back(t - 1, x);
            }
            break;
        }
    }

    traj.terminal = x;
    led.steps_performed = static_cast<int>(traj.steps.size());
    led.reconcile(traj);
    return {std::move(traj), std::move(led)};
}

BatchResult run_batch(const TargetModel& model, const DiffusionSchedule& sched,
                      const EngineConfig& cfg, std::size_t n_samples,
                      std::uint64_t base_seed) {
    if (n_samples < 1) throw std::invalid_argument("run_batch: n_samples >= 1");
    BatchResult out;
    SeededRng root(base_seed);
    for (std::size_t i = 0; i < n_samples; ++i) {
        SeededRng rng = root.spawn(i);
        auto [traj, led] = run_speca(model, sched, cfg, rng);
        out.trajectories.push_back(std::move(traj));
        out.ledgers.push_back(std::move(led));
    }
    return out;
}

BatchResult run_batch_baseline(const TargetModel& model, const DiffusionSchedule& sched,
                               const BaselineConfig& cfg, std::size_t n_samples,
                               std::uint64_t base_seed) {
    if (n_samples < 1) throw std::invalid_argument("run_batch: n_samples >= 1");
    BatchResult out;
    SeededRng root(base_seed);
    for (std::size_t i = 0; i < n_samples; ++i) {
        SeededRng rng = root.spawn(i);
        auto [traj, led] = run_baseline(model, sched, cfg, rng);
        out.trajectories.push_back(std::move(traj));
        out.ledgers.push_back(std::move(led));
    }
    return out;
}

}  // namespace speca
