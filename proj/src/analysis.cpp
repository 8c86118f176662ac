#include "speca/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace speca {

namespace {

double l2(const Tensor& a, const Tensor& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double r = a[i] - b[i];
        s += r * r;
    }
    return std::sqrt(s);
}

}  // namespace

double energy_distance(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("energy_distance: empty sample set");
    const std::size_t d = a[0].size();
    for (const auto& x : a)
        if (x.size() != d) throw std::invalid_argument("energy_distance: dimension mismatch");
    for (const auto& x : b)
        if (x.size() != d) throw std::invalid_argument("energy_distance: dimension mismatch");

    // canonicalize the argument order so d(a,b) == d(b,a) bit-for-bit despite
    // the order-dependent floating-point accumulation
    auto less = [](const std::vector<Tensor>& u, const std::vector<Tensor>& v) {
        if (u.size() != v.size()) return u.size() < v.size();
        for (std::size_t i = 0; i < u.size(); ++i)
            for (std::size_t j = 0; j < u[i].size(); ++j)
                if (u[i][j] != v[i][j]) return u[i][j] < v[i][j];
        return false;
    };
    const std::vector<Tensor>& p = less(b, a) ? b : a;
    const std::vector<Tensor>& q = less(b, a) ? a : b;

    double pq = 0, pp = 0, qq = 0;
    for (const auto& x : p)
        for (const auto& y : q) pq += l2(x, y);
    pq /= static_cast<double>(p.size() * q.size());
    for (const auto& x : p)
        for (const auto& y : p) pp += l2(x, y);
    pp /= static_cast<double>(p.size() * p.size());
    for (const auto& x : q)
        for (const auto& y : q) qq += l2(x, y);
    qq /= static_cast<double>(q.size() * q.size());
    return 2.0 * pq - pp - qq;
}

std::vector<double> trajectory_deviation(const Trajectory& a, const Trajectory& b) {
    if (a.states.size() != b.states.size())
        throw std::invalid_argument("trajectory_deviation: grid mismatch");
    std::vector<double> out;
    out.reserve(a.states.size());
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        if (a.states[i].first != b.states[i].first)
            throw std::invalid_argument("trajectory_deviation: grid mismatch");
        out.push_back(l2(a.states[i].second, b.states[i].second));
    }
    return out;
}

CorrelationTable layer_error_correlation(const TargetModel& model,
                                         const DiffusionSchedule& sched,
                                         const EngineConfig& cfg, int n_samples,
                                         std::uint64_t base_seed) {
    if (n_samples < 30) throw std::invalid_argument("insufficient samples");
    const int L = model.layers();
    VerifierConfig vc;  // l2 relative error for the probes, spec default
    std::vector<std::vector<double>> layer_err(L);  // per layer, per sample mean
    std::vector<double> terminal_err;

    SeededRng root(base_seed);
    for (int s = 0; s < n_samples; ++s) {
        SeededRng rng_full = root.spawn(static_cast<std::uint64_t>(s));
        SeededRng rng_spec = root.spawn(static_cast<std::uint64_t>(s));

        BaselineConfig full;
        full.kind = BaselineKind::Full;
        full.sampler = cfg.sampler;
        auto [traj_full, led_full] = run_baseline(model, sched, full, rng_full);

        std::vector<double> sums(L, 0.0);
        int probes = 0;
        auto observer = [&](int t, const std::vector<Tensor>& predicted,
                            const Tensor& x_before) {
            if (probes >= 16) return;
            ModelOutput actual = model.forward(x_before, t, sched);
            for (int l = 0; l < L; ++l)
                sums[l] += relative_error(predicted[l], actual.layer_features[l], vc);
            ++probes;
        };
        auto [traj_spec, led_spec] = run_speca(model, sched, cfg, rng_spec, observer);

        if (probes == 0) continue;  // sample contributed no accepted steps
        for (int l = 0; l < L; ++l) layer_err[l].push_back(sums[l] / probes);
        terminal_err.push_back(l2(traj_spec.terminal, traj_full.terminal));
    }

    CorrelationTable table;
    table.sample_count = static_cast<int>(terminal_err.size());
    table.layer_r.resize(L);
    for (int l = 0; l < L; ++l) {
        try {
            table.layer_r[l] = pearson_r(layer_err[l], terminal_err);
        } catch (const std::invalid_argument&) {
            table.layer_r[l] = std::nullopt;  // degenerate variance or too few
        }
    }
    return table;
}

Theorem1Result theorem1_growth_check(Theorem1Trajectory kind, int degree, int m,
                                     int N, int k_max) {
    if (k_max < 4) throw std::invalid_argument("theorem1: k_max >= 4");
    const double T_syn = 256.0;
    const int t0 = 8 * N + k_max;  // keep predicted timesteps positive

    auto f = [&](double tau) {
        if (kind == Theorem1Trajectory::Exponential) return std::exp(tau / T_syn);
        double v = 0, p = 1;
        for (int i = 0; i <= degree; ++i) {  // sum_{i<=deg} tau^i / i!
            v += p;
            p *= tau / (i + 1);
        }
        return v;
    };

    FeatureCache cache(N, m, 1);
    for (int j = m; j >= 0; --j) {
        int t = t0 + j * N;
        cache.push(t, {Tensor::vec({f(static_cast<double>(t))})});
    }

    Theorem1Result res;
    for (int k = 1; k <= k_max; ++k) {
        Tensor pred = cache.taylor_predict(0, k);
        double truth = f(static_cast<double>(t0 - k));
        double rel = std::fabs(pred[0] - truth) / std::max(std::fabs(truth), 1e-300);
        res.ks.push_back(k);
        res.errors.push_back(rel);
        res.max_rel_error = std::max(res.max_rel_error, rel);
    }

    if (kind == Theorem1Trajectory::Polynomial && degree <= m) {
        res.exact = true;
        res.pass = res.max_rel_error < 1e-9;
        return res;
    }

    // log-log least squares, skipping exactly-zero errors
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < res.errors.size(); ++i) {
        if (res.errors[i] <= 0) continue;
        lx.push_back(std::log(static_cast<double>(res.ks[i])));
        ly.push_back(std::log(res.errors[i]));
    }
    if (lx.size() < 2) throw std::runtime_error("theorem1: not enough nonzero errors");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    res.slope = num / den;
    res.pass = res.slope >= m + 0.5 && res.slope <= m + 1.5;
    return res;
}

Theorem2Margin theorem2_margin(const DiffusionSchedule& sched, const VerifierConfig& cfg,
                               const std::vector<double>& feature_norms) {
    if (feature_norms.size() != static_cast<std::size_t>(sched.T))
        throw std::invalid_argument("theorem2_margin: need one norm per step");
    Theorem2Margin out;
    out.margins.reserve(sched.T);
    for (int t = sched.T; t >= 1; --t) {
        double fn = feature_norms[sched.T - t];
        double bound = std::sqrt(sched.beta(t) * (1.0 - sched.alpha_bar(t)) /
                                 (1.0 + fn * fn));
        out.margins.push_back(bound - threshold_at(cfg, t, sched.T));
    }
    std::vector<double> sorted = out.margins;
    std::sort(sorted.begin(), sorted.end());
    out.min_margin = sorted.front();
    out.median_margin = sorted[sorted.size() / 2];
    return out;
}

std::string to_string(AblationAxis a) {
    switch (a) {
        case AblationAxis::Tau0: return "tau0";
        case AblationAxis::Decay: return "decay";
        case AblationAxis::VerifyLayer: return "verify_layer";
        case AblationAxis::Norm: return "norm";
        case AblationAxis::Draft: return "draft";
    }
    throw std::logic_error("unreachable");
}

AblationAxis ablation_axis_from_string(const std::string& s) {
    if (s == "tau0") return AblationAxis::Tau0;
    if (s == "decay") return AblationAxis::Decay;
    if (s == "verify_layer") return AblationAxis::VerifyLayer;
    if (s == "norm") return AblationAxis::Norm;
    if (s == "draft") return AblationAxis::Draft;
    throw std::invalid_argument(
        "unknown axis '" + s + "'; valid: tau0, decay, verify_layer, norm, draft");
}

AxisValues default_axis_values(AblationAxis axis, int layers) {
    AxisValues v;
    switch (axis) {
        case AblationAxis::Tau0:
            v.numeric = {0.1, 0.3, 0.5, 0.8, 1.0, 1.2};
            break;
        case AblationAxis::Decay:
            // both parameterizations reported in the source tables
            v.numeric = {0.01, 0.03, 0.05, 0.08, 0.12, 0.5};
            break;
        case AblationAxis::VerifyLayer:
            v.layer_indices = {0, layers / 2, layers - 1};
            break;
        case AblationAxis::Norm:
            v.norms = {ErrorNorm::L1, ErrorNorm::L2, ErrorNorm::Linf, ErrorNorm::Cosine};
            break;
        case AblationAxis::Draft:
            v.drafts = {DraftKind::Reuse, DraftKind::AdamsBashforth, DraftKind::Taylor};
            break;
    }
    return v;
}

AblationGrid ablation_sweep(AblationAxis axis, const AxisValues& values,
                            const TargetModel& model, const GmmSpec& reference,
                            const DiffusionSchedule& sched, const EngineConfig& base,
                            int n_samples, const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw std::invalid_argument("ablation_sweep: need seeds");
    AblationGrid grid;
    grid.axis = axis;

    struct Cell {
        std::string label;
        EngineConfig cfg;
    };
    std::vector<Cell> cells;
    switch (axis) {
        case AblationAxis::Tau0:
            for (double v : values.numeric) {
                EngineConfig c = base;
                c.verifier.tau0 = v;
                cells.push_back({std::to_string(v), c});
            }
            break;
        case AblationAxis::Decay:
            for (double v : values.numeric) {
                EngineConfig c = base;
                c.verifier.decay = v;
                cells.push_back({std::to_string(v), c});
            }
            break;
        case AblationAxis::VerifyLayer:
            for (int l : values.layer_indices) {
                EngineConfig c = base;
                c.verifier.verify_layer = l;
                cells.push_back({std::to_string(l), c});
            }
            break;
        case AblationAxis::Norm:
            for (ErrorNorm n : values.norms) {
                EngineConfig c = base;
                c.verifier.norm_kind = n;
                cells.push_back({to_string(n), c});
            }
            break;
        case AblationAxis::Draft:
            for (DraftKind k : values.drafts) {
                EngineConfig c = base;
                c.draft = k;
                cells.push_back({to_string(k), c});
            }
            break;
    }
    if (cells.empty()) throw std::invalid_argument("ablation_sweep: empty axis");

    // shared reference draws for the quality metric
    SeededRng ref_rng(0x5eedu);
    std::vector<Tensor> ref =
        gmm_sample(reference, static_cast<std::size_t>(n_samples), ref_rng);

    for (const auto& cell : cells) {
        AblationCell out;
        out.value = cell.label;
        out.seeds = seeds;
        std::vector<Tensor> pooled;
        for (std::uint64_t seed : seeds) {
            BatchResult batch = run_batch(model, sched, cell.cfg,
                                          static_cast<std::size_t>(n_samples), seed);
            double fl = 0, sp = 0, ar = 0;
            for (const auto& led : batch.ledgers) {
                fl += led.total;
                sp += speedup(led).measured;
                ar += led.accept_rate();
            }
            out.avg_total_flops += fl / batch.ledgers.size();
            out.avg_speedup += sp / batch.ledgers.size();
            out.avg_accept_rate += ar / batch.ledgers.size();
            for (const auto& traj : batch.trajectories) pooled.push_back(traj.terminal);
        }
        out.avg_total_flops /= seeds.size();
        out.avg_speedup /= seeds.size();
        out.avg_accept_rate /= seeds.size();
        out.energy = energy_distance(pooled, ref);
        grid.cells.push_back(std::move(out));
    }
    return grid;
}

}  // namespace speca
