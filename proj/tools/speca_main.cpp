#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "speca/analysis.hpp"
#include "speca/config.hpp"
#include "speca/report.hpp"
#include "speca/trainer.hpp"

namespace fs = std::filesystem;
using namespace speca;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitRuntime = 3;

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::string out_dir = "out";
    bool no_plots = false;
};

RunConfig load_config(const CommonOpts& opts) {
    RunConfig cfg = parse_config_file(opts.config_path);
    if (opts.seed_override) cfg.seed = *opts.seed_override;
    return cfg;
}

std::unique_ptr<TargetModel> build_target(const RunConfig& cfg) {
    if (cfg.model.analytic) return std::make_unique<GmmTarget>(cfg.make_gmm());
    if (cfg.model.weights_path.empty())
        throw std::invalid_argument(
            "config: model.weights_path required unless model.analytic is true");
    if (!fs::exists(cfg.model.weights_path))
        throw std::invalid_argument("weights file not found: " + cfg.model.weights_path);
    return std::make_unique<DenoiserTarget>(LayeredDenoiser::load(cfg.model.weights_path));
}

int cmd_train(const CommonOpts& opts) {
    RunConfig cfg = load_config(opts);
    fs::create_directories(opts.out_dir);
    GmmSpec gmm = cfg.make_gmm();
    DiffusionSchedule sched = cfg.make_schedule();
    LayeredDenoiser model = LayeredDenoiser::random_init(
        cfg.model.layers, cfg.model.hidden, cfg.model.dim, cfg.model.time_embed_dim,
        cfg.seed);
    TrainConfig tc = cfg.trainer;
    tc.seed = cfg.seed;
    LossCurve curve = train(model, gmm, sched, tc);
    std::string weights = cfg.model.weights_path.empty()
                              ? (fs::path(opts.out_dir) / "model.bin").string()
                              : cfg.model.weights_path;
    model.save(weights);
    write_text_file((fs::path(opts.out_dir) / "loss.csv").string(), loss_csv(curve));
    std::cout << "trained " << cfg.trainer.steps << " iterations; weights -> " << weights
              << "\n";
    if (!curve.losses.empty())
        std::cout << "final loss " << curve.losses.back() << "\n";
    return kExitOk;
}

int cmd_run(const CommonOpts& opts, const std::string& baseline_tag) {
    RunConfig cfg = load_config(opts);
    fs::create_directories(opts.out_dir);
    auto model = build_target(cfg);
    DiffusionSchedule sched = cfg.make_schedule();
    GmmSpec gmm = cfg.make_gmm();

    std::string tag = baseline_tag.empty() ? "speca" : baseline_tag;
    BatchResult batch;
    if (baseline_tag.empty()) {
        batch = run_batch(*model, sched, cfg.make_engine_config(),
                          static_cast<std::size_t>(cfg.engine.n_samples), cfg.seed);
    } else {
        batch = run_batch_baseline(*model, sched, cfg.make_baseline_config(baseline_tag),
                                   static_cast<std::size_t>(cfg.engine.n_samples),
                                   cfg.seed);
    }

    // quality: terminal samples vs reference mixture draws
    SeededRng ref_rng(cfg.seed ^ 0x5eedULL);
    std::vector<Tensor> ref = gmm_sample(
        gmm, static_cast<std::size_t>(cfg.analysis.reference_samples), ref_rng);
    std::vector<Tensor> terminals;
    for (const auto& t : batch.trajectories) terminals.push_back(t.terminal);
    double ed = energy_distance(terminals, ref);

    write_text_file((fs::path(opts.out_dir) / "run.json").string(),
                    run_report_json(cfg, tag, batch.ledgers, ed));
    std::string steps;
    for (std::size_t i = 0; i < batch.trajectories.size(); ++i)
        steps += steps_jsonl(batch.trajectories[i], static_cast<int>(i));
    write_text_file((fs::path(opts.out_dir) / "steps.jsonl").string(), steps);

    double alpha = 0, gamma = 0, st = 0, sm = 0, total = 0;
    for (const auto& led : batch.ledgers) {
        Speedup sp = speedup(led);
        alpha += led.accept_rate();
        gamma += led.verify_ratio();
        st += sp.theoretical;
        sm += sp.measured;
        total += led.total;
    }
    double n = static_cast<double>(batch.ledgers.size());
    SummaryRow row{tag, alpha / n, gamma / n, st / n, sm / n, total, ed};
    write_text_file((fs::path(opts.out_dir) / "summary.csv").string(), summary_csv({row}));
    write_text_file((fs::path(opts.out_dir) / "allocation.csv").string(),
                    allocation_csv(allocation_histogram(batch.ledgers)));

    if (!opts.no_plots) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& t : terminals)
            if (t.size() >= 2) pts.push_back({t[0], t[1]});
        if (!pts.empty())
            write_text_file((fs::path(opts.out_dir) / "samples.svg").string(),
                            svg_scatter(pts, tag + " terminal samples"));
    }

    std::cout << "tag=" << row.tag << " alpha=" << row.alpha << " gamma=" << row.gamma
              << " S_measured=" << row.s_measured << " energy_distance=" << ed << "\n";
    return kExitOk;
}

int cmd_sweep(const CommonOpts& opts, const std::string& axis_name) {
    RunConfig cfg = load_config(opts);
    fs::create_directories(opts.out_dir);
    AblationAxis axis = ablation_axis_from_string(axis_name);
    auto model = build_target(cfg);
    DiffusionSchedule sched = cfg.make_schedule();
    GmmSpec gmm = cfg.make_gmm();

    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < cfg.analysis.sweep_seeds; ++i)
        seeds.push_back(cfg.seed + static_cast<std::uint64_t>(i));

    AxisValues values = default_axis_values(axis, model->layers());
    AblationGrid grid = ablation_sweep(axis, values, *model, gmm, sched,
                                       cfg.make_engine_config(),
                                       cfg.analysis.sweep_samples, seeds);
    std::string csv_path =
        (fs::path(opts.out_dir) / (to_string(axis) + ".csv")).string();
    write_text_file(csv_path, ablation_csv(grid));

    if (!opts.no_plots) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < grid.cells.size(); ++i)
            pts.push_back({static_cast<double>(i), grid.cells[i].avg_total_flops});
        write_text_file((fs::path(opts.out_dir) / (to_string(axis) + ".svg")).string(),
                        svg_scatter(pts, to_string(axis) + " vs total flops", true));
    }
    std::cout << "sweep " << to_string(axis) << ": " << grid.cells.size()
              << " cells x " << seeds.size() << " seeds -> " << csv_path << "\n";
    return kExitOk;
}

int cmd_analyze(const std::string& dir, const CommonOpts& opts) {
    fs::path in(dir);
    fs::path run_json = in / "run.json";
    if (!fs::exists(run_json))
        throw std::invalid_argument("missing artifacts: " + run_json.string());
    std::ifstream f(run_json);
    nlohmann::ordered_json doc = nlohmann::ordered_json::parse(f);
    RunConfig cfg = parse_config_text(doc.at("config").dump());

    fs::path out_dir = opts.out_dir.empty() || opts.out_dir == "out"
                           ? in
                           : fs::path(opts.out_dir);
    fs::create_directories(out_dir);

    auto model = build_target(cfg);
    DiffusionSchedule sched = cfg.make_schedule();
    EngineConfig ecfg = cfg.make_engine_config();

    // per-layer error vs terminal deviation correlation (paired runs)
    if (!cfg.model.analytic) {
        CorrelationTable table = layer_error_correlation(
            *model, sched, ecfg, cfg.analysis.correlation_samples, cfg.seed);
        write_text_file((out_dir / "correlation.csv").string(), correlation_csv(table));
    }

    // PCA projection of one sampling trajectory
    {
        SeededRng rng(cfg.seed);
        auto [traj, led] = run_speca(*model, sched, ecfg, rng);
        std::vector<Tensor> states;
        std::vector<int> ts;
        for (const auto& [t, x] : traj.states) {
            states.push_back(x);
            ts.push_back(t);
        }
        auto proj = pca_2d(states);
        write_text_file((out_dir / "pca_trajectory.csv").string(), pca_csv(proj, ts));
        if (!opts.no_plots)
            write_text_file((out_dir / "pca_trajectory.svg").string(),
                            svg_scatter(proj, "sampling trajectory (pc1, pc2)", true));
    }

    // theorem diagnostics
    {
        nlohmann::ordered_json tj;
        for (int m : {1, 2}) {
            Theorem1Result r = theorem1_growth_check(Theorem1Trajectory::Exponential, 0,
                                                     m, 1, 32);
            tj["error_growth"]["m" + std::to_string(m)] = {
                {"slope", r.slope}, {"pass", r.pass}};
            Theorem1Result p = theorem1_growth_check(Theorem1Trajectory::Polynomial, m,
                                                     m, 4, 12);
            tj["polynomial_exact"]["m" + std::to_string(m)] = {
                {"max_rel_error", p.max_rel_error}, {"pass", p.pass}};
        }
        // threshold-compatibility margins from a full run's feature norms
        SeededRng rng(cfg.seed + 1);
        std::vector<double> norms;
        Tensor x = Tensor::zeros({static_cast<std::size_t>(model->dim())});
        for (int j = 0; j < model->dim(); ++j) x[j] = rng.normal();
        for (int t = sched.T; t >= 1; --t) {
            ModelOutput out = model->forward(x, t, sched);
            norms.push_back(norm(out.layer_features.back(), NormKind::L2));
            x = ddim_step(x, out.eps_hat, t, t - 1, sched);
        }
        VerifierConfig vc = ecfg.verifier;
        Theorem2Margin margin = theorem2_margin(sched, vc, norms);
        tj["threshold_margin"] = {{"min", margin.min_margin},
                                  {"median", margin.median_margin}};
        write_text_file((out_dir / "theorems.json").string(), tj.dump(2) + "\n");
    }

    std::cout << "analysis artifacts written to " << out_dir.string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"speculative feature-caching diffusion sampler testbed"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string baseline_tag;
    std::string axis_name;
    std::string analyze_dir;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", opts.config_path, "config file (JSON)");
        if (needs_config) c->required();
        sub->add_option("--seed", opts.seed_override, "override config seed");
        sub->add_option("--out", opts.out_dir, "output directory");
        sub->add_flag("--no-plots", opts.no_plots, "skip SVG emission");
    };

    CLI::App* train = app.add_subcommand("train", "train the layered denoiser");
    add_common(train, true);

    CLI::App* run = app.add_subcommand("run", "run the sampler and emit reports");
    add_common(run, true);
    run->add_option("--baseline", baseline_tag,
                    "baseline tag: full, step_reduction[:frac], fora[:N], "
                    "forecast_only[:m[:N]]");

    CLI::App* sweep = app.add_subcommand("sweep", "ablation sweep over one axis");
    add_common(sweep, true);
    sweep->add_option("--axis", axis_name, "tau0|decay|verify_layer|norm|draft")
        ->required();

    CLI::App* analyze = app.add_subcommand("analyze", "diagnostics over run artifacts");
    analyze->add_option("dir", analyze_dir, "run artifacts directory")->required();
    analyze->add_option("--out", opts.out_dir, "output directory (default: dir)");
    analyze->add_flag("--no-plots", opts.no_plots, "skip SVG emission");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (train->parsed()) return cmd_train(opts);
        if (run->parsed()) return cmd_run(opts, baseline_tag);
        if (sweep->parsed()) return cmd_sweep(opts, axis_name);
        if (analyze->parsed()) return cmd_analyze(analyze_dir, opts);
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
