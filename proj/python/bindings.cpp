// pybind11 surface for the core sampler: schedules, the mixture testbed,
// the layered denoiser and its trainer, the speculate-verify engine with
// its baselines, and the analysis utilities. Vectors cross the boundary as
// plain python lists of floats.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "speca/analysis.hpp"
#include "speca/config.hpp"
#include "speca/engine.hpp"
#include "speca/trainer.hpp"

namespace py = pybind11;
using namespace speca;

namespace {

Tensor to_tensor(const std::vector<double>& v) { return Tensor::vec(v); }

std::vector<double> from_tensor(const Tensor& t) { return t.data; }

std::vector<std::vector<double>> from_tensors(const std::vector<Tensor>& ts) {
    std::vector<std::vector<double>> out;
    out.reserve(ts.size());
    for (const Tensor& t : ts) out.push_back(t.data);
    return out;
}

std::vector<Tensor> to_tensors(const std::vector<std::vector<double>>& vs) {
    std::vector<Tensor> out;
    out.reserve(vs.size());
    for (const auto& v : vs) out.push_back(to_tensor(v));
    return out;
}

py::dict ledger_dict(const CostLedger& led) {
    py::dict d;
    d["T"] = led.T;
    d["steps_performed"] = led.steps_performed;
    d["T_full"] = led.T_full;
    d["T_spec"] = led.T_spec;
    d["n_rejected"] = led.n_rejected;
    d["C"] = led.C;
    d["C_pred"] = led.C_pred;
    d["C_verify"] = led.C_verify;
    d["overhead"] = led.overhead;
    d["total"] = led.total;
    d["accept_rate"] = led.accept_rate();
    d["verify_ratio"] = led.verify_ratio();
    Speedup s = speedup(led);
    d["speedup_theoretical"] = s.theoretical;
    d["speedup_measured"] = s.measured;
    d["speedup_lower_bound"] = s.lower_bound;
    return d;
}

}  // namespace

PYBIND11_MODULE(_speca, m) {
    m.doc() = "speculative feature-caching diffusion sampler core";

    py::class_<DiffusionSchedule>(m, "DiffusionSchedule")
        .def_readonly("T", &DiffusionSchedule::T)
        .def("beta", &DiffusionSchedule::beta)
        .def("alpha", &DiffusionSchedule::alpha)
        .def("alpha_bar", &DiffusionSchedule::alpha_bar)
        .def("sigma", &DiffusionSchedule::sigma);

    m.def(
        "build_schedule",
        [](const std::string& kind, int T, double beta_start, double beta_end) {
            return build_schedule(schedule_kind_from_string(kind), T, beta_start,
                                  beta_end);
        },
        py::arg("kind") = "linear", py::arg("T") = 50, py::arg("beta_start") = 1e-4,
        py::arg("beta_end") = 2e-2);

    py::class_<GmmSpec>(m, "GmmSpec")
        .def_static("ring", &GmmSpec::ring, py::arg("k"), py::arg("radius"),
                    py::arg("sigma"))
        .def_property_readonly("dim", &GmmSpec::dim)
        .def_property_readonly("components", &GmmSpec::components);

    m.def(
        "gmm_sample",
        [](const GmmSpec& spec, std::size_t n, std::uint64_t seed) {
            SeededRng rng(seed);
            return from_tensors(gmm_sample(spec, n, rng));
        },
        py::arg("spec"), py::arg("n"), py::arg("seed"));
    m.def(
        "gmm_eps",
        [](const GmmSpec& spec, const std::vector<double>& x, int t,
           const DiffusionSchedule& sched) {
            return from_tensor(gmm_eps(spec, to_tensor(x), t, sched));
        },
        py::arg("spec"), py::arg("x"), py::arg("t"), py::arg("sched"));
    m.def(
        "gmm_log_pt",
        [](const GmmSpec& spec, const std::vector<double>& x, int t,
           const DiffusionSchedule& sched) {
            return gmm_log_pt(spec, to_tensor(x), t, sched);
        },
        py::arg("spec"), py::arg("x"), py::arg("t"), py::arg("sched"));

    py::class_<LayeredDenoiser>(m, "LayeredDenoiser")
        .def_static("random_init", &LayeredDenoiser::random_init, py::arg("L"),
                    py::arg("H"), py::arg("d"), py::arg("time_embed_dim"),
                    py::arg("seed"))
        .def_static("load", &LayeredDenoiser::load, py::arg("path"))
        .def("save", &LayeredDenoiser::save, py::arg("path"))
        .def_property_readonly("layers", &LayeredDenoiser::layers)
        .def_property_readonly("dim", &LayeredDenoiser::dim)
        .def_property_readonly("param_count", &LayeredDenoiser::param_count)
        .def("flops", &LayeredDenoiser::flops)
        .def(
            "forward",
            [](const LayeredDenoiser& model, const std::vector<double>& x, int t,
               const DiffusionSchedule& sched) {
                ModelOutput out = model.forward(to_tensor(x), t, sched);
                return py::make_tuple(from_tensor(out.eps_hat),
                                      from_tensors(out.layer_features), out.flops);
            },
            py::arg("x"), py::arg("t"), py::arg("sched"));

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("steps", &TrainConfig::steps)
        .def_readwrite("batch", &TrainConfig::batch)
        .def_readwrite("lr", &TrainConfig::lr)
        .def_readwrite("beta1", &TrainConfig::beta1)
        .def_readwrite("beta2", &TrainConfig::beta2)
        .def_readwrite("adam_eps", &TrainConfig::adam_eps)
        .def_readwrite("seed", &TrainConfig::seed);

    m.def(
        "train",
        [](LayeredDenoiser& model, const GmmSpec& gmm, const DiffusionSchedule& sched,
           const TrainConfig& cfg) { return train(model, gmm, sched, cfg).losses; },
        py::arg("model"), py::arg("gmm"), py::arg("sched"), py::arg("cfg"));
    m.def(
        "grad_check",
        [](const LayeredDenoiser& model, const std::vector<double>& x, int t,
           const DiffusionSchedule& sched, std::uint64_t seed) {
            return grad_check(model, to_tensor(x), t, sched, seed);
        },
        py::arg("model"), py::arg("x"), py::arg("t"), py::arg("sched"),
        py::arg("seed") = 1234);

    py::class_<TargetModel>(m, "TargetModel")
        .def_property_readonly("layers", &TargetModel::layers)
        .def_property_readonly("dim", &TargetModel::dim)
        .def("flops", &TargetModel::flops);
    py::class_<DenoiserTarget, TargetModel>(m, "DenoiserTarget")
        .def(py::init<LayeredDenoiser>(), py::arg("model"));
    py::class_<GmmTarget, TargetModel>(m, "GmmTarget")
        .def(py::init<GmmSpec>(), py::arg("spec"));

    py::class_<VerifierConfig>(m, "VerifierConfig")
        .def(py::init<>())
        .def_readwrite("tau0", &VerifierConfig::tau0)
        .def_readwrite("decay", &VerifierConfig::decay)
        .def_readwrite("epsilon", &VerifierConfig::epsilon)
        .def_readwrite("verify_layer", &VerifierConfig::verify_layer)
        .def_readwrite("max_draft_len", &VerifierConfig::max_draft_len)
        .def_readwrite("substitute_recomputed", &VerifierConfig::substitute_recomputed)
        .def_property(
            "norm",
            [](const VerifierConfig& c) { return to_string(c.norm_kind); },
            [](VerifierConfig& c, const std::string& s) {
                c.norm_kind = error_norm_from_string(s);
            });

    m.def("threshold_at", &threshold_at, py::arg("cfg"), py::arg("t"), py::arg("T"));
    m.def(
        "relative_error",
        [](const std::vector<double>& pred, const std::vector<double>& actual,
           const VerifierConfig& cfg) {
            return relative_error(to_tensor(pred), to_tensor(actual), cfg);
        },
        py::arg("pred"), py::arg("actual"), py::arg("cfg") = VerifierConfig{});

    py::class_<EngineConfig>(m, "EngineConfig")
        .def(py::init<>())
        .def_readwrite("order", &EngineConfig::order)
        .def_readwrite("anchor_gap", &EngineConfig::anchor_gap)
        .def_readwrite("verifier", &EngineConfig::verifier)
        .def_property(
            "draft", [](const EngineConfig& c) { return to_string(c.draft); },
            [](EngineConfig& c, const std::string& s) {
                c.draft = draft_kind_from_string(s);
            });

    py::class_<BaselineConfig>(m, "BaselineConfig")
        .def(py::init<>())
        .def_readwrite("fraction", &BaselineConfig::fraction)
        .def_readwrite("anchor_gap", &BaselineConfig::anchor_gap)
        .def_readwrite("order", &BaselineConfig::order)
        .def_property(
            "kind", [](const BaselineConfig& c) { return to_string(c.kind); },
            [](BaselineConfig& c, const std::string& s) {
                c.kind = baseline_kind_from_string(s);
            });

    m.def(
        "run_speca",
        [](const TargetModel& model, const DiffusionSchedule& sched,
           const EngineConfig& cfg, std::uint64_t seed) {
            SeededRng rng(seed);
            auto [traj, led] = run_speca(model, sched, cfg, rng);
            return py::make_tuple(from_tensor(traj.terminal), ledger_dict(led));
        },
        py::arg("model"), py::arg("sched"), py::arg("cfg"), py::arg("seed"));
    m.def(
        "run_baseline",
        [](const TargetModel& model, const DiffusionSchedule& sched,
           const BaselineConfig& cfg, std::uint64_t seed) {
            SeededRng rng(seed);
            auto [traj, led] = run_baseline(model, sched, cfg, rng);
            return py::make_tuple(from_tensor(traj.terminal), ledger_dict(led));
        },
        py::arg("model"), py::arg("sched"), py::arg("cfg"), py::arg("seed"));
    m.def(
        "run_batch",
        [](const TargetModel& model, const DiffusionSchedule& sched,
           const EngineConfig& cfg, std::size_t n, std::uint64_t seed) {
            BatchResult b = run_batch(model, sched, cfg, n, seed);
            std::vector<std::vector<double>> terminals;
            py::list ledgers;
            for (const Trajectory& t : b.trajectories)
                terminals.push_back(t.terminal.data);
            for (const CostLedger& l : b.ledgers) ledgers.append(ledger_dict(l));
            return py::make_tuple(terminals, ledgers);
        },
        py::arg("model"), py::arg("sched"), py::arg("cfg"), py::arg("n"),
        py::arg("seed"));
    m.def(
        "run_batch_baseline",
        [](const TargetModel& model, const DiffusionSchedule& sched,
           const BaselineConfig& cfg, std::size_t n, std::uint64_t seed) {
            BatchResult b = run_batch_baseline(model, sched, cfg, n, seed);
            std::vector<std::vector<double>> terminals;
            py::list ledgers;
            for (const Trajectory& t : b.trajectories)
                terminals.push_back(t.terminal.data);
            for (const CostLedger& l : b.ledgers) ledgers.append(ledger_dict(l));
            return py::make_tuple(terminals, ledgers);
        },
        py::arg("model"), py::arg("sched"), py::arg("cfg"), py::arg("n"),
        py::arg("seed"));

    py::class_<FeatureCache>(m, "FeatureCache")
        .def(py::init<int, int, int>(), py::arg("anchor_gap"), py::arg("order"),
             py::arg("layers"))
        .def(
            "push",
            [](FeatureCache& c, int t, const std::vector<std::vector<double>>& feats,
               bool reset) { c.push(t, to_tensors(feats), reset); },
            py::arg("t"), py::arg("features"), py::arg("reset") = false)
        .def("history_len", &FeatureCache::history_len)
        .def("newest_t", &FeatureCache::newest_t)
        .def(
            "taylor_predict",
            [](const FeatureCache& c, int layer, int k) {
                return from_tensor(c.taylor_predict(layer, k));
            },
            py::arg("layer"), py::arg("k"))
        .def(
            "adams_bashforth_predict",
            [](const FeatureCache& c, int layer, int k) {
                return from_tensor(c.adams_bashforth_predict(layer, k));
            },
            py::arg("layer"), py::arg("k"))
        .def(
            "finite_difference",
            [](const FeatureCache& c, int layer, int order) {
                return from_tensor(c.finite_difference(layer, order));
            },
            py::arg("layer"), py::arg("order"));

    m.def(
        "energy_distance",
        [](const std::vector<std::vector<double>>& a,
           const std::vector<std::vector<double>>& b) {
            return energy_distance(to_tensors(a), to_tensors(b));
        },
        py::arg("a"), py::arg("b"));

    m.def("parse_config_text", &parse_config_text, py::arg("text"));
    m.def("emit_config", &emit_config, py::arg("config"));
    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("seed", &RunConfig::seed);
}
