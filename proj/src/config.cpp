#include "speca/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace speca {

using ordered_json = nlohmann::ordered_json;

namespace {

void reject_unknown(const ordered_json& obj, const std::set<std::string>& known,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key()))
            throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void get_opt(const ordered_json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

GmmSpec RunConfig::make_gmm() const {
    return GmmSpec::ring(gmm.components, gmm.radius, gmm.sigma);
}

DiffusionSchedule RunConfig::make_schedule() const {
    return build_schedule(schedule_kind_from_string(schedule.kind), schedule.T,
                          schedule.beta_start, schedule.beta_end);
}

EngineConfig RunConfig::make_engine_config() const {
    EngineConfig e;
    e.draft = draft_kind_from_string(engine.draft);
    e.order = engine.order;
    e.anchor_gap = engine.anchor_gap;
    e.sampler.tag = engine.sampler == "ddpm" ? SamplerTag::Ddpm : SamplerTag::Ddim;
    e.sampler.eta = engine.eta;
    e.seed = seed;
    e.verifier.tau0 = verifier.tau0;
    e.verifier.decay = verifier.decay;
    e.verifier.epsilon = verifier.epsilon;
    e.verifier.norm_kind = error_norm_from_string(verifier.norm);
    e.verifier.verify_layer = verifier.verify_layer;
    e.verifier.max_draft_len = verifier.max_draft_len;
    e.verifier.substitute_recomputed = verifier.substitute_recomputed;
    return e;
}

BaselineConfig RunConfig::make_baseline_config(const std::string& tag) const {
    BaselineConfig b;
    std::string kind = tag;
    // tags like "fora:5", "step_reduction:0.5", "forecast_only:1:5"
    std::vector<std::string> parts;
    std::stringstream ss(tag);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.empty()) throw std::invalid_argument("empty baseline tag");
    b.kind = baseline_kind_from_string(parts[0]);
    b.sampler.tag = engine.sampler == "ddpm" ? SamplerTag::Ddpm : SamplerTag::Ddim;
    b.anchor_gap = engine.anchor_gap;
    b.order = engine.order;
    b.seed = seed;
    if (parts.size() > 1) {
        if (b.kind == BaselineKind::StepReduction)
            b.fraction = std::stod(parts[1]);
        else if (b.kind == BaselineKind::ForecastOnly)
            b.order = std::stoi(parts[1]);  // forecast_only:m[:N]
        else
            b.anchor_gap = std::stoi(parts[1]);
    }
    if (parts.size() > 2 && b.kind == BaselineKind::ForecastOnly)
        b.anchor_gap = std::stoi(parts[2]);
    return b;
}

void RunConfig::validate() const {
    if (gmm.components < 1) throw std::invalid_argument("gmm.components must be >= 1");
    if (!(gmm.sigma > 0)) throw std::invalid_argument("gmm.sigma must be > 0");
    if (model.dim < 1) throw std::invalid_argument("model.dim must be >= 1");
    schedule_kind_from_string(schedule.kind);
    if (schedule.T < 1) throw std::invalid_argument("schedule.T must be >= 1");
    trainer.validate();
    if (!std::isfinite(trainer.lr)) throw std::invalid_argument("trainer.lr must be finite");
    draft_kind_from_string(engine.draft);
    if (engine.sampler != "ddim" && engine.sampler != "ddpm")
        throw std::invalid_argument("engine.sampler must be ddim or ddpm");
    if (engine.order < 0 || engine.order > 12)
        throw std::invalid_argument("engine.order out of range");
    if (engine.anchor_gap < 1) throw std::invalid_argument("engine.anchor_gap must be >= 1");
    if (engine.n_samples < 1) throw std::invalid_argument("engine.n_samples must be >= 1");
    error_norm_from_string(verifier.norm);
    if (!(verifier.tau0 >= 0)) throw std::invalid_argument("verifier.tau0 must be >= 0");
    if (!(verifier.decay > 0 && verifier.decay < 1))
        throw std::invalid_argument("verifier.decay must be in (0,1)");
    if (!(verifier.epsilon > 0)) throw std::invalid_argument("verifier.epsilon must be > 0");
    if (verifier.max_draft_len < 0)
        throw std::invalid_argument("verifier.max_draft_len must be >= 0");
    if (!model.analytic && verifier.verify_layer >= model.layers)
        throw std::invalid_argument("verifier.verify_layer must be < model.layers");
    if (analysis.reference_samples < 1 || analysis.sweep_samples < 1 ||
        analysis.sweep_seeds < 1)
        throw std::invalid_argument("analysis counts must be >= 1");
}

RunConfig parse_config_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config parse: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config root must be an object");
    reject_unknown(j,
                   {"schema_version", "seed", "gmm", "model", "schedule", "trainer",
                    "engine", "verifier", "analysis"},
                   "config root");
    if (!j.contains("seed")) throw std::invalid_argument("config: 'seed' is mandatory");

    RunConfig c;
    try {
        c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("schema_version") && j.at("schema_version").get<int>() != kSchemaVersion)
        throw std::invalid_argument("unsupported schema_version");

    if (j.contains("gmm")) {
        const auto& o = j.at("gmm");
        reject_unknown(o, {"components", "radius", "sigma"}, "gmm");
        get_opt(o, "components", c.gmm.components);
        get_opt(o, "radius", c.gmm.radius);
        get_opt(o, "sigma", c.gmm.sigma);
    }
    if (j.contains("model")) {
        const auto& o = j.at("model");
        reject_unknown(o, {"analytic", "layers", "hidden", "dim", "time_embed_dim",
                           "weights_path"},
                       "model");
        get_opt(o, "analytic", c.model.analytic);
        get_opt(o, "layers", c.model.layers);
        get_opt(o, "hidden", c.model.hidden);
        get_opt(o, "dim", c.model.dim);
        get_opt(o, "time_embed_dim", c.model.time_embed_dim);
        get_opt(o, "weights_path", c.model.weights_path);
    }
    if (j.contains("schedule")) {
        const auto& o = j.at("schedule");
        reject_unknown(o, {"kind", "T", "beta_start", "beta_end"}, "schedule");
        get_opt(o, "kind", c.schedule.kind);
        get_opt(o, "T", c.schedule.T);
        get_opt(o, "beta_start", c.schedule.beta_start);
        get_opt(o, "beta_end", c.schedule.beta_end);
    }
    if (j.contains("trainer")) {
        const auto& o = j.at("trainer");
        reject_unknown(o, {"steps", "batch", "lr", "beta1", "beta2", "adam_eps"},
                       "trainer");
        get_opt(o, "steps", c.trainer.steps);
        get_opt(o, "batch", c.trainer.batch);
        get_opt(o, "lr", c.trainer.lr);
        get_opt(o, "beta1", c.trainer.beta1);
        get_opt(o, "beta2", c.trainer.beta2);
        get_opt(o, "adam_eps", c.trainer.adam_eps);
    }
    if (j.contains("engine")) {
        const auto& o = j.at("engine");
        reject_unknown(o, {"draft", "order", "anchor_gap", "sampler", "eta", "n_samples"},
                       "engine");
        get_opt(o, "draft", c.engine.draft);
        get_opt(o, "order", c.engine.order);
        get_opt(o, "anchor_gap", c.engine.anchor_gap);
        get_opt(o, "sampler", c.engine.sampler);
        get_opt(o, "eta", c.engine.eta);
        get_opt(o, "n_samples", c.engine.n_samples);
    }
    if (j.contains("verifier")) {
        const auto& o = j.at("verifier");
        reject_unknown(o, {"tau0", "decay", "epsilon", "norm", "verify_layer",
                           "max_draft_len", "substitute_recomputed"},
                       "verifier");
        get_opt(o, "tau0", c.verifier.tau0);
        get_opt(o, "decay", c.verifier.decay);
        get_opt(o, "epsilon", c.verifier.epsilon);
        get_opt(o, "norm", c.verifier.norm);
        get_opt(o, "verify_layer", c.verifier.verify_layer);
        get_opt(o, "max_draft_len", c.verifier.max_draft_len);
        get_opt(o, "substitute_recomputed", c.verifier.substitute_recomputed);
    }
    if (j.contains("analysis")) {
        const auto& o = j.at("analysis");
        reject_unknown(o, {"reference_samples", "correlation_samples", "sweep_samples",
                           "sweep_seeds"},
                       "analysis");
        get_opt(o, "reference_samples", c.analysis.reference_samples);
        get_opt(o, "correlation_samples", c.analysis.correlation_samples);
        get_opt(o, "sweep_samples", c.analysis.sweep_samples);
        get_opt(o, "sweep_seeds", c.analysis.sweep_seeds);
    }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config parse: ") + e.what());
    }

    c.validate();
    return c;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

std::string emit_config(const RunConfig& c) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["seed"] = c.seed;
    j["gmm"] = {{"components", c.gmm.components},
                {"radius", c.gmm.radius},
                {"sigma", c.gmm.sigma}};
    j["model"] = {{"analytic", c.model.analytic},
                  {"layers", c.model.layers},
                  {"hidden", c.model.hidden},
                  {"dim", c.model.dim},
                  {"time_embed_dim", c.model.time_embed_dim},
                  {"weights_path", c.model.weights_path}};
    j["schedule"] = {{"kind", c.schedule.kind},
                     {"T", c.schedule.T},
                     {"beta_start", c.schedule.beta_start},
                     {"beta_end", c.schedule.beta_end}};
    j["trainer"] = {{"steps", c.trainer.steps},
                    {"batch", c.trainer.batch},
                    {"lr", c.trainer.lr},
                    {"beta1", c.trainer.beta1},
                    {"beta2", c.trainer.beta2},
                    {"adam_eps", c.trainer.adam_eps}};
    j["engine"] = {{"draft", c.engine.draft},
                   {"order", c.engine.order},
                   {"anchor_gap", c.engine.anchor_gap},
                   {"sampler", c.engine.sampler},
                   {"eta", c.engine.eta},
                   {"n_samples", c.engine.n_samples}};
    j["verifier"] = {{"tau0", c.verifier.tau0},
                     {"decay", c.verifier.decay},
                     {"epsilon", c.verifier.epsilon},
                     {"norm", c.verifier.norm},
                     {"verify_layer", c.verifier.verify_layer},
                     {"max_draft_len", c.verifier.max_draft_len},
                     {"substitute_recomputed", c.verifier.substitute_recomputed}};
    j["analysis"] = {{"reference_samples", c.analysis.reference_samples},
                     {"correlation_samples", c.analysis.correlation_samples},
                     {"sweep_samples", c.analysis.sweep_samples},
                     {"sweep_seeds", c.analysis.sweep_seeds}};
    return j.dump(2) + "\n";
}

}  // namespace speca
