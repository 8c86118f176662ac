#pragma once

#include <cstdint>
#include <string>

#include "speca/engine.hpp"
#include "speca/gmm.hpp"
#include "speca/trainer.hpp"

namespace speca {

inline constexpr int kSchemaVersion = 1;

/// Whole-experiment configuration. Every field has a documented default;
/// `seed` is mandatory in config files and unknown keys are rejected.
struct RunConfig {
    std::uint64_t seed = 0;

    struct Gmm {
        int components = 8;
        double radius = 4.0;
        double sigma = 0.3;
    } gmm;

    struct Model {
        bool analytic = false;  // run against the exact mixture model
        int layers = 8;
        int hidden = 64;
        int dim = 2;
        int time_embed_dim = 16;
        std::string weights_path;
    } model;

    struct Schedule {
        std::string kind = "linear";
        int T = 50;
        double beta_start = 1e-4;
        double beta_end = 2e-2;
    } schedule;

    TrainConfig trainer;

    struct Engine {
        std::string draft = "taylor";
        int order = 1;
        int anchor_gap = 4;
        std::string sampler = "ddim";
        double eta = 0.0;
        int n_samples = 256;
    } engine;

    struct Verifier {
        double tau0 = 0.5;
        double decay = 0.05;
        double epsilon = 1e-8;
        std::string norm = "l2";
        int verify_layer = -1;
        int max_draft_len = 20;
        bool substitute_recomputed = false;
    } verifier;

    struct Analysis {
        int reference_samples = 512;
        int correlation_samples = 64;
        int sweep_samples = 64;
        int sweep_seeds = 4;
    } analysis;

    GmmSpec make_gmm() const;
    DiffusionSchedule make_schedule() const;
    EngineConfig make_engine_config() const;
    BaselineConfig make_baseline_config(const std::string& tag) const;

    void validate() const;
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text);
std::string emit_config(const RunConfig& cfg);

}  // namespace speca
