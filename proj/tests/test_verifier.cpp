#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "speca/rng.hpp"
#include "speca/schedule.hpp"
#include "speca/verifier.hpp"

using namespace speca;

TEST_CASE("relative error basics") {
    VerifierConfig cfg;
    Tensor a = Tensor::vec({0.3, -0.7, 1.1});
    CHECK(relative_error(a, a, cfg) == 0.0);

    Tensor twice = 2.0 * a;
    double e = relative_error(twice, a, cfg);
    double n = norm(a, NormKind::L2);
    CHECK(e == doctest::Approx(n / (n + cfg.epsilon)).epsilon(1e-12));
    CHECK(e == doctest::Approx(1.0).epsilon(1e-6));

    Tensor p = Tensor::vec({1.0, 0.0});
    Tensor q = Tensor::vec({0.0, 1.0});
    CHECK(relative_error(p, q, cfg) ==
          doctest::Approx(std::sqrt(2.0) / (1.0 + 1e-8)).epsilon(1e-14));

    CHECK_THROWS_AS(relative_error(p, a, cfg), std::invalid_argument);
}

TEST_CASE("relative error norm variants") {
    Tensor p = Tensor::vec({2.0, 0.0});
    Tensor q = Tensor::vec({0.0, 1.0});
    VerifierConfig cfg;
    cfg.norm_kind = ErrorNorm::L1;
    CHECK(relative_error(p, q, cfg) == doctest::Approx(3.0 / (1.0 + 1e-8)));
    cfg.norm_kind = ErrorNorm::Linf;
    CHECK(relative_error(p, q, cfg) == doctest::Approx(2.0 / (1.0 + 1e-8)));
    cfg.norm_kind = ErrorNorm::Cosine;
    CHECK(relative_error(p, q, cfg) == doctest::Approx(1.0));  // orthogonal
    CHECK(relative_error(p, p, cfg) == doctest::Approx(0.0));
    CHECK(relative_error(Tensor::zeros({2}), q, cfg) == 1.0);  // zero vector
    CHECK(relative_error(p, Tensor::zeros({2}), cfg) == 1.0);
}

TEST_CASE("relative error is scale-stable for non-tiny actual") {
    SeededRng rng(17);
    VerifierConfig cfg;
    for (int trial = 0; trial < 30; ++trial) {
        Tensor actual = Tensor::vec({rng.normal() + 1.0, rng.normal(), rng.normal()});
        if (norm(actual, NormKind::L2) < 1e-3) continue;
        Tensor pred = actual;
        for (std::size_t i = 0; i < pred.size(); ++i) pred[i] += 0.1 * rng.normal();
        double c = std::exp(2.0 * rng.normal());
        double e0 = relative_error(pred, actual, cfg);
        double e1 = relative_error(c * pred, c * actual, cfg);
        CHECK(std::fabs(e1 - e0) < 1e-6);
    }
}

TEST_CASE("adaptive threshold schedule") {
    VerifierConfig cfg;
    cfg.tau0 = 0.5;
    cfg.decay = 0.05;
    const int T = 50;
    CHECK(threshold_at(cfg, T, T) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(threshold_at(cfg, 0, T) == doctest::Approx(0.5 * 0.05).epsilon(1e-14));
    CHECK(threshold_at(cfg, 25, T) ==
          doctest::Approx(0.11180339887498948).epsilon(1e-12));
    // strictly decreasing as t decreases, for any decay in (0,1)
    for (double beta : {0.01, 0.12, 0.5, 0.99}) {
        cfg.decay = beta;
        for (int t = T; t >= 1; --t)
            CHECK(threshold_at(cfg, t, T) > threshold_at(cfg, t - 1, T));
    }
}

TEST_CASE("verifier config validation") {
    VerifierConfig cfg;
    cfg.validate(8);
    cfg.decay = 1.0;
    CHECK_THROWS_AS(cfg.validate(8), std::invalid_argument);
    cfg = VerifierConfig{};
    cfg.epsilon = 0.0;
    CHECK_THROWS_AS(cfg.validate(8), std::invalid_argument);
    cfg = VerifierConfig{};
    cfg.verify_layer = 8;
    CHECK_THROWS_AS(cfg.validate(8), std::invalid_argument);
    cfg = VerifierConfig{};
    CHECK(cfg.resolved_verify_layer(8) == 7);
    cfg.verify_layer = 2;
    CHECK(cfg.resolved_verify_layer(8) == 2);
}

TEST_CASE("partial verify recomputes exactly one block") {
    DiffusionSchedule s = build_schedule(ScheduleKind::Linear, 50, 1e-4, 2e-2);
    LayeredDenoiser net = LayeredDenoiser::random_init(8, 64, 2, 16, 4);
    Tensor x = Tensor::vec({0.2, -0.5});
    int t = 30;
    ModelOutput full = net.forward(x, t, s);

    VerifierConfig cfg;  // verify_layer = last
    PartialVerifyResult r = partial_verify_pass(net, full.layer_features, cfg, x, t);
    // feeding the true previous-layer feature reproduces the full pass bitwise
    CHECK(r.actual_feature.data == full.layer_features.back().data);

    // gamma calibration: single-block cost within [0.8, 1.2]/L of the full pass
    double gamma = r.verify_flops / net.flops();
    CHECK(gamma >= 0.8 / 8);
    CHECK(gamma <= 1.2 / 8);

    // verify_layer = 0 re-embeds the input, still bitwise consistent
    VerifierConfig cfg0 = cfg;
    cfg0.verify_layer = 0;
    PartialVerifyResult r0 = partial_verify_pass(net, full.layer_features, cfg0, x, t);
    CHECK(r0.actual_feature.data == full.layer_features.front().data);
    double gamma0 = r0.verify_flops / net.flops();
    CHECK(gamma0 >= 0.8 / 8);
    CHECK(gamma0 <= 1.2 / 8);
}

TEST_CASE("partial verify on a single-block model charges the whole block") {
    DiffusionSchedule s = build_schedule(ScheduleKind::Linear, 50, 1e-4, 2e-2);
    LayeredDenoiser net = LayeredDenoiser::random_init(1, 32, 2, 8, 4);
    Tensor x = Tensor::vec({0.1, 0.3});
    ModelOutput full = net.forward(x, 10, s);
    VerifierConfig cfg;
    PartialVerifyResult r = partial_verify_pass(net, full.layer_features, cfg, x, 10);
    CHECK(r.verify_flops >= net.block_flops());
    CHECK(r.actual_feature.data == full.layer_features[0].data);
}

TEST_CASE("sequential validation: prefix acceptance") {
    VerificationOutcome o =
        sequential_validate({0.1, 0.2, 0.9}, {0.5, 0.5, 0.5});
    CHECK(o.accepted == std::vector<int>{1, 2});
    CHECK(o.rejected == std::vector<int>{3});

    VerificationOutcome all = sequential_validate({0.1, 0.1}, {0.5, 0.5});
    CHECK(all.accepted == std::vector<int>{1, 2});
    CHECK(all.rejected.empty());

    VerificationOutcome none = sequential_validate({0.9, 0.1}, {0.5, 0.5});
    CHECK(none.accepted.empty());
    CHECK(none.rejected == std::vector<int>{1, 2});

    // boundary inclusive: e == tau is accepted
    VerificationOutcome edge = sequential_validate({0.5}, {0.5});
    CHECK(edge.accepted == std::vector<int>{1});

    CHECK_THROWS_AS(sequential_validate({0.1}, {0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("sequential validation partitions every input") {
    SeededRng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 1 + static_cast<int>(rng.below(10));
        std::vector<double> errs(n), taus(n);
        for (int i = 0; i < n; ++i) {
            errs[i] = std::fabs(rng.normal());
            taus[i] = std::fabs(rng.normal());
        }
        VerificationOutcome o = sequential_validate(errs, taus);
        CHECK(static_cast<int>(o.accepted.size() + o.rejected.size()) == n);
        for (std::size_t i = 0; i < o.accepted.size(); ++i) {
            CHECK(o.accepted[i] == static_cast<int>(i) + 1);  // prefix
            CHECK(errs[o.accepted[i] - 1] <= taus[o.accepted[i] - 1]);
        }
        if (!o.rejected.empty()) {
            int first = o.rejected.front();
            CHECK(first == static_cast<int>(o.accepted.size()) + 1);
            CHECK(errs[first - 1] > taus[first - 1]);
        }
    }
}

TEST_CASE("error norm string round trip") {
    for (ErrorNorm n :
         {ErrorNorm::L1, ErrorNorm::L2, ErrorNorm::Linf, ErrorNorm::Cosine})
        CHECK(error_norm_from_string(to_string(n)) == n);
    CHECK_THROWS_AS(error_norm_from_string("l3"), std::invalid_argument);
}
