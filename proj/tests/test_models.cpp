#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "speca/denoiser.hpp"
#include "speca/gmm.hpp"
#include "speca/rng.hpp"
#include "speca/schedule.hpp"
#include "speca/stats.hpp"

using namespace speca;

TEST_CASE("gmm spec validation and ring factory") {
    GmmSpec g = GmmSpec::ring(8, 4.0, 0.3);
    CHECK(g.components() == 8);
    CHECK(g.dim() == 2);
    g.validate();
    double r0 = std::hypot(g.means[0][0], g.means[0][1]);
    CHECK(r0 == doctest::Approx(4.0).epsilon(1e-12));

    GmmSpec bad = g;
    bad.weights[0] += 0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    GmmSpec bad2 = g;
    bad2.sigmas[1] = 0.0;
    CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
}

TEST_CASE("gmm_eps closed forms for single components") {
    DiffusionSchedule s = build_schedule(ScheduleKind::Linear, 20, 1e-3, 2e-2);
    // standard normal data: p_t stays standard normal, eps = sqrt(1-ab) x
    GmmSpec std_normal{{1.0}, {Tensor::vec({0.0, 0.0})}, {1.0}};
    Tensor x = Tensor::vec({0.7, -1.3});
    for (int t : {1, 10, 20}) {
        Tensor e = gmm_eps(std_normal, x, t, s);
        double c = std::sqrt(1.0 - s.alpha_bar(t));
        CHECK(e[0] == doctest::Approx(c * x[0]).epsilon(1e-12));
        CHECK(e[1] == doctest::Approx(c * x[1]).epsilon(1e-12));
    }
    // shifted unit-variance component: eps = sqrt(1-ab) (x - sqrt(ab) mu)
    Tensor mu = Tensor::vec({2.0, -1.0});
    GmmSpec shifted{{1.0}, {mu}, {1.0}};
    int t = 7;
    double ab = s.alpha_bar(t);
    Tensor e = gmm_eps(shifted, x, t, s);
    for (int j = 0; j < 2; ++j) {
        double expect = std::sqrt(1 - ab) * (x[j] - std::sqrt(ab) * mu[j]);
        CHECK(e[j] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("gmm_eps symmetric mixture is zero at the origin") {
    DiffusionSchedule s = build_schedule(ScheduleKind::Linear, 20, 1e-3, 2e-2);
    Tensor mu = Tensor::vec({3.0, 1.0});
    GmmSpec sym{{0.5, 0.5}, {mu, -1.0 * mu}, {0.4, 0.4}};
    Tensor e = gmm_eps(sym, Tensor::zeros({2}), 9, s);
    CHECK(std::fabs(e[0]) < 1e-12);
    CHECK(std::fabs(e[1]) < 1e-12);
}

TEST_CASE("gmm_eps agrees with the finite-difference score at random points") {
    DiffusionSchedule s = build_schedule(ScheduleKind::Linear, 50, 1e-4, 2e-2);
    GmmSpec g = GmmSpec::ring(8, 4.0, 0.3);
    SeededRng rng(21);
    const double h = 1e-6;
    for (int p = 0; p < 20; ++p) {
        int t = 1 + static_cast<int>(rng.below(50));
        Tensor x = Tensor::vec({3.0 * rng.normal(), 3.0 * rng.normal()});
        Tensor e = gmm_eps(g, x, t, s);
        double c = -std::sqrt(1.0 - s.alpha_bar(t));
        for (int j = 0; j < 2; ++j) {
            Tensor xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            double score = (gmm_log_pt(g, xp, t, s) - gmm_log_pt(g, xm, t, s)) / (2 * h);
            double expect = c * score;
            double denom = std::max(std::fabs(expect), 1e-6);
            CHECK(std::fabs(e[j] - expect) / denom < 1e-5);
        }
    }
}

TEST_CASE("gmm_sample statistics and determinism") {
    GmmSpec std_normal{{1.0}, {Tensor::vec({0.0, 0.0})}, {1.0}};
    SeededRng rng(5);
    auto draws = gmm_sample(std_normal, 100000, rng);
    double m0 = 0, m1 = 0;
    for (auto& d : draws) {
        m0 += d[0];
        m1 += d[1];
    }
    m0 /= draws.size();
    m1 /= draws.size();
    CHECK(std::fabs(m0) < 0.02);
    CHECK(std::fabs(m1) < 0.02);

    GmmSpec degenerate{{1.0, 0.0},
                       {Tensor::vec({5.0, 5.0}), Tensor::vec({-5.0, -5.0})},
                       {0.1, 0.1}};
    SeededRng rng2(6);
    for (auto& d : gmm_sample(degenerate, 200, rng2)) {
        CHECK(d[0] > 0.0);
        CHECK(d[1] > 0.0);
    }

    SeededRng a(9), b(9);
    auto da = gmm_sample(std_normal, 50, a);
    auto db = gmm_sample(std_normal, 50, b);
    for (std::size_t i = 0; i < da.size(); ++i) CHECK(da[i].data == db[i].data);
}

TEST_CASE("zero-weight denoiser emits zero for any input") {
    LayeredDenoiser m(4, 16, 2, 8);  // all parameters zero
    DiffusionSchedule s = build_schedule(ScheduleKind::Linear, 10, 1e-3, 2e-2);
    ModelOutput out = m.forward(Tensor::vec({1.0, -2.0}), 5, s);
    CHECK(out.eps_hat[0] == 0.0);
    CHECK(out.eps_hat[1] == 0.0);
    REQUIRE(out.layer_features.size() == 4);
    for (auto& f : out.layer_features) CHECK(f.size() == 16);
}

TEST_CASE("uninitialized denoiser rejects forward") {
    LayeredDenoiser m;
    DiffusionSchedule s = build_schedule(ScheduleKind::Linear, 10, 1e-3, 2e-2);
    CHECK_THROWS_AS(m.forward(Tensor::vec({0.0}), 1, s), std::runtime_error);
}

TEST_CASE("hand-set tiny denoiser matches a by-hand evaluation") {
    // L=1, H=2, d=1, te=2; weights chosen by hand
    LayeredDenoiser m(1, 2, 1, 2);
    DiffusionSchedule s = build_schedule(ScheduleKind::Linear, 10, 1e-3, 2e-2);
    auto& p = m.params();
    // input head W_in (2 x 3), b_in
    const double Win[6] = {0.5, -0.2, 0.1, 0.3, 0.4, -0.6};
    const double bin[2] = {0.05, -0.1};
    // block: W1 (2x2), b1, W2 (2x2), b2
    const double W1[4] = {0.7, -0.3, 0.2, 0.5};
    const double b1[2] = {0.01, 0.02};
    const double W2[4] = {-0.4, 0.6, 0.9, -0.1};
    const double b2[2] = {0.03, -0.04};
    // output head W_out (1x2), b_out
    const double Wout[2] = {1.1, -0.7};
    const double bout[1] = {0.2};
    for (int i = 0; i < 6; ++i) p[m.off_in_w() + i] = Win[i];
    for (int i = 0; i < 2; ++i) p[m.off_in_b() + i] = bin[i];
    std::size_t ob = m.off_block(0);
    for (int i = 0; i < 4; ++i) p[ob + i] = W1[i];
    for (int i = 0; i < 2; ++i) p[ob + 4 + i] = b1[i];
    for (int i = 0; i < 4; ++i) p[ob + 6 + i] = W2[i];
    for (int i = 0; i < 2; ++i) p[ob + 10 + i] = b2[i];
    for (int i = 0; i < 2; ++i) p[m.off_out_w() + i] = Wout[i];
    p[m.off_out_b()] = bout[0];

    const double x = 0.8;
    const int t = 3;
    Tensor te_emb = m.time_embedding(t);
    double z[3] = {x, te_emb[0], te_emb[1]};
    double h0[2], u[2], v[2], h1[2];
    for (int r = 0; r < 2; ++r)
        h0[r] = Win[r * 3] * z[0] + Win[r * 3 + 1] * z[1] + Win[r * 3 + 2] * z[2] + bin[r];
    for (int r = 0; r < 2; ++r)
        u[r] = W1[r * 2] * h0[0] + W1[r * 2 + 1] * h0[1] + b1[r];
    for (int r = 0; r < 2; ++r) v[r] = u[r] / (1.0 + std::exp(-u[r]));
    for (int r = 0; r < 2; ++r)
        h1[r] = h0[r] + W2[r * 2] * v[0] + W2[r * 2 + 1] * v[1] + b2[r];
    double expect = Wout[0] * h1[0] + Wout[1] * h1[1] + bout[0];

    ModelOutput out = m.forward(Tensor::vec({x}), t, s);
    CHECK(out.eps_hat[0] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(out.layer_features[0][0] == doctest::Approx(h1[0]).epsilon(1e-12));
    CHECK(out.layer_features[0][1] == doctest::Approx(h1[1]).epsilon(1e-12));
}

TEST_CASE("flops accounting: closed form, instrumentation, linearity in L") {
    DiffusionSchedule s = build_schedule(ScheduleKind::Linear, 10, 1e-3, 2e-2);
    LayeredDenoiser m8 = LayeredDenoiser::random_init(8, 64, 2, 16, 1);
    ModelOutput out = m8.forward(Tensor::vec({0.1, 0.2}), 4, s);
    CHECK(out.flops == m8.flops());  // instrumented == closed form exactly
    CHECK(m8.block_flops() == 2.0 * 64 * 64);

    LayeredDenoiser m4 = LayeredDenoiser::random_init(4, 64, 2, 16, 1);
    double blocks8 = m8.flops() - m8.input_head_flops() - m8.output_head_flops();
    double blocks4 = m4.flops() - m4.input_head_flops() - m4.output_head_flops();
    CHECK(blocks8 == doctest::Approx(2.0 * blocks4).epsilon(1e-15));

    ModelOutput out2 = m8.forward(Tensor::vec({3.0, -1.0}), 9, s);
    CHECK(out2.flops == out.flops);  // identical across calls at fixed shape
}

TEST_CASE("denoiser determinism and empirical smoothness") {
    DiffusionSchedule s = build_schedule(ScheduleKind::Linear, 10, 1e-3, 2e-2);
    LayeredDenoiser m = LayeredDenoiser::random_init(4, 32, 2, 8, 7);
    Tensor x = Tensor::vec({0.4, -0.9});
    ModelOutput a = m.forward(x, 3, s);
    ModelOutput b = m.forward(x, 3, s);
    CHECK(a.eps_hat.data == b.eps_hat.data);

    SeededRng rng(11);
    double lam = estimate_lipschitz(m, x, 3, s, 32, rng);
    CHECK(lam > 0.0);
    CHECK(std::isfinite(lam));
    // perturbation response bounded by a modest multiple of the estimate
    SeededRng rng2(12);
    for (int i = 0; i < 8; ++i) {
        double d0 = 1e-3 * rng2.normal(), d1 = 1e-3 * rng2.normal();
        Tensor xp = Tensor::vec({x[0] + d0, x[1] + d1});
        ModelOutput p = m.forward(xp, 3, s);
        double dy = std::hypot(p.eps_hat[0] - a.eps_hat[0], p.eps_hat[1] - a.eps_hat[1]);
        double dx = std::hypot(d0, d1);
        CHECK(dy <= 3.0 * lam * dx + 1e-12);
    }
}

TEST_CASE("weights save/load round trip") {
    LayeredDenoiser m = LayeredDenoiser::random_init(3, 16, 2, 8, 99);
    const char* path = "test_models_weights.bin";
    m.save(path);
    LayeredDenoiser r = LayeredDenoiser::load(path);
    CHECK(r.layers() == 3);
    CHECK(r.hidden() == 16);
    CHECK(r.dim() == 2);
    CHECK(r.time_embed_dim() == 8);
    CHECK(r.params() == m.params());
    std::remove(path);
    CHECK_THROWS_AS(LayeredDenoiser::load("no_such_weights.bin"), std::runtime_error);
}
