import math

import pytest


def test_schedule(sp):
    s = sp.build_schedule("linear", 50, 1e-4, 2e-2)
    assert s.T == 50
    assert s.alpha_bar(0) == 1.0
    assert s.alpha_bar(1) == pytest.approx(1.0 - 1e-4)
    assert s.alpha_bar(50) < s.alpha_bar(25) < s.alpha_bar(1)


def test_gmm_oracle_and_sampling(sp):
    g = sp.GmmSpec.ring(8, 4.0, 0.3)
    assert g.dim == 2 and g.components == 8
    s = sp.build_schedule("linear", 50)
    eps = sp.gmm_eps(g, [0.1, -0.2], 10, s)
    assert len(eps) == 2 and all(math.isfinite(v) for v in eps)
    pts = sp.gmm_sample(g, 500, seed=3)
    assert len(pts) == 500
    radii = [math.hypot(*p) for p in pts]
    assert 3.0 < sum(radii) / len(radii) < 5.0
    assert pts == sp.gmm_sample(g, 500, seed=3)


def test_taylor_cache_square_trajectory(sp):
    c = sp.FeatureCache(anchor_gap=5, order=2, layers=1)
    for t in (30, 25, 20):
        c.push(t, [[float(t * t)]])
    assert c.newest_t() == 20
    assert c.taylor_predict(0, 3)[0] == pytest.approx(289.0)
    assert c.finite_difference(0, 1)[0] == pytest.approx(25**2 - 20**2)


def test_verifier_threshold_and_error(sp):
    cfg = sp.VerifierConfig()
    cfg.tau0 = 0.5
    cfg.decay = 0.05
    assert sp.threshold_at(cfg, 50, 50) == pytest.approx(0.5)
    assert sp.threshold_at(cfg, 25, 50) == pytest.approx(0.5 * 0.05**0.5)
    assert sp.relative_error([1.0, 0.0], [1.0, 0.0], cfg) == 0.0
    assert sp.relative_error([2.0, 0.0], [1.0, 0.0], cfg) == pytest.approx(1.0, rel=1e-6)


def test_engine_degeneracy_and_speedup(sp):
    g = sp.GmmSpec.ring(8, 4.0, 0.3)
    model = sp.GmmTarget(g)
    s = sp.build_schedule("linear", 50)

    cfg = sp.EngineConfig()
    cfg.verifier.tau0 = 0.0
    terminal, ledger = sp.run_speca(model, s, cfg, seed=11)

    base = sp.BaselineConfig()
    base.kind = "full"
    full_terminal, full_ledger = sp.run_baseline(model, s, base, seed=11)

    gap = math.dist(terminal, full_terminal)
    assert gap < 1e-6
    assert full_ledger["accept_rate"] == 0.0
    assert full_ledger["speedup_measured"] == pytest.approx(1.0)
    assert ledger["total"] >= full_ledger["total"]


def test_trained_run_and_energy_distance(sp):
    g = sp.GmmSpec.ring(8, 4.0, 0.3)
    s = sp.build_schedule("linear", 50)
    net = sp.LayeredDenoiser.random_init(4, 32, 2, 8, seed=1)
    losses = sp.train(net, g, s, _cfg(sp, steps=200, batch=64, seed=1))
    assert len(losses) == 200
    assert sum(losses[-50:]) / 50 < losses[0]

    model = sp.DenoiserTarget(net)
    cfg = sp.EngineConfig()
    cfg.verifier.tau0 = 0.8
    cfg.verifier.decay = 0.1
    terminals, ledgers = sp.run_batch(model, s, cfg, 64, seed=5)
    assert len(terminals) == 64 and len(ledgers) == 64
    assert any(l["T_spec"] > 0 for l in ledgers)
    ref = sp.gmm_sample(g, 64, seed=99)
    d = sp.energy_distance(terminals, ref)
    assert d >= 0.0
    assert sp.energy_distance(ref, ref) == 0.0


def test_grad_check(sp):
    s = sp.build_schedule("linear", 50)
    net = sp.LayeredDenoiser.random_init(3, 16, 2, 8, seed=2)
    assert sp.grad_check(net, [0.1, -0.3], 5, s) < 1e-4


def test_config_round_trip(sp):
    cfg = sp.parse_config_text('{"seed": 7, "model": {"analytic": true}}')
    text = sp.emit_config(cfg)
    again = sp.parse_config_text(text)
    assert sp.emit_config(again) == text
    with pytest.raises(ValueError):
        sp.parse_config_text('{"seed": 1, "bogus": 2}')


def _cfg(sp, **kw):
    c = sp.TrainConfig()
    for k, v in kw.items():
        setattr(c, k, v)
    return c
