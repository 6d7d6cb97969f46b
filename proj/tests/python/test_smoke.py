import math

import numpy as np
import pytest

import irsbf


def reachable():
    cfg = irsbf.preset_config("desk")
    cfg.noise_dbm = -150.0
    return cfg


def test_config_round_trip():
    cfg = irsbf.preset_config("desk")
    back = irsbf.Config.from_json(cfg.to_json())
    assert back == cfg
    assert cfg.L == cfg.L_v * cfg.L_h
    assert len(cfg.irs_positions) == cfg.N


def test_invalid_config_raises():
    cfg = irsbf.preset_config("desk")
    cfg.K = 0
    with pytest.raises(ValueError):
        cfg.validate()


def test_drop_shapes_and_determinism():
    cfg = irsbf.preset_config("desk")
    a, b = irsbf.make_drop(cfg, 7), irsbf.make_drop(cfg, 7)
    assert len(a.H_bs_irs) == cfg.N
    assert a.H_bs_irs[0].shape == (cfg.L, cfg.M)
    assert len(a.h_irs_user) == cfg.N and len(a.h_irs_user[0]) == cfg.K
    assert np.array_equal(a.H_bs_irs[1], b.H_bs_irs[1])
    assert not np.array_equal(a.H_bs_irs[1], irsbf.make_drop(cfg, 8).H_bs_irs[1])


def test_sum_rate_matches_numpy():
    cfg = irsbf.preset_config("desk")
    d = irsbf.make_drop(cfg, 3)
    rng = np.random.default_rng(0)
    P = (rng.standard_normal((cfg.M, cfg.K)) + 1j * rng.standard_normal((cfg.M, cfg.K))) * 1e-1
    theta = [np.exp(1j * rng.uniform(0, 2 * math.pi, cfg.L)) for _ in range(cfg.N)]
    assign = [n % cfg.K for n in range(cfg.N)]
    noise = 1e-12

    G = np.zeros((cfg.K, cfg.K), dtype=complex)
    for k in range(cfg.K):
        h = sum(d.h_irs_user[n][k] * np.conj(theta[n]) @ d.H_bs_irs[n] for n in range(cfg.N) if assign[n] == k)
        if np.ndim(h):
            G[k] = h @ P
    power = np.abs(G) ** 2
    sig = np.diag(power)
    expected = np.log2(1 + sig / (power.sum(axis=1) - sig + noise)).sum()

    got = irsbf.sum_rate(d, P, theta, assign, noise)
    assert got == pytest.approx(expected, rel=1e-10)
    assert irsbf.sinrs(d, P, theta, assign, noise).shape == (cfg.K,)


def test_selection_dominates_fixed_assignment():
    cfg = irsbf.preset_config("desk")
    d = irsbf.make_drop(cfg, 5)
    rng = np.random.default_rng(1)
    P = rng.standard_normal((cfg.M, cfg.K)) + 0j
    theta = [np.exp(1j * rng.uniform(0, 2 * math.pi, cfg.L)) for _ in range(cfg.N)]
    assign, best = irsbf.select_assignment(d, P, theta, 1e-12)
    assert len(assign) == cfg.N
    for trial in ([0] * cfg.N, [n % cfg.K for n in range(cfg.N)]):
        assert best >= irsbf.sum_rate(d, P, theta, trial, 1e-12) - 1e-9


def test_proposed_run():
    cfg = reachable()
    opts = irsbf.OptimOptions()
    opts.max_iter = 20
    statuses = []
    for seed in range(1, 6):
        r = irsbf.run_method("proposed", cfg, irsbf.make_drop(cfg, seed), opts)
        statuses.append(r["status"])
        if r["status"] == "infeasible_drop":
            continue
        trace = r["trace"]
        assert all(b >= a - 1e-6 * max(1.0, abs(a)) for a, b in zip(trace, trace[1:]))
        power = np.sum(np.abs(r["P"]) ** 2)
        assert power <= 10 ** (cfg.P_max_dbm / 10) * (1 + 1e-6)
        assert r["sum_rate_projected"] > 0
    assert any(s != "infeasible_drop" for s in statuses)


def test_unknown_method():
    cfg = irsbf.preset_config("desk")
    with pytest.raises(ValueError):
        irsbf.run_method("bogus", cfg, irsbf.make_drop(cfg, 1))


def test_summarize_counts():
    cfg = reachable()
    opts = irsbf.OptimOptions()
    opts.max_iter = 5
    rows = irsbf.run_drops(cfg, ["wis", "rps"], 3, seed=2, options=opts)
    assert len(rows) == 6
    summary = irsbf.summarize(cfg, ["wis", "rps"], 3, seed=2, options=opts)
    assert {s["method"] for s in summary} == {"wis", "rps"}
    for s in summary:
        assert s["drops"] == 3 and 0 <= s["feasible"] <= 3
