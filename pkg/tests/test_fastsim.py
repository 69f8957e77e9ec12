import os
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beepmis.beep_mis import ProtocolParams, run_beep_mis
from beepmis.coins import CoinSource, script_adversary
from beepmis.fastsim import BACKENDS, DEFAULT_BACKEND, _compiled_simulate, simulate_beep_mis
from beepmis.graph import Graph, gen_erdos_renyi, gen_grid, gen_random_regular
from beepmis.verifier import Verdict, interval_records, verify

available = [b for b in BACKENDS if b == "python" or _compiled_simulate is not None]


def reference(g, params, coins):
    t = run_beep_mis(g, params, coins)
    return t, Verdict.from_trace(t)


@pytest.mark.parametrize("backend", available)
@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 30), p=st.floats(0, 0.5), seed=st.integers(0, 2**40),
       interval=st.integers(9, 70))
def test_matches_reference_engine(backend, n, p, seed, interval):
    g = gen_erdos_renyi(n, p, seed)
    params = ProtocolParams.with_interval(interval, 0.2, g.max_degree())
    t, ref = reference(g, params, CoinSource(seed))
    fast = simulate_beep_mis(g, params, seed, record=True, backend=backend)
    assert fast.verdict == ref
    assert fast.slots_run == t.slots_run
    assert sorted(fast.records) == sorted(interval_records(t))


@pytest.mark.parametrize("backend", available)
@pytest.mark.parametrize("script", ["min", "max"])
def test_matches_reference_with_adversary(backend, script):
    g = gen_erdos_renyi(30, 0.15, 2)
    params = ProtocolParams.with_interval(20, 0.2, g.max_degree(), max_rounds=None)
    coins = script_adversary(CoinSource(17), [0, 5, 9, 22], script)
    t, ref = reference(g, params, coins)
    fast = simulate_beep_mis(g, params, coins, record=True, backend=backend)
    assert fast.verdict == ref
    assert fast.slots_run == t.slots_run
    assert sorted(fast.records) == sorted(interval_records(t))


@pytest.mark.skipif(_compiled_simulate is None, reason="compiled kernel not built")
@pytest.mark.parametrize("make", [lambda: gen_random_regular(120, 16, 4),
                                  lambda: gen_grid(8, 12),
                                  lambda: gen_erdos_renyi(300, 0.02, 9)])
def test_backends_agree_on_larger_graphs(make):
    g = make()
    params = ProtocolParams.with_interval(150, 0.2, g.max_degree())  # > 128: three bit words
    for seed in range(3):
        a = simulate_beep_mis(g, params, seed, record=True, backend="compiled")
        b = simulate_beep_mis(g, params, seed, record=True, backend="python")
        assert a.verdict == b.verdict and a.rounds_run == b.rounds_run
        assert a.records == b.records
        assert verify(g, a.verdict).independence == []


@pytest.mark.parametrize("backend", available)
def test_watch_stops_early(backend):
    g = gen_grid(6, 6)
    params = ProtocolParams.with_interval(30, 0.2, 4)
    # all nodes but 0 never beep and are never marked, so only 0 can finish
    coins = script_adversary(CoinSource(3), range(1, 36), "max")
    res = simulate_beep_mis(g, params, coins, watch=[0], backend=backend)
    assert res.verdict.decisions[0].value == "IN"
    assert res.rounds_run < params.round_cap


def test_custom_script_rejected():
    coins = script_adversary(CoinSource(0), [0], {3: 0})
    with pytest.raises(ValueError, match="reference engine"):
        simulate_beep_mis(Graph(2, []), ProtocolParams.with_interval(9, 0.2, 1), coins)


def test_unknown_backend():
    with pytest.raises(ValueError):
        simulate_beep_mis(Graph(1, []), ProtocolParams.with_interval(9, 0.2, 0), 0, backend="gpu")


def test_pure_env_forces_fallback():
    code = "from beepmis.fastsim import DEFAULT_BACKEND; print(DEFAULT_BACKEND)"
    env = dict(os.environ, BEEPMIS_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.strip() == "python"


def test_default_backend_reported():
    assert DEFAULT_BACKEND in BACKENDS
    res = simulate_beep_mis(Graph(1, []), ProtocolParams.with_interval(9, 0.2, 0), 0)
    assert res.backend == DEFAULT_BACKEND
