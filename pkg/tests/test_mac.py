import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beepmis.beep_mis import ProtocolParams, run_beep_mis
from beepmis.channel import SlotAction, run_slot
from beepmis.coins import CoinSource
from beepmis.graph import gen_erdos_renyi, gen_path, gen_star
from beepmis.mac import (EventKind, MacChannel, MacParams, emulate_beep_slot, mac_deliver,
                         run_beep_mis_over_mac)
from beepmis.verifier import Verdict


class TestWindow:
    def test_example(self):
        assert MacParams(5).window(3) == (11, 15)

    def test_first_window(self):
        assert MacParams(1).window(1) == (1, 1)

    @given(st.integers(1, 50), st.integers(1, 1000))
    def test_windows_tile(self, f, t):
        m = MacParams(f)
        lo, hi = m.window(t)
        assert hi - lo + 1 == f
        assert m.window(t + 1)[0] == hi + 1

    def test_invalid(self):
        with pytest.raises(ValueError):
            MacParams(0)
        with pytest.raises(ValueError):
            MacParams(3, f_ack=2)
        with pytest.raises(ValueError):
            MacParams(3).window(0)


class TestDeliver:
    def test_adversarial_lowest_sender_at_window_end(self):
        g = gen_star(3)
        evs = mac_deliver(g, {1: (1, 5), 2: (1, 5)}, (1, 5), MacParams(5))
        assert [(e.node, e.sender, e.time) for e in evs] == [(0, 1, 5)]

    def test_short_window_no_guarantee(self):
        g = gen_path(2)
        assert mac_deliver(g, {0: (1, 3)}, (1, 3), MacParams(5)) == []

    def test_partial_cover_dropped(self):
        g = gen_path(2)
        assert mac_deliver(g, {0: (2, 5)}, (1, 5), MacParams(5)) == []

    def test_random_within_window(self):
        g = gen_star(5)
        rng = random.Random(0)
        for _ in range(50):
            evs = mac_deliver(g, {u: (6, 10) for u in range(1, 6)}, (6, 10), MacParams(5),
                              "random", rng, receivers=[0])
            assert evs and all(6 <= e.time <= 10 for e in evs)
            assert len({e.sender for e in evs}) == len(evs)

    def test_random_needs_rng(self):
        with pytest.raises(ValueError):
            mac_deliver(gen_path(2), {0: (1, 1)}, (1, 1), MacParams(1), "random")


class TestEmulation:
    @settings(max_examples=150)
    @given(st.integers(1, 8), st.integers(0, 10**6), st.sampled_from(["adversarial", "random"]),
           st.integers(1, 7), st.integers(1, 20), st.data())
    def test_heard_matches_native_channel(self, n, seed, mode, f, t, data):
        g = gen_erdos_renyi(n, 0.4, seed)
        bits = data.draw(st.lists(st.booleans(), min_size=n, max_size=n))
        beepers = [v for v in range(n) if bits[v]]
        heard, events = emulate_beep_slot(g, t, beepers, MacParams(f), mode, random.Random(seed))
        actions = {v: SlotAction.BEEP if bits[v] else SlotAction.LISTEN for v in range(n)}
        assert heard == run_slot(g, actions)
        lo, hi = MacParams(f).window(t)
        assert all(lo <= e.time <= hi for e in events)
        assert sorted(e.node for e in events if e.kind is EventKind.BCAST) == beepers
        assert all(e.time == lo for e in events if e.kind is EventKind.BCAST)
        assert all(e.time == hi for e in events if e.kind is EventKind.ABORT)

    @pytest.mark.parametrize("mode", ["adversarial", "random"])
    @pytest.mark.parametrize("f", [1, 4])
    def test_protocol_over_mac(self, mode, f):
        g = gen_erdos_renyi(25, 0.2, 6)
        params = ProtocolParams.with_interval(15, 0.2, g.max_degree())
        native = run_beep_mis(g, params, CoinSource(2))
        trace, ch = run_beep_mis_over_mac(g, params, CoinSource(2), MacParams(f), mode,
                                          scheduler_seed=5, keep_log=True)
        assert Verdict.from_trace(trace) == Verdict.from_trace(native)
        assert ch.clock == f * trace.slots_run
        assert trace.header["mac"]["time_units"] == ch.clock
        assert ch.log_jsonl().count("\n") == len(ch.log)

    def test_channel_rejects_bad_mode(self):
        with pytest.raises(ValueError):
            MacChannel(MacParams(1), mode="fifo")
