import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beepmis.beep_mis import ProtocolParams, run_beep_mis
from beepmis.channel import Decision, Trace, TraceError
from beepmis.coins import CoinSource
from beepmis.graph import gen_erdos_renyi, gen_path
from beepmis.verifier import (IntervalRecord, Verdict, check_independence, check_local_correctness,
                              check_maximality, good_node_stats, interval_records, is_good,
                              termination_stats, verify)

IN, OUT, UND = Decision.IN, Decision.OUT, Decision.UNDECIDED
P3 = gen_path(3)


def verdict(decs, slots=None):
    return Verdict(list(decs), list(slots) if slots else [0 if d is not UND else None for d in decs])


class TestStatic:
    def test_valid_mis(self):
        v = verdict([IN, OUT, IN])
        assert check_independence(P3, v) == [] and check_maximality(P3, v) == []
        assert verify(P3, v).ok

    def test_adjacent_ins(self):
        assert check_independence(P3, verdict([IN, IN, OUT])) == [(0, 1)]

    def test_uncovered_out(self):
        assert check_maximality(P3, verdict([OUT, OUT, OUT])) == [0, 1, 2]

    def test_undecided_counts_against_maximality(self):
        v = verdict([IN, OUT, UND])
        assert check_maximality(P3, v) == [2]
        rep = verify(P3, v)
        assert rep.undecided == [2] and rep.maximality == [] and not rep.ok


class TestTemporal:
    def test_same_slot_out_is_fine(self):
        assert check_local_correctness(P3, verdict([IN, OUT, IN], [5, 5, 5])) == []

    def test_out_before_in(self):
        found = check_local_correctness(gen_path(2), verdict([IN, OUT], [10, 4]))
        assert [(f.kind, f.node, f.slot) for f in found] == [("out-before-in", 1, 4)]

    def test_adjacent_in_reported_once(self):
        found = check_local_correctness(gen_path(2), verdict([IN, IN], [3, 7]))
        assert [(f.kind, f.node, f.other, f.slot) for f in found] == [("adjacent-in", 0, 1, 7)]

    def test_missing_slot_rejected(self):
        with pytest.raises(TraceError):
            check_local_correctness(P3, Verdict([IN, OUT, IN], [0, None, 0]))


class TestTermination:
    def test_counts(self):
        s = termination_stats(Verdict([IN, OUT, UND, IN], [10, 10, None, 30]), budget=20)
        assert (s.decided, s.undecided, s.within_budget) == (3, 1, 2)
        assert s.fraction_within_budget == 0.5
        assert s.median_slot == 10.0

    @given(st.lists(st.one_of(st.none(), st.integers(0, 1000)), min_size=1, max_size=30),
           st.integers(0, 1000), st.integers(0, 1000))
    def test_monotone_in_budget(self, slots, b1, b2):
        lo, hi = sorted((b1, b2))
        decs = [UND if s is None else IN for s in slots]
        v = Verdict(decs, slots)
        assert termination_stats(v, lo).fraction_within_budget <= \
            termination_stats(v, hi).fraction_within_budget


def fraction_oracle(c, high, exps, interval):
    # independent restatement with exact rationals
    if Fraction(c) <= Fraction(interval, 3):
        return False
    d = sum((Fraction(1, 2 ** k) for k in exps), Fraction(0))
    return d >= Fraction(1, 10) if high else d <= 22


class TestGoodNode:
    @pytest.mark.parametrize("c,high,exps,good", [
        (100, True, [1], True),
        (100, True, [4, 4], True),         # d = 1/8
        (100, True, [4], False),           # d = 1/16 < 1/10
        (100, False, [1] * 44, True),      # d = 22
        (100, False, [1] * 45, False),     # d = 22.5
        (40, True, [1], False),            # c = I/3
        (41, False, [], True),
    ])
    def test_examples(self, c, high, exps, good):
        assert is_good(c, high, exps, 120)[0] is good

    @given(st.integers(0, 120), st.booleans(), st.lists(st.integers(1, 40), max_size=60))
    def test_matches_fraction_oracle(self, c, high, exps):
        assert is_good(c, high, exps, 120)[0] == fraction_oracle(c, high, exps, 120)

    def test_analytic_floor(self):
        rep = good_node_stats(P3, [IntervalRecord(0, 0, 1, 100, 0, False, False)], interval=120)
        assert rep.analytic_floor == pytest.approx(1 - 2 * math.exp(-1.2))
        assert rep.frequency == 1.0

    def test_neighbors_restricted_to_same_round(self):
        recs = [IntervalRecord(0, 1, 1, 100, 80, True, False),
                IntervalRecord(1, 0, 1, 100, 80, True, False)]
        # node 1 in round 0 has no active neighbor record: d = 0, HIGH is not good
        rep = good_node_stats(P3, recs, interval=120)
        assert rep.good == 0 and rep.failed_high == 2

    def test_trace_recomputation(self):
        g = gen_erdos_renyi(20, 0.2, 1)
        params = ProtocolParams.with_interval(40, 0.2, g.max_degree())
        t = run_beep_mis(g, params, CoinSource(4))
        recs = interval_records(t)
        rep = good_node_stats(g, t)
        by_round = {}
        for r in recs:
            by_round.setdefault(r.round, {})[r.node] = r
        good = sum(fraction_oracle(r.c, r.high, [by_round[r.round][u].k for u in g.adj[r.node]
                                                 if u in by_round[r.round]], 40)
                   for r in recs)
        assert rep.good == good and rep.total == len(recs)

    def test_needs_full_trace(self):
        g = gen_path(4)
        params = ProtocolParams.with_interval(10, 0.2, 2)
        t = run_beep_mis(g, params, CoinSource(0), verbosity="decisions")
        with pytest.raises(TraceError):
            interval_records(t)


class TestVerifyTrace:
    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, 15), st.integers(0, 10**6))
    def test_trace_and_verdict_agree(self, n, seed):
        g = gen_erdos_renyi(n, 0.3, seed)
        params = ProtocolParams.with_interval(12, 0.2, g.max_degree())
        t = run_beep_mis(g, params, CoinSource(seed))
        a = verify(g, t).to_dict()
        b = verify(g, Verdict.from_trace(t)).to_dict()
        c = verify(g, Trace.from_jsonl(t.to_jsonl())).to_dict()
        assert a == b == c
