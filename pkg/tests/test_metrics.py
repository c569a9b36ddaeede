import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from geoas.errors import FormatError, ParameterError
from geoas.geo import GeoPoint
from geoas.metrics import (Ecdf, LatencyDataset, dataset_matrix,
                           distance_latency_audit, empirical_latency,
                           ks_statistic, load_dataset, save_dataset,
                           save_ecdf, tiv_severity, tiv_severity_matrix)

from oracles import brute_force_tiv


def _ds(pairs, hosts=None):
    ds = LatencyDataset()
    names = hosts or sorted({h for p in pairs for h in p[:2]})
    for h in names:
        ds.add_host(h, None)
    for a, b, ms in pairs:
        ds.add_rtt(a, b, ms)
    return ds


class TestDataset:
    def test_duplicate_host_rejected(self):
        ds = LatencyDataset()
        ds.add_host("a", None)
        with pytest.raises(ParameterError):
            ds.add_host("a", GeoPoint(0, 0))

    def test_rtt_needs_known_hosts(self):
        ds = LatencyDataset()
        ds.add_host("a", None)
        with pytest.raises(ParameterError):
            ds.add_rtt("a", "zzz", 5.0)

    def test_negative_rtt_rejected(self):
        ds = _ds([])
        ds.add_host("a", None)
        ds.add_host("b", None)
        with pytest.raises(ParameterError):
            ds.add_rtt("a", "b", -1.0)

    def test_duplicate_rtt_rejected(self):
        ds = _ds([("a", "b", 5.0)])
        with pytest.raises(ParameterError):
            ds.add_rtt("a", "b", 6.0)

    def test_directed_pairs_are_distinct(self):
        ds = _ds([("a", "b", 5.0), ("b", "a", 9.0)])
        assert empirical_latency(ds, "a", "b") == 5.0
        assert empirical_latency(ds, "b", "a") == 9.0

    def test_reverse_fallback(self):
        ds = _ds([("a", "b", 5.0)])
        assert empirical_latency(ds, "b", "a") is None
        assert empirical_latency(ds, "b", "a", reverse_fallback=True) == 5.0

    def test_hosts_without_position(self):
        ds = LatencyDataset()
        ds.add_host("a", GeoPoint(1.0, 2.0))
        ds.add_host("b", None)
        assert ds.hosts_without_position() == ["b"]


class TestDatasetIO:
    def test_roundtrip(self):
        ds = LatencyDataset()
        ds.add_host("h1", GeoPoint(40.0, -74.0))
        ds.add_host("h2", None)
        ds.add_rtt("h1", "h2", 12.5)
        buf = io.StringIO()
        save_dataset(ds, buf)
        buf.seek(0)
        back = load_dataset(buf)
        assert back.hosts == ds.hosts
        assert back.table == ds.table

    def test_positionless_host_syntax(self):
        ds = load_dataset(io.StringIO("host a - -\nhost b 1.0 2.0\n"))
        assert ds.hosts["a"] is None
        assert ds.hosts["b"] == GeoPoint(1.0, 2.0)

    def test_rtt_before_host_is_an_error(self):
        text = "rtt a b 5.0\nhost a - -\nhost b - -\n"
        with pytest.raises(FormatError) as err:
            load_dataset(io.StringIO(text), path="d.txt")
        assert "d.txt:1" in str(err.value)

    def test_bad_latitude_is_format_error(self):
        with pytest.raises(FormatError):
            load_dataset(io.StringIO("host a 95.0 0.0\n"))


class TestDatasetMatrix:
    def test_holes_are_nan(self):
        ds = _ds([("a", "b", 5.0)], hosts=["a", "b", "c"])
        ids, m = dataset_matrix(ds, reverse_fallback=False)
        assert ids == ["a", "b", "c"]
        assert m[0, 1] == 5.0
        assert math.isnan(m[1, 0])
        assert math.isnan(m[0, 2])

    def test_reverse_fill(self):
        ds = _ds([("a", "b", 5.0), ("b", "a", 9.0), ("a", "c", 7.0)])
        _, m = dataset_matrix(ds, reverse_fallback=True)
        assert m[0, 1] == 5.0 and m[1, 0] == 9.0  # measured values win
        assert m[2, 0] == 7.0  # filled from the transpose


class TestTivSeverity:
    def _fn(self, table):
        return lambda a, b: table.get((a, b))

    def test_classic_violation_ratio(self):
        # direct 10 vs relay 3+4: a single violator gives exactly 10/7
        table = {("a", "b"): 10.0, ("a", "c"): 3.0, ("c", "b"): 4.0}
        got = tiv_severity(self._fn(table), ["a", "b", "c"], "a", "b")
        assert got == 10.0 / 7.0

    def test_two_violators_average(self):
        table = {("a", "b"): 10.0,
                 ("a", "c"): 3.0, ("c", "b"): 4.0,
                 ("a", "d"): 6.0, ("d", "b"): 2.0}
        got = tiv_severity(self._fn(table), list("abcd"), "a", "b")
        assert got == (10.0 / 7.0 + 10.0 / 8.0) / 2.0

    def test_no_violation_is_zero(self):
        table = {("a", "b"): 5.0, ("a", "c"): 3.0, ("c", "b"): 4.0}
        assert tiv_severity(self._fn(table), list("abc"), "a", "b") == 0.0

    def test_undefined_direct_is_none(self):
        assert tiv_severity(self._fn({}), list("ab"), "a", "b") is None

    def test_zero_leg_sum_skipped(self):
        table = {("a", "b"): 10.0, ("a", "c"): 0.0, ("c", "b"): 0.0}
        assert tiv_severity(self._fn(table), list("abc"), "a", "b") == 0.0

    def test_matches_brute_force_random_tables(self):
        rng = np.random.default_rng(71)
        for trial in range(50):
            n = int(rng.integers(3, 21))
            hosts = [f"h{i}" for i in range(n)]
            table = {}
            for a in hosts:
                for b in hosts:
                    if a != b and rng.random() < 0.7:
                        table[(a, b)] = float(rng.uniform(0.0, 50.0))
            for _ in range(10):
                x1, x2 = rng.choice(hosts, 2, replace=False)
                want = brute_force_tiv(table, hosts, x1, x2)
                got = tiv_severity(self._fn(table), hosts, x1, x2)
                if want is None:
                    assert got is None
                else:
                    assert got == pytest.approx(want, abs=1e-12)

    def test_matrix_agrees_with_scalar(self):
        rng = np.random.default_rng(72)
        n = 12
        m = rng.uniform(1.0, 60.0, (n, n))
        np.fill_diagonal(m, np.nan)
        m[rng.random((n, n)) < 0.2] = np.nan
        hosts = list(range(n))
        table = {(i, j): float(m[i, j]) for i in hosts for j in hosts
                 if not math.isnan(m[i, j])}
        fn = lambda a, b: table.get((a, b))
        sev = tiv_severity_matrix(m)
        for i in hosts:
            for j in hosts:
                if i == j:
                    assert math.isnan(sev[i, j])
                    continue
                want = tiv_severity(fn, hosts, i, j)
                if want is None:
                    assert math.isnan(sev[i, j])
                else:
                    assert sev[i, j] == pytest.approx(want, abs=1e-12)


class TestEcdf:
    def test_step_values(self):
        f = Ecdf([1.0, 2.0, 3.0, 4.0])
        assert f(0.5) == 0.0
        assert f(1.0) == 0.25  # right-continuous: jumps at the sample
        assert f(2.5) == 0.5
        assert f(4.0) == 1.0
        assert f(99.0) == 1.0

    def test_ties_accumulate(self):
        f = Ecdf([1.0, 1.0, 2.0])
        assert f(1.0) == pytest.approx(2.0 / 3.0)

    def test_rejects_empty_and_nan(self):
        with pytest.raises(ParameterError):
            Ecdf([])
        with pytest.raises(ParameterError):
            Ecdf([1.0, float("nan")])

    def test_export_lines(self):
        buf = io.StringIO()
        save_ecdf(Ecdf([3.0, 1.0, 1.0]), buf)
        assert buf.getvalue().splitlines() == [
            f"val {1.0!r} {2.0 / 3.0!r}",
            f"val {3.0!r} {1.0!r}",
        ]


class TestKs:
    def test_identical_samples_give_zero(self):
        assert ks_statistic([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0

    def test_disjoint_samples_give_one(self):
        assert ks_statistic([1.0, 2.0], [10.0, 11.0]) == 1.0

    def test_known_quarter(self):
        assert ks_statistic([1, 2, 3, 4], [2, 3, 4, 5]) == 0.25

    def test_symmetric(self):
        rng = np.random.default_rng(73)
        a = rng.normal(0, 1, 40)
        b = rng.normal(0.3, 1.2, 55)
        assert ks_statistic(a, b) == ks_statistic(b, a)

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=60),
           st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=60))
    def test_bounds_and_self(self, a, b):
        d = ks_statistic(a, b)
        assert 0.0 <= d <= 1.0
        assert ks_statistic(a, a) == 0.0

    def test_matches_direct_scan(self):
        rng = np.random.default_rng(74)
        a = rng.exponential(10.0, 37)
        b = rng.exponential(12.0, 53)
        grid = np.concatenate([a, b])
        fa = np.searchsorted(np.sort(a), grid, side="right") / len(a)
        fb = np.searchsorted(np.sort(b), grid, side="right") / len(b)
        want = float(np.max(np.abs(fa - fb)))
        assert ks_statistic(a, b) == pytest.approx(want, abs=1e-15)


class TestAudit:
    def _geo_ds(self):
        ds = LatencyDataset()
        ds.add_host("a", GeoPoint(0.0, 0.0))
        ds.add_host("b", GeoPoint(0.0, 9.0))  # ~1000.75 km
        ds.add_host("c", None)
        return ds

    def test_feasible_pair(self):
        ds = self._geo_ds()
        ds.add_rtt("a", "b", 10.0)
        res = distance_latency_audit(ds)
        assert len(res.records) == 1
        r = res.records[0]
        assert r.feasible
        assert r.distance_km == pytest.approx(9 * 111.19492664455873, rel=1e-9)

    def test_infeasible_pair(self):
        ds = self._geo_ds()
        ds.add_rtt("a", "b", 1.0)  # needs ~5.4 ms at lightspeed in fiber
        res = distance_latency_audit(ds)
        assert not res.records[0].feasible
        assert res.infeasible_count == 1

    def test_exact_floor_is_feasible(self):
        ds = self._geo_ds()
        km = 9 * 111.19492664455873
        floor_ms = km * 1.62 / 299792.458 * 1000.0
        ds.add_rtt("a", "b", floor_ms)
        assert distance_latency_audit(ds).records[0].feasible

    def test_positionless_pairs_are_skipped(self):
        ds = self._geo_ds()
        ds.add_rtt("a", "c", 5.0)
        res = distance_latency_audit(ds)
        assert len(res.records) == 0
        assert res.skipped_pairs == 1
