"""Measured-latency datasets and the evaluation statistics.

Covers dataset IO, the partial empirical latency function, ECDFs, the
two-sample KS statistic, triangle-inequality-violation severity, and the
distance-versus-latency feasibility audit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Callable, Hashable, Sequence

import numpy as np

from geoas.errors import FormatError, ParameterError
from geoas.geo import GeoPoint, great_circle_distance


class LatencyDataset:
    """Hosts with optional coordinates plus a sparse directed latency table.

    The table is not forced symmetric: measurements are stored exactly as
    given, per ordered pair.
    """

    def __init__(self) -> None:
        self.hosts: dict[str, GeoPoint | None] = {}
        self.table: dict[tuple[str, str], float] = {}

    def add_host(self, host_id: str, position: GeoPoint | None = None) -> None:
        if host_id in self.hosts:
            raise ParameterError(f"duplicate host {host_id}")
        self.hosts[host_id] = position

    def add_rtt(self, a: str, b: str, ms: float) -> None:
        if a not in self.hosts or b not in self.hosts:
            missing = a if a not in self.hosts else b
            raise ParameterError(f"rtt references unknown host {missing}")
        if ms < 0:
            raise ParameterError(f"negative latency {ms} for ({a}, {b})")
        if (a, b) in self.table:
            raise ParameterError(f"duplicate measurement for ({a}, {b})")
        self.table[(a, b)] = float(ms)

    def host_ids(self) -> list[str]:
        return list(self.hosts)

    def hosts_without_position(self) -> list[str]:
        return [h for h, p in self.hosts.items() if p is None]

    def __len__(self) -> int:
        return len(self.table)


def empirical_latency(ds: LatencyDataset, a: str, b: str,
                      reverse_fallback: bool = False) -> float | None:
    """The measured latency for an ordered pair, or None when unmeasured.

    With reverse_fallback, a missing (a, b) falls back to (b, a).
    """
    got = ds.table.get((a, b))
    if got is None and reverse_fallback:
        got = ds.table.get((b, a))
    return got


def load_dataset(stream: IO[str], path: str | None = None) -> LatencyDataset:
    """Parse `host <id> <lat> <lon>` (or `host <id> - -`) and
    `rtt <a> <b> <ms>` lines. Hosts must precede measurements that use them."""
    ds = LatencyDataset()
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "host" and len(parts) == 4:
                if parts[2] == "-" and parts[3] == "-":
                    ds.add_host(parts[1], None)
                else:
                    ds.add_host(parts[1],
                                GeoPoint(float(parts[2]), float(parts[3])))
            elif parts[0] == "rtt" and len(parts) == 4:
                ds.add_rtt(parts[1], parts[2], float(parts[3]))
            else:
                raise FormatError(f"unrecognized line {line!r}",
                                  path=path, line=lineno)
        except ValueError:
            raise FormatError(f"bad number in {line!r}",
                              path=path, line=lineno) from None
        except ParameterError as exc:
            raise FormatError(str(exc), path=path, line=lineno) from None
    return ds


def save_dataset(ds: LatencyDataset, stream: IO[str]) -> None:
    for host_id, pos in ds.hosts.items():
        if pos is None:
            stream.write(f"host {host_id} - -\n")
        else:
            stream.write(f"host {host_id} {pos.lat_deg!r} {pos.lon_deg!r}\n")
    for (a, b), ms in ds.table.items():
        stream.write(f"rtt {a} {b} {ms!r}\n")


def dataset_matrix(ds: LatencyDataset,
                   reverse_fallback: bool = True) -> tuple[list[str], np.ndarray]:
    """Dense matrix view of the table, NaN where unmeasured."""
    ids = ds.host_ids()
    index = {h: i for i, h in enumerate(ids)}
    n = len(ids)
    out = np.full((n, n), np.nan)
    for (a, b), ms in ds.table.items():
        out[index[a], index[b]] = ms
    if reverse_fallback:
        hole = np.isnan(out)
        out[hole] = out.T[hole]
    return ids, out


LatencyFn = Callable[[Hashable, Hashable], "float | None"]


def tiv_severity(latency: LatencyFn, hosts: Sequence[Hashable],
                 x1: Hashable, x2: Hashable) -> float | None:
    """Mean detour ratio over intermediaries that witness a triangle
    inequality violation for (x1, x2); 0 when no host does.

    An intermediary counts only when both of its legs are measured and
    their sum is strictly below the direct latency. Leg sums of exactly 0
    cannot form a ratio and are skipped. Undefined direct latency gives
    None.
    """
    direct = latency(x1, x2)
    if direct is None:
        return None
    ratios = []
    for xi in hosts:
        d1 = latency(x1, xi)
        if d1 is None:
            continue
        d2 = latency(xi, x2)
        if d2 is None:
            continue
        legs = d1 + d2
        if direct > legs and legs > 0:
            ratios.append(direct / legs)
    if not ratios:
        return 0.0
    return sum(ratios) / len(ratios)


def tiv_severity_matrix(D: np.ndarray) -> np.ndarray:
    """tiv_severity for every ordered pair, vectorized over a dense matrix.

    D[i, j] is the latency from i to j, NaN where undefined. Returns a
    matrix with NaN on the diagonal and wherever the direct latency is
    undefined. Ratio accumulation is vectorized, so the mean can differ
    from the scalar form by float rounding in the last bits.
    """
    n = D.shape[0]
    if D.shape != (n, n):
        raise ParameterError("latency matrix must be square")
    out = np.full((n, n), np.nan)
    for i in range(n):
        row = D[i]
        for j in range(n):
            if i == j or np.isnan(D[i, j]):
                continue
            direct = D[i, j]
            legs = row + D[:, j]  # NaN legs never compare true below
            mask = (legs < direct) & (legs > 0)
            if mask.any():
                out[i, j] = float(np.mean(direct / legs[mask]))
            else:
                out[i, j] = 0.0
    return out


class Ecdf:
    """Right-continuous empirical CDF of a sample."""

    def __init__(self, samples: Sequence[float]):
        values = np.asarray(samples, dtype=np.float64)
        if values.size == 0:
            raise ParameterError("ECDF of an empty sample")
        if np.any(np.isnan(values)):
            raise ParameterError("ECDF input contains NaN")
        self.values = np.sort(values)
        self.n = values.size

    def __call__(self, x: float) -> float:
        return float(np.searchsorted(self.values, x, side="right")) / self.n

    def export(self) -> list[tuple[float, float]]:
        """Sorted (value, fraction-at-or-below) pairs, one per distinct value."""
        uniq, counts = np.unique(self.values, return_counts=True)
        fracs = np.cumsum(counts) / self.n
        return [(float(v), float(f)) for v, f in zip(uniq, fracs)]


def save_ecdf(ecdf: Ecdf, stream: IO[str]) -> None:
    for value, frac in ecdf.export():
        stream.write(f"val {value!r} {frac!r}\n")


def ks_statistic(s1: Sequence[float], s2: Sequence[float]) -> float:
    """Two-sample KS distance: the largest vertical ECDF gap, exactly."""
    a = np.sort(np.asarray(s1, dtype=np.float64))
    b = np.sort(np.asarray(s2, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ParameterError("KS statistic of an empty sample")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


@dataclass(frozen=True)
class AuditRecord:
    host_a: str
    host_b: str
    distance_km: float
    latency_ms: float
    feasible: bool


@dataclass(frozen=True)
class AuditResult:
    records: list[AuditRecord]
    skipped_pairs: int  # pairs with a host that has no coordinates

    @property
    def infeasible_count(self) -> int:
        return sum(1 for r in self.records if not r.feasible)


def distance_latency_audit(ds: LatencyDataset, n_f: float = 1.62,
                           c_light: float = 299792.458) -> AuditResult:
    """Distance/latency scatter with a physical-feasibility flag per pair.

    A measurement is infeasible when it is below the straight-line
    propagation time through fiber for the host separation.
    """
    records = []
    skipped = 0
    for (a, b), ms in ds.table.items():
        pa, pb = ds.hosts[a], ds.hosts[b]
        if pa is None or pb is None:
            skipped += 1
            continue
        km = great_circle_distance(pa, pb)
        floor_ms = km * n_f / c_light * 1000.0
        records.append(AuditRecord(a, b, km, ms, feasible=not (ms < floor_ms)))
    return AuditResult(records, skipped)
