"""geoas: geographically embedded AS-level topology generation and latency estimation.

The package builds Internet-like autonomous-system graphs, places each AS
at one or more geographic locations, wires border routers between and
within ASes, routes traffic with hot-potato forwarding, and turns route
lengths into propagation latencies that can be compared against measured
round-trip datasets.
"""

from geoas.errors import (
    ConsistencyError,
    FormatError,
    GeoasError,
    NoPathError,
    ParameterError,
)

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError",
    "FormatError",
    "GeoasError",
    "NoPathError",
    "ParameterError",
    "__version__",
]
