"""Pipeline driver: generate, embed, build-h, route, latency-matrix, eval, sweep, audit.

Every stage reads and writes the plain-text formats of the owning modules,
so each one can be re-run independently. Exit codes: 0 success, 2 bad
parameters, 3 malformed input files.
"""

from __future__ import annotations

import argparse
import itertools
import sys
from pathlib import Path

import numpy as np

from geoas import asgraph, bordergraph, embedding, metrics, routing
from geoas.config import KEYMAP, RunConfig, config_lines, load_config, resolve_config
from geoas.errors import FormatError, GeoasError, ParameterError
from geoas.geo import DensityGrid, load_grid
from geoas.routing import EndDevice, LatencyModel


def _read(path: str, loader, *extra):
    with open(path, "r", encoding="utf-8") as f:
        return loader(f, *extra, path=path)


def _write(path: str, saver, *objs, header=None) -> None:
    with open(path, "w", encoding="utf-8") as f:
        if header is not None:
            saver(*objs, f, header=header)
        else:
            saver(*objs, f)


def _flags(args: argparse.Namespace) -> dict[str, object]:
    out = {}
    for key in KEYMAP:
        dest = key.replace("-", "_")
        if hasattr(args, dest):
            out[key] = getattr(args, dest)
    return out


def _config(args: argparse.Namespace) -> RunConfig:
    file_values = None
    if getattr(args, "config", None):
        file_values = _read(args.config, load_config)
    return resolve_config(file_values, _flags(args))


def _add_keys(parser: argparse.ArgumentParser, keys: list[str]) -> None:
    types = {"nodes": int, "seed-size": int, "n": int, "N": int, "k": int,
             "graph-seed": int, "embed-seed": int, "attach-seed": int,
             "grid": str}
    for key in keys:
        parser.add_argument(f"--{key}", dest=key.replace("-", "_"),
                            type=types.get(key, float), default=None,
                            metavar="V")
    parser.add_argument("--config", default=None, metavar="FILE",
                        help="key-value config file; flags override it")


def _grid_for(cfg: RunConfig) -> DensityGrid:
    if cfg.grid_path:
        return _read(cfg.grid_path, load_grid)
    print("warning: no density grid supplied, sampling a uniform globe",
          file=sys.stderr)
    return DensityGrid.uniform()


def _devices(ds: metrics.LatencyDataset) -> list[EndDevice]:
    missing = ds.hosts_without_position()
    if missing:
        shown = ", ".join(sorted(missing)[:20])
        more = f" (+{len(missing) - 20} more)" if len(missing) > 20 else ""
        raise ParameterError(f"dataset hosts without coordinates: {shown}{more}")
    return [EndDevice(h, pos) for h, pos in ds.hosts.items()]


def _model(args, cfg: RunConfig) -> tuple[LatencyModel, metrics.LatencyDataset]:
    g = _read(args.graph, asgraph.load_graph)
    e = _read(args.embedding, embedding.load_embedding)
    h = _read(args.borders, bordergraph.load_border_graph, e)
    ds = _read(args.dataset, metrics.load_dataset)
    model = LatencyModel(g, e, h, h_max=cfg.attach_limit_km,
                         n_f=cfg.refraction_index,
                         c_light=cfg.light_speed_km_s,
                         attach_seed=cfg.attach_seed,
                         access_ms=cfg.access_ms)
    return model, ds


def cmd_generate(args) -> int:
    cfg = _config(args)
    g = asgraph.generate_pfp(cfg.node_count, cfg.p, cfg.q, cfg.delta,
                             cfg.graph_seed, cfg.seed_size)
    header = {"nodes": cfg.node_count, "p": cfg.p, "q": cfg.q,
              "delta": cfg.delta, "seed-size": cfg.seed_size,
              "graph-seed": cfg.graph_seed}
    _write(args.output, asgraph.save_graph, g, header=header)
    deg = g.degrees()
    print(f"nodes {g.node_count}")
    print(f"edges {g.edge_count}")
    print(f"max-degree {deg.max()}")
    print(f"mean-degree {float(deg.mean()):.3f}")
    print(f"frac-degree-le-2 {float(np.mean(deg <= 2)):.3f}")
    return 0


def cmd_embed(args) -> int:
    cfg = _config(args)
    g = _read(args.graph, asgraph.load_graph)
    grid = _grid_for(cfg)
    params = embedding.EmbeddingParams(cfg.degree_offset, cfg.max_locations,
                                       cfg.max_compactness_km, cfg.patience)
    e0 = embedding.initial_embedding(g, grid, params, cfg.embed_seed)
    # the optimizer gets its own stream so both stages stay reproducible
    e1, stats = embedding.optimize_embedding(g, e0, params, cfg.embed_seed + 1)
    header = {"n": cfg.degree_offset, "N": cfg.max_locations,
              "cmax": cfg.max_compactness_km, "k": cfg.patience,
              "embed-seed": cfg.embed_seed,
              "grid": cfg.grid_path or "uniform"}
    _write(args.output, embedding.save_embedding, e1, header=header)
    print(f"locations {e1.total_locations}")
    print(f"iterations {stats.iterations}")
    print(f"accepted-swaps {stats.accepted}")
    print(f"final-max-compactness-km {stats.final_max_compactness_km!r}")
    print(f"compactness-violations {stats.compactness_violations}")
    return 0


def cmd_build_h(args) -> int:
    cfg = _config(args)
    g = _read(args.graph, asgraph.load_graph)
    e = _read(args.embedding, embedding.load_embedding)
    h = bordergraph.build_border_graph(g, e, cfg.link_limit_km)
    _write(args.output, bordergraph.save_border_graph, h,
           header={"lmax": cfg.link_limit_km})
    print(f"intra-edges {h.intra_edge_count()}")
    print(f"inter-edges {h.inter_edge_count}")
    print(f"fallback-edges {h.fallback_edge_count}")
    return 0


def cmd_route(args) -> int:
    cfg = _config(args)
    g = _read(args.graph, asgraph.load_graph)
    e = _read(args.embedding, embedding.load_embedding)
    h = _read(args.borders, bordergraph.load_border_graph, e)
    if not (0 <= args.src_loc < e.total_locations
            and 0 <= args.dst_loc < e.total_locations):
        raise ParameterError("src/dst location id out of range")
    fn = (routing.distance_first_route if args.distance_first
          else routing.hot_potato_route)
    p = fn(g, h, e, args.src_loc, args.dst_loc)
    ms = routing.path_latency(p, cfg.refraction_index, cfg.light_speed_km_s)
    print(f"route {args.src_loc} {args.dst_loc} "
          + " ".join(str(l) for l in p.locations))
    print(f"as-path {' '.join(str(v) for v in p.as_sequence)}")
    print(f"total-km {p.total_km!r}")
    print(f"latency-ms {ms!r}")
    return 0


def cmd_latency_matrix(args) -> int:
    cfg = _config(args)
    model, ds = _model(args, cfg)
    devices = _devices(ds)
    _write(args.output, routing.save_latency_matrix, model, devices)
    if args.routes:
        _write(args.routes, routing.save_routes, model, devices)
    print(f"devices {len(devices)}")
    print(f"pairs {len(devices) * (len(devices) - 1)}")
    print(f"fallback-attachments {model.fallback_attachment_count()}")
    return 0


def cmd_eval(args) -> int:
    cfg = _config(args)
    model, ds = _model(args, cfg)
    devices = _devices(ds)
    if not ds.table:
        raise ParameterError("dataset has no measurements")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    ids, data_m = metrics.dataset_matrix(
        ds, reverse_fallback=not args.no_reverse_fallback)
    model_m = routing.latency_matrix(model, devices)
    n = len(ids)
    # evaluate on measured, non-self pairs so both sides see the same support
    mask = ~np.isnan(data_m)
    np.fill_diagonal(mask, False)
    if not mask.any():
        raise ParameterError("dataset has no usable host pairs")
    data_samples = data_m[mask]
    model_samples = model_m[mask]

    ks = metrics.ks_statistic(model_samples, data_samples)
    data_tiv = metrics.tiv_severity_matrix(data_m)[mask]
    model_tiv_m = metrics.tiv_severity_matrix(model_m)
    model_tiv = model_tiv_m[mask]

    def dump(name: str, samples: np.ndarray) -> None:
        with open(out_dir / name, "w", encoding="utf-8") as f:
            metrics.save_ecdf(metrics.Ecdf(samples), f)

    dump("model_latency_ecdf.txt", model_samples)
    dump("data_latency_ecdf.txt", data_samples)
    dump("model_tiv_ecdf.txt", model_tiv)
    dump("data_tiv_ecdf.txt", data_tiv)

    audit = metrics.distance_latency_audit(ds, cfg.refraction_index,
                                           cfg.light_speed_km_s)
    lines = [f"hosts {n}",
             f"measured-pairs {int(mask.sum())}",
             f"ks-statistic {ks!r}",
             f"data-tiv-mean {float(np.mean(data_tiv))!r}",
             f"model-tiv-mean {float(np.mean(model_tiv))!r}",
             f"audit-points {len(audit.records)}",
             f"audit-infeasible {audit.infeasible_count}",
             f"audit-skipped {audit.skipped_pairs}",
             f"fallback-attachments {model.fallback_attachment_count()}"]
    with open(out_dir / "report.txt", "w", encoding="utf-8") as f:
        f.write("# resolved config\n")
        for line in config_lines(cfg):
            f.write(f"config {line}\n")
        for line in lines:
            f.write(line + "\n")
    for line in lines:
        print(line)
    return 0


def _int_list(raw: str) -> list[int]:
    return [int(x) for x in raw.split(",") if x.strip()]


def _float_list(raw: str) -> list[float]:
    return [float(x) for x in raw.split(",") if x.strip()]


def cmd_sweep(args) -> int:
    cfg = _config(args)
    g = _read(args.graph, asgraph.load_graph)
    ds = _read(args.dataset, metrics.load_dataset)
    devices = _devices(ds)
    if not ds.table:
        raise ParameterError("dataset has no measurements")
    grid = _grid_for(cfg)
    _, data_m = metrics.dataset_matrix(ds)
    mask = ~np.isnan(data_m)
    np.fill_diagonal(mask, False)
    if not mask.any():
        raise ParameterError("dataset has no usable host pairs")
    data_samples = data_m[mask]

    rows = []
    for n_off, n_loc, cmax in itertools.product(
            _int_list(args.n_list), _int_list(args.N_list),
            _float_list(args.cmax_list)):
        params = embedding.EmbeddingParams(n_off, n_loc, cmax, cfg.patience)
        e0 = embedding.initial_embedding(g, grid, params, cfg.embed_seed)
        e1, _ = embedding.optimize_embedding(g, e0, params, cfg.embed_seed + 1)
        h = bordergraph.build_border_graph(g, e1, cfg.link_limit_km)
        model = LatencyModel(g, e1, h, h_max=cfg.attach_limit_km,
                             n_f=cfg.refraction_index,
                             c_light=cfg.light_speed_km_s,
                             attach_seed=cfg.attach_seed,
                             access_ms=cfg.access_ms)
        model_m = routing.latency_matrix(model, devices)
        ks = metrics.ks_statistic(model_m[mask], data_samples)
        rows.append((ks, n_off, n_loc, cmax))
        print(f"sweep n={n_off} N={n_loc} cmax={cmax} ks={ks!r}")
    rows.sort()
    print(f"best n={rows[0][1]} N={rows[0][2]} cmax={rows[0][3]} "
          f"ks={rows[0][0]!r}")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            for ks, n_off, n_loc, cmax in rows:
                f.write(f"sweep {n_off} {n_loc} {cmax!r} {ks!r}\n")
    return 0


def cmd_audit(args) -> int:
    cfg = _config(args)
    ds = _read(args.dataset, metrics.load_dataset)
    audit = metrics.distance_latency_audit(ds, cfg.refraction_index,
                                           cfg.light_speed_km_s)
    print(f"points {len(audit.records)}")
    print(f"infeasible {audit.infeasible_count}")
    print(f"skipped {audit.skipped_pairs}")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            for r in audit.records:
                word = "feasible" if r.feasible else "infeasible"
                f.write(f"audit {r.host_a} {r.host_b} {r.distance_km!r} "
                        f"{r.latency_ms!r} {word}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geoas",
        description="Geographically embedded AS topologies and modeled latency")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("generate", help="grow an AS graph")
    p.add_argument("-o", "--output", required=True)
    _add_keys(p, ["nodes", "p", "q", "delta", "seed-size", "graph-seed"])
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("embed", help="place ASes on the globe")
    p.add_argument("graph")
    p.add_argument("-o", "--output", required=True)
    _add_keys(p, ["grid", "n", "N", "cmax", "k", "embed-seed"])
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("build-h", help="wire border routers")
    p.add_argument("graph")
    p.add_argument("embedding")
    p.add_argument("-o", "--output", required=True)
    _add_keys(p, ["lmax"])
    p.set_defaults(func=cmd_build_h)

    p = sub.add_parser("route", help="route between two locations")
    p.add_argument("graph")
    p.add_argument("embedding")
    p.add_argument("borders")
    p.add_argument("--src-loc", type=int, required=True)
    p.add_argument("--dst-loc", type=int, required=True)
    p.add_argument("--distance-first", action="store_true",
                   help="minimize distance over the AS path instead of greedy")
    _add_keys(p, ["nf", "c"])
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("latency-matrix",
                       help="latencies between all dataset host pairs")
    p.add_argument("graph")
    p.add_argument("embedding")
    p.add_argument("borders")
    p.add_argument("dataset")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--routes", default=None, metavar="FILE",
                   help="also dump every route's location sequence")
    _add_keys(p, ["hmax", "nf", "c", "access", "attach-seed"])
    p.set_defaults(func=cmd_latency_matrix)

    p = sub.add_parser("eval", help="compare the model against a dataset")
    p.add_argument("graph")
    p.add_argument("embedding")
    p.add_argument("borders")
    p.add_argument("dataset")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-reverse-fallback", action="store_true",
                   help="do not fill missing (a,b) measurements from (b,a)")
    _add_keys(p, ["hmax", "nf", "c", "access", "attach-seed"])
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="rank embedding parameters by KS fit")
    p.add_argument("graph")
    p.add_argument("dataset")
    p.add_argument("--n-list", required=True, metavar="A,B,...")
    p.add_argument("--N-list", dest="N_list", required=True, metavar="A,B,...")
    p.add_argument("--cmax-list", required=True, metavar="A,B,...")
    p.add_argument("-o", "--output", default=None)
    _add_keys(p, ["grid", "k", "lmax", "hmax", "nf", "c", "access",
                  "embed-seed", "attach-seed"])
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("audit", help="distance vs latency feasibility check")
    p.add_argument("dataset")
    p.add_argument("-o", "--output", default=None)
    _add_keys(p, ["nf", "c"])
    p.set_defaults(func=cmd_audit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (GeoasError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
