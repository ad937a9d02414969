"""Command-line driver: generate, build, query, bench, recommend, serve."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .clsm import CLSM
from .config import (
    DEFAULT_BITS,
    DEFAULT_FILL_FACTOR,
    DEFAULT_GROWTH_FACTOR,
    DEFAULT_LENGTH,
    DEFAULT_PAGE_SIZE,
    DEFAULT_SEGMENTS,
    IndexConfig,
)
from .ctree import CTree
from .errors import SortsaxError
from .instrument import Recorder
from .recommend import WorkloadProfile, recommend
from .series import (
    DataSeries,
    euclidean_distance,
    random_walk_generate,
    read_binary_dataset,
    read_dataset,
    write_binary_dataset,
    znormalize,
)
from .storage import MemoryBudget
from .windows import TemporalPartitions, btp_search, normalize_window, tp_search


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--w", type=int, default=DEFAULT_SEGMENTS, help="segments per series")
    p.add_argument("--b", type=int, default=DEFAULT_BITS, help="bits per segment")
    p.add_argument("--page-size", type=int, default=DEFAULT_PAGE_SIZE)
    p.add_argument("--materialized", action="store_true",
                   help="inline series values next to their keys")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sortsax",
        description="Data-series similarity search over sortable summarizations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="emit a random-walk dataset (binary f32)")
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--length", type=int, default=DEFAULT_LENGTH)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, required=True)

    b = sub.add_parser("build", help="build an index from a dataset file")
    b.add_argument("--data", type=Path, required=True)
    b.add_argument("--length", type=int, default=DEFAULT_LENGTH)
    b.add_argument("--index", choices=("ctree", "clsm"), required=True)
    b.add_argument("--strategy", choices=("PP", "TP", "BTP"), default="PP")
    b.add_argument("--out", type=Path, required=True, help="index directory")
    b.add_argument("--fill-factor", type=float, default=DEFAULT_FILL_FACTOR)
    b.add_argument("--growth-factor", type=int, default=DEFAULT_GROWTH_FACTOR)
    b.add_argument("--memory-budget", type=int, default=64 << 20)
    b.add_argument("--buffer-bytes", type=int, default=4 << 20)
    _add_config_flags(b)

    q = sub.add_parser("query", help="nearest-neighbor query against an index")
    q.add_argument("--index", type=Path, help="index directory (not for bruteforce)")
    q.add_argument("--queries", type=Path, required=True,
                   help="query series file (binary f32)")
    q.add_argument("--query-index", type=int, default=0,
                   help="which record of the query file to use")
    q.add_argument("--length", type=int, default=DEFAULT_LENGTH)
    q.add_argument("--mode", choices=("approximate", "exact", "bruteforce"),
                   default="exact")
    q.add_argument("--window", help="inclusive window START:END")
    q.add_argument("--data", type=Path,
                   help="dataset file, required for --mode bruteforce")

    be = sub.add_parser("bench", help="compare index configurations on one workload")
    be.add_argument("--data", type=Path, required=True)
    be.add_argument("--queries", type=Path, required=True)
    be.add_argument("--length", type=int, default=DEFAULT_LENGTH)
    be.add_argument("--work-dir", type=Path, required=True)
    be.add_argument("--config", action="append", required=True, dest="configs",
                    help="e.g. ctree,f=1.0 or clsm,T=3,materialized (repeatable)")
    be.add_argument("--out", type=Path, help="also write the reports to a file")

    r = sub.add_parser("recommend", help="suggest an index configuration")
    r.add_argument("--mode", choices=("static", "streaming"), required=True)
    r.add_argument("--dataset-bytes", type=int, required=True)
    r.add_argument("--memory-budget", type=int, required=True)
    r.add_argument("--queries", type=int, required=True)
    r.add_argument("--update-rate", type=float, default=0.0)
    r.add_argument("--window-profile", choices=("none", "short", "mixed", "long"),
                   default="none")
    r.add_argument("--tree", type=Path, help="alternate decision-tree file")

    s = sub.add_parser("serve", help="start the REST service")
    s.add_argument("--config", type=Path, help="JSON config file")
    s.add_argument("--port", type=int)
    s.add_argument("--data-dir", type=Path)
    s.add_argument("--host", default="127.0.0.1")

    return parser


def cmd_generate(args) -> int:
    args.out.parent.mkdir(parents=True, exist_ok=True)
    count = write_binary_dataset(
        args.out, random_walk_generate(args.count, args.length, args.seed)
    )
    print(json.dumps({"written": count, "length": args.length, "path": str(args.out)}))
    return 0


def _open_index(path: Path, recorder=None):
    path = Path(path)
    if (path / "inner.json").exists():
        return CTree.open(path, recorder)
    if (path / "MANIFEST.txt").exists():
        return CLSM.open(path, recorder)
    raise SortsaxError(f"{path} does not look like an index directory")


def _build_engine(kind, data, length, out, *, strategy, w, b, page_size,
                  materialized, fill_factor, growth_factor, memory_budget,
                  buffer_bytes, recorder):
    config = IndexConfig(n=length, w=w, b=b, page_size=page_size,
                         materialized=materialized)
    series = read_dataset(data, length)  # .csv files are CSV, else binary f32
    started = time.monotonic()
    if kind == "ctree":
        engine = CTree.build(out, series, config, fill_factor=fill_factor,
                             budget=MemoryBudget(bytes=memory_budget),
                             recorder=recorder)
    else:
        if strategy == "TP":
            engine = TemporalPartitions(out, config, buffer_bytes=buffer_bytes,
                                        recorder=recorder, create=True)
        else:
            engine = CLSM(out, config, buffer_bytes=buffer_bytes,
                          growth_factor=growth_factor, recorder=recorder,
                          create=True, ordered_timestamps=(strategy == "BTP"))
        for s in series:
            engine.insert_series(s)
    return engine, time.monotonic() - started


def cmd_build(args) -> int:
    recorder = Recorder()
    engine, seconds = _build_engine(
        args.index, args.data, args.length, args.out, strategy=args.strategy,
        w=args.w, b=args.b, page_size=args.page_size,
        materialized=args.materialized, fill_factor=args.fill_factor,
        growth_factor=args.growth_factor, memory_budget=args.memory_budget,
        buffer_bytes=args.buffer_bytes, recorder=recorder,
    )
    if isinstance(engine, CLSM):
        engine.force_flush()  # CLI builds persist everything before exiting
    print(json.dumps({
        "index": args.index,
        "entries": engine.entry_count,
        "build_seconds": round(seconds, 4),
        "size_bytes": engine.size_bytes,
        "counters": recorder.snapshot().as_dict(),
        "path": str(args.out),
    }))
    engine.close()
    return 0


def _load_query(args) -> DataSeries:
    for s in read_binary_dataset(args.queries, args.length):
        if s.id == args.query_index:
            return s
    raise SortsaxError(f"query index {args.query_index} beyond file end")


def cmd_query(args) -> int:
    query = _load_query(args)
    window = None
    if args.window:
        start, end = args.window.split(":", 1)
        window = normalize_window((int(start), int(end)))

    if args.mode == "bruteforce":
        # independent oracle: sequential pass over the dataset file, no index
        if not args.data:
            raise SortsaxError("--mode bruteforce needs --data")
        qn = znormalize(query)
        best = None
        for s in read_binary_dataset(args.data, args.length):
            if window is not None and not window[0] <= s.timestamp <= window[1]:
                continue
            d = euclidean_distance(qn, znormalize(s))
            if best is None or d < best["distance"]:
                best = {"series_id": s.id, "distance": d, "timestamp": s.timestamp}
        if best is None:
            print(json.dumps({"found": False}))
            return 0
        print(json.dumps({"found": True, "mode": "bruteforce", **best}))
        return 0

    if not args.index:
        raise SortsaxError("--index is required unless --mode bruteforce")
    engine = _open_index(args.index)
    if window is not None and isinstance(engine, TemporalPartitions):
        result = tp_search(engine, query, window, mode=args.mode)
    elif window is not None and getattr(engine, "ordered_timestamps", False):
        result = btp_search(engine, query, window, mode=args.mode)
    elif args.mode == "exact":
        result = engine.exact_search(query, window=window)
    else:
        result = engine.approximate_search(query, window=window)
    print(json.dumps({
        "found": True,
        "mode": args.mode,
        "series_id": result.series_id,
        "distance": result.distance,
        "timestamp": result.timestamp,
        "exact": result.exact,
    }))
    engine.close()
    return 0


def _parse_bench_config(text: str) -> dict:
    parts = text.split(",")
    kind = parts[0].strip()
    if kind not in ("ctree", "clsm"):
        raise SortsaxError(f"bench config must start with ctree or clsm: {text!r}")
    out = {
        "kind": kind, "label": text, "fill_factor": DEFAULT_FILL_FACTOR,
        "growth_factor": DEFAULT_GROWTH_FACTOR, "materialized": False,
        "w": DEFAULT_SEGMENTS, "b": DEFAULT_BITS, "page_size": DEFAULT_PAGE_SIZE,
        "memory_budget": 64 << 20, "buffer_bytes": 4 << 20, "strategy": "PP",
    }
    for part in parts[1:]:
        part = part.strip()
        if part == "materialized":
            out["materialized"] = True
            continue
        key, _, value = part.partition("=")
        mapping = {
            "f": ("fill_factor", float), "T": ("growth_factor", int),
            "w": ("w", int), "b": ("b", int), "page": ("page_size", int),
            "budget": ("memory_budget", int), "buffer": ("buffer_bytes", int),
            "strategy": ("strategy", str),
        }
        if key not in mapping:
            raise SortsaxError(f"unknown bench config key {key!r}")
        field, cast = mapping[key]
        out[field] = cast(value)
    return out


def cmd_bench(args) -> int:
    queries = list(read_binary_dataset(args.queries, args.length))
    reports = []
    for i, text in enumerate(args.configs):
        cfg = _parse_bench_config(text)
        recorder = Recorder()
        out_dir = args.work_dir / f"bench-{i:02d}-{cfg['kind']}"
        engine, seconds = _build_engine(
            cfg["kind"], args.data, args.length, out_dir, strategy=cfg["strategy"],
            w=cfg["w"], b=cfg["b"], page_size=cfg["page_size"],
            materialized=cfg["materialized"], fill_factor=cfg["fill_factor"],
            growth_factor=cfg["growth_factor"], memory_budget=cfg["memory_budget"],
            buffer_bytes=cfg["buffer_bytes"], recorder=recorder,
        )
        if isinstance(engine, CLSM):
            engine.force_flush()  # both engines fully persistent before comparing
        build_counters = recorder.snapshot().as_dict()
        recorder.reset()
        latencies = []
        distances = []
        for q in queries:
            t0 = time.perf_counter()
            res = engine.exact_search(q)
            latencies.append(time.perf_counter() - t0)
            distances.append(res.distance)
        lat = np.array(latencies)
        report = {
            "label": cfg["label"],
            "build_seconds": round(seconds, 4),
            "index_bytes": engine.size_bytes,
            "entries": engine.entry_count,
            "build_counters": build_counters,
            "query_counters": recorder.snapshot().as_dict(),
            "latency_seconds": {
                "mean": float(lat.mean()),
                "p50": float(np.percentile(lat, 50)),
                "p95": float(np.percentile(lat, 95)),
                "max": float(lat.max()),
            },
            "mean_distance": float(np.mean(distances)),
        }
        reports.append(report)
        print(json.dumps(report))
        engine.close()
    if args.out:
        args.out.write_text("\n".join(json.dumps(r) for r in reports) + "\n")
    return 0


def cmd_recommend(args) -> int:
    profile = WorkloadProfile(
        mode=args.mode,
        dataset_bytes=args.dataset_bytes,
        memory_budget_bytes=args.memory_budget,
        expected_query_count=args.queries,
        update_rate=args.update_rate,
        window_profile=args.window_profile,
    )
    rec = recommend(profile, tree_path=args.tree)
    print(json.dumps(rec.as_dict(), indent=2))
    return 0


def resolve_serve_settings(config_path=None, port=None, data_dir=None,
                           env=None) -> dict:
    """Defaults, then the JSON config file, then env vars, then flags."""
    env = os.environ if env is None else env
    settings = {"port": 8000, "data_dir": "sortsax-data"}
    if config_path:
        settings.update(json.loads(Path(config_path).read_text()))
    if env.get("SORTSAX_PORT"):
        settings["port"] = int(env["SORTSAX_PORT"])
    if env.get("SORTSAX_DATA_DIR"):
        settings["data_dir"] = env["SORTSAX_DATA_DIR"]
    if port is not None:
        settings["port"] = port
    if data_dir is not None:
        settings["data_dir"] = str(data_dir)
    settings["port"] = int(settings["port"])
    return settings


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    settings = resolve_serve_settings(args.config, args.port, args.data_dir)
    app = create_app(settings["data_dir"])
    uvicorn.run(app, host=args.host, port=settings["port"])
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "build": cmd_build,
    "query": cmd_query,
    "bench": cmd_bench,
    "recommend": cmd_recommend,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (SortsaxError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
