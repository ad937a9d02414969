"""REST service exposing datasets, index builds, ingestion, queries, traces,
and the recommender.

Single-process demo server: engines live in an in-memory registry keyed by
handle id, their files under one data directory.  Builds run in background
threads with status polling (`building` -> `ready` | `error`); writes to one
index serialize on a per-index lock while queries read engine snapshots.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Literal

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

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
from .errors import (
    EmptyIndex,
    EmptyWindowResult,
    LengthMismatch,
    OutOfOrderTimestamp,
    SortsaxError,
    UnknownQueryId,
)
from .instrument import Recorder
from .recommend import WorkloadProfile, recommend
from .series import DataSeries, random_walk_generate, read_binary_dataset, \
    write_binary_dataset
from .windows import TemporalPartitions, btp_search, normalize_window, tp_search


# -- wire schemas ---------------------------------------------------------------

class DatasetCreate(BaseModel):
    source: Literal["generated", "uploaded"]
    length: int = Field(default=DEFAULT_LENGTH, gt=0)
    count: int = Field(default=0, ge=0)
    seed: int = 0
    series: list[list[float]] | None = None
    name: str | None = None


class IndexCreate(BaseModel):
    dataset_id: str | None = None
    kind: Literal["ctree", "clsm"]
    strategy: Literal["PP", "TP", "BTP"] = "PP"
    w: int = DEFAULT_SEGMENTS
    b: int = DEFAULT_BITS
    materialized: bool = False
    page_size: int = DEFAULT_PAGE_SIZE
    fill_factor: float = Field(default=DEFAULT_FILL_FACTOR, gt=0, le=1)
    growth_factor: int = Field(default=DEFAULT_GROWTH_FACTOR, ge=2)
    memory_budget_bytes: int = Field(default=64 << 20, gt=0)
    buffer_bytes: int = Field(default=4 << 20, gt=0)


class SeriesIn(BaseModel):
    values: list[float]
    id: int | None = None
    timestamp: int | None = None


class IngestRequest(BaseModel):
    series: list[SeriesIn]


class WindowIn(BaseModel):
    start: int
    end: int


class QueryRequest(BaseModel):
    values: list[float]
    mode: Literal["approximate", "exact"] = "exact"
    window: WindowIn | None = None


class RecommendRequest(BaseModel):
    mode: Literal["static", "streaming"]
    dataset_bytes: int
    memory_budget_bytes: int
    expected_query_count: int
    update_rate: float = 0.0
    window_profile: Literal["none", "short", "mixed", "long"] = "none"


# -- registry -----------------------------------------------------------------------

@dataclass
class DatasetRecord:
    id: str
    path: Path
    length: int
    count: int
    source: str
    name: str | None = None

    def handle(self) -> dict:
        return {
            "id": self.id, "source": self.source, "length": self.length,
            "count": self.count, "name": self.name, "status": "ready",
        }


@dataclass
class IndexRecord:
    id: str
    spec: IndexCreate
    config: IndexConfig
    status: str = "building"
    engine: object | None = None
    error: str | None = None
    build_seconds: float = 0.0
    next_id: int = 0
    next_ts: int = 0
    recorder: Recorder = dc_field(default_factory=Recorder)
    lock: threading.Lock = dc_field(default_factory=threading.Lock)

    def handle(self) -> dict:
        return {
            "id": self.id,
            "status": self.status,
            "kind": self.spec.kind,
            "strategy": self.spec.strategy,
            "dataset_id": self.spec.dataset_id,
            "config": self.config.to_json(),
            "fill_factor": self.spec.fill_factor,
            "growth_factor": self.spec.growth_factor,
            "memory_budget_bytes": self.spec.memory_budget_bytes,
            "buffer_bytes": self.spec.buffer_bytes,
            "error": self.error,
        }


class Registry:
    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.datasets: dict[str, DatasetRecord] = {}
        self.indexes: dict[str, IndexRecord] = {}
        self._lock = threading.Lock()
        self._counter = 0

    def new_id(self, prefix: str) -> str:
        with self._lock:
            self._counter += 1
            return f"{prefix}-{self._counter:04d}"

    def dataset(self, dataset_id: str) -> DatasetRecord:
        try:
            return self.datasets[dataset_id]
        except KeyError:
            raise HTTPException(404, f"unknown dataset {dataset_id}") from None

    def index(self, index_id: str) -> IndexRecord:
        try:
            return self.indexes[index_id]
        except KeyError:
            raise HTTPException(404, f"unknown index {index_id}") from None


# -- app -----------------------------------------------------------------------------

def create_app(data_dir: Path | str = "sortsax-data") -> FastAPI:
    app = FastAPI(title="sortsax", version="0.1.0")
    # the browser client is served from any static host; demo scope, no auth
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    registry = Registry(Path(data_dir))
    app.state.registry = registry

    @app.exception_handler(RequestValidationError)
    async def validation_to_400(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.exception_handler(SortsaxError)
    async def engine_error_to_400(request: Request, exc: SortsaxError):
        return JSONResponse(
            status_code=400,
            content={"detail": f"{type(exc).__name__}: {exc}"},
        )

    # -- datasets ----------------------------------------------------------------

    @app.post("/datasets", status_code=201)
    def create_dataset(req: DatasetCreate):
        ds_id = registry.new_id("ds")
        ds_dir = registry.data_dir / "datasets" / ds_id
        ds_dir.mkdir(parents=True, exist_ok=True)
        path = ds_dir / "data.bin"
        if req.source == "generated":
            if req.count <= 0:
                raise HTTPException(400, "generated datasets need count > 0")
            count = write_binary_dataset(
                path, random_walk_generate(req.count, req.length, req.seed)
            )
        else:
            if not req.series:
                raise HTTPException(400, "uploaded datasets need inline series")
            if any(len(v) != req.length for v in req.series):
                raise HTTPException(400, "every series must have the declared length")
            count = write_binary_dataset(
                path,
                (DataSeries(id=i, values=np.array(v, dtype=np.float64), timestamp=i)
                 for i, v in enumerate(req.series)),
            )
        rec = DatasetRecord(id=ds_id, path=path, length=req.length, count=count,
                            source=req.source, name=req.name)
        registry.datasets[ds_id] = rec
        return rec.handle()

    @app.post("/datasets/binary", status_code=201)
    async def upload_binary_dataset(request: Request, length: int, name: str | None = None):
        body = await request.body()
        record = 4 * length
        if length <= 0 or not body or len(body) % record:
            raise HTTPException(400, "body must be whole little-endian float32 records")
        ds_id = registry.new_id("ds")
        ds_dir = registry.data_dir / "datasets" / ds_id
        ds_dir.mkdir(parents=True, exist_ok=True)
        path = ds_dir / "data.bin"
        path.write_bytes(body)
        rec = DatasetRecord(id=ds_id, path=path, length=length,
                            count=len(body) // record, source="uploaded", name=name)
        registry.datasets[ds_id] = rec
        return rec.handle()

    @app.get("/datasets/{dataset_id}")
    def get_dataset(dataset_id: str):
        return registry.dataset(dataset_id).handle()

    @app.get("/datasets")
    def list_datasets():
        return [d.handle() for d in registry.datasets.values()]

    # -- indexes ------------------------------------------------------------------------

    def _build_engine(rec: IndexRecord) -> None:
        spec = rec.spec
        ix_dir = registry.data_dir / "indexes" / rec.id
        started = time.monotonic()
        try:
            series = iter(())
            if spec.dataset_id is not None:
                ds = registry.datasets[spec.dataset_id]
                series = read_binary_dataset(ds.path, ds.length)
            if spec.kind == "ctree":
                from .storage import MemoryBudget

                engine = CTree.build(
                    ix_dir, series, rec.config, fill_factor=spec.fill_factor,
                    budget=MemoryBudget(bytes=spec.memory_budget_bytes),
                    recorder=rec.recorder,
                )
                rec.next_id = engine.entry_count
                rec.next_ts = engine.entry_count
            else:
                if spec.strategy == "TP":
                    engine = TemporalPartitions(
                        ix_dir, rec.config, buffer_bytes=spec.buffer_bytes,
                        recorder=rec.recorder, create=True,
                    )
                else:
                    engine = CLSM(
                        ix_dir, rec.config, buffer_bytes=spec.buffer_bytes,
                        growth_factor=spec.growth_factor, recorder=rec.recorder,
                        create=True, ordered_timestamps=(spec.strategy == "BTP"),
                    )
                count = 0
                for s in series:
                    engine.insert_series(s)
                    count += 1
                rec.next_id = count
                rec.next_ts = count
            rec.engine = engine
            rec.build_seconds = time.monotonic() - started
            rec.status = "ready"
        except Exception as exc:  # surfaced via the handle's status
            rec.error = f"{type(exc).__name__}: {exc}"
            rec.status = "error"

    @app.post("/indexes", status_code=201)
    def create_index(req: IndexCreate):
        if req.dataset_id is not None:
            ds = registry.dataset(req.dataset_id)
            n = ds.length
        else:
            if req.kind == "ctree":
                raise HTTPException(400, "ctree needs a dataset to bulk load")
            n = DEFAULT_LENGTH
        if req.kind == "ctree" and req.strategy != "PP":
            raise HTTPException(400, "ctree supports only the PP strategy")
        if n % req.w:
            raise HTTPException(400, f"segment count {req.w} must divide length {n}")
        config = IndexConfig(n=n, w=req.w, b=req.b, page_size=req.page_size,
                             materialized=req.materialized)
        rec = IndexRecord(id=registry.new_id("ix"), spec=req, config=config)
        registry.indexes[rec.id] = rec
        threading.Thread(target=_build_engine, args=(rec,), daemon=True).start()
        return rec.handle()

    @app.get("/indexes/{index_id}")
    def get_index(index_id: str):
        return registry.index(index_id).handle()

    @app.get("/indexes")
    def list_indexes():
        return [r.handle() for r in registry.indexes.values()]

    @app.get("/indexes/{index_id}/stats")
    def index_stats(index_id: str):
        rec = registry.index(index_id)
        if rec.status != "ready":
            raise HTTPException(409, f"index is {rec.status}")
        engine = rec.engine
        return {
            "id": rec.id,
            "build_seconds": rec.build_seconds,
            "entry_count": engine.entry_count,
            "size_bytes": engine.size_bytes,
            "counters": rec.recorder.snapshot().as_dict(),
        }

    @app.post("/indexes/{index_id}/ingest")
    def ingest(index_id: str, req: IngestRequest):
        rec = registry.index(index_id)
        if rec.status == "building":
            raise HTTPException(409, "index is still building")
        if rec.status == "error":
            raise HTTPException(409, f"index failed to build: {rec.error}")
        accepted = 0
        with rec.lock:
            rec.status = "ingesting"
            try:
                for item in req.series:
                    sid = item.id if item.id is not None else rec.next_id
                    ts = item.timestamp if item.timestamp is not None else rec.next_ts
                    series = DataSeries(
                        id=sid, values=np.array(item.values, dtype=np.float64),
                        timestamp=ts,
                    )
                    if len(series) != rec.config.n:
                        raise LengthMismatch(
                            f"series length {len(series)} != {rec.config.n}"
                        )
                    rec.engine.insert_series(series)
                    rec.next_id = max(rec.next_id, sid + 1)
                    rec.next_ts = max(rec.next_ts, ts + 1)
                    accepted += 1
            except (LengthMismatch, OutOfOrderTimestamp) as exc:
                raise HTTPException(400, str(exc)) from None
            finally:
                rec.status = "ready"
        return {"accepted": accepted}

    @app.post("/indexes/{index_id}/query")
    def query(index_id: str, req: QueryRequest):
        rec = registry.index(index_id)
        if rec.status == "building":
            raise HTTPException(409, "index is still building")
        if rec.status == "error":
            raise HTTPException(409, f"index failed to build: {rec.error}")
        engine = rec.engine
        if engine.entry_count == 0:
            raise HTTPException(409, "index holds no entries yet")
        series = DataSeries(id=0, values=np.array(req.values, dtype=np.float64))
        window = None if req.window is None else (req.window.start, req.window.end)
        if window is not None:
            window = normalize_window(window)
        try:
            if window is not None and rec.spec.strategy == "TP":
                result = tp_search(engine, series, window, mode=req.mode)
            elif window is not None and rec.spec.strategy == "BTP":
                result = btp_search(engine, series, window, mode=req.mode)
            elif req.mode == "exact":
                result = engine.exact_search(series, window=window)
            else:
                result = engine.approximate_search(series, window=window)
        except EmptyWindowResult:
            return {"found": False, "window": req.window.model_dump() if req.window else None}
        except EmptyIndex:
            raise HTTPException(409, "index holds no entries yet") from None
        except LengthMismatch as exc:
            raise HTTPException(400, str(exc)) from None
        payload = result.as_dict()
        payload["found"] = True
        payload["trace_id"] = f"{rec.id}:{result.trace_id}"
        return payload

    # -- traces and recommender -------------------------------------------------------

    @app.get("/traces/{trace_id}")
    def get_trace(trace_id: str):
        if ":" not in trace_id:
            raise HTTPException(404, "trace ids look like <index-id>:<query-id>")
        index_id, query_id = trace_id.split(":", 1)
        rec = registry.index(index_id)
        try:
            trace = rec.recorder.trace(query_id)
        except UnknownQueryId:
            raise HTTPException(404, f"unknown trace {trace_id}") from None
        return {
            "trace_id": trace_id,
            "query_id": trace.query_id,
            "events": [
                {"file": e.file, "page": e.page, "kind": e.kind}
                for e in trace.events
            ],
        }

    @app.post("/recommend")
    def recommend_route(req: RecommendRequest):
        profile = WorkloadProfile(
            mode=req.mode,
            dataset_bytes=req.dataset_bytes,
            memory_budget_bytes=req.memory_budget_bytes,
            expected_query_count=req.expected_query_count,
            update_rate=req.update_rate,
            window_profile=req.window_profile,
        )
        return recommend(profile).as_dict()

    return app
