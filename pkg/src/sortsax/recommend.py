"""Decision-tree recommendation of an index configuration with its rationale.

The tree lives in a human-editable JSON file (`recommender_tree.json` in the
package by default) so thresholds and wording can be tweaked without touching
code.  Traversal is deterministic; the returned rationale lists the text of
every branch actually taken, in order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import InvalidProfile

MODES = ("static", "streaming")
WINDOW_PROFILES = ("none", "short", "mixed", "long")


@dataclass(frozen=True)
class WorkloadProfile:
    """What the user expects to do with the data."""

    mode: str
    dataset_bytes: int
    memory_budget_bytes: int
    expected_query_count: int
    update_rate: float = 0.0
    window_profile: str = "none"

    def validate(self) -> None:
        if self.mode not in MODES:
            raise InvalidProfile(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.window_profile not in WINDOW_PROFILES:
            raise InvalidProfile(
                f"window_profile must be one of {WINDOW_PROFILES}, got {self.window_profile!r}"
            )
        if self.dataset_bytes <= 0 or self.memory_budget_bytes <= 0:
            raise InvalidProfile("sizes must be positive")
        if self.expected_query_count < 0 or self.update_rate < 0:
            raise InvalidProfile("counts and rates must be non-negative")
        if self.mode == "static" and self.update_rate != 0:
            raise InvalidProfile("static mode implies update_rate = 0")


@dataclass(frozen=True)
class Recommendation:
    index: str                 # "CTree" | "CLSM"
    materialized: bool
    strategy: str              # "PP" | "TP" | "BTP"
    rationale: tuple[str, ...]
    break_even_queries: int

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "materialized": self.materialized,
            "strategy": self.strategy,
            "rationale": list(self.rationale),
            "break_even_queries": self.break_even_queries,
        }


def load_tree(path: Path | None = None) -> dict:
    if path is not None:
        return json.loads(Path(path).read_text())
    data = resources.files("sortsax").joinpath("recommender_tree.json").read_text()
    return json.loads(data)


def break_even_queries(profile: WorkloadProfile, thresholds: dict) -> int:
    """Query count at which inlining series pays for its build/storage cost."""
    cost = profile.dataset_bytes * thresholds["materialize_cost_weight"]
    saving = thresholds["per_query_fetch_bytes"] * thresholds["random_io_penalty"]
    return max(int(thresholds.get("min_break_even_queries", 1)),
               math.ceil(cost / saving))


def recommend(profile: WorkloadProfile, tree_path: Path | None = None) -> Recommendation:
    """Walk the decision tree for this profile, collecting branch rationales."""
    profile.validate()
    tree = load_tree(tree_path)
    thresholds = tree["thresholds"]
    q_star = break_even_queries(profile, thresholds)
    rationale: list[str] = []
    node_id = tree["root"]
    for _ in range(64):  # defensive bound on tree depth
        node = tree["nodes"][node_id]
        kind = node["kind"]
        if kind == "leaf":
            rationale.append(tree["window_notes"][profile.window_profile])
            return Recommendation(
                index=node["index"],
                materialized=node["materialized"],
                strategy=node["strategy"],
                rationale=tuple(rationale),
                break_even_queries=q_star,
            )
        if kind == "choice":
            value = getattr(profile, node["field"])
            if value not in node["next"]:
                raise InvalidProfile(f"no branch for {node['field']}={value!r}")
            rationale.append(node["rationale"][value])
            node_id = node["next"][value]
        elif kind == "note":
            rationale.append(node["rationale"])
            node_id = node["next"]
        elif kind == "threshold":
            value = getattr(profile, node["field"])
            branch = "above" if value >= q_star else "below"
            rationale.append(
                node["rationale"][branch].format(value=value, threshold=q_star)
            )
            node_id = node["next"][branch]
        else:
            raise InvalidProfile(f"unknown node kind {kind!r} in tree")
    raise InvalidProfile("decision tree traversal did not terminate")


def reachable_leaves(tree_path: Path | None = None) -> set[str]:
    """Leaf node ids reachable from the root; used by coverage checks."""
    tree = load_tree(tree_path)
    seen: set[str] = set()
    leaves: set[str] = set()
    stack = [tree["root"]]
    while stack:
        node_id = stack.pop()
        if node_id in seen:
            continue
        seen.add(node_id)
        node = tree["nodes"][node_id]
        if node["kind"] == "leaf":
            leaves.add(node_id)
        elif node["kind"] == "note":
            stack.append(node["next"])
        else:
            stack.extend(node["next"].values())
    return leaves
