"""Robot placements and label draws used by the CLI and the sweeps."""

from __future__ import annotations

import random
import re

from .engine import RobotSpec
from .graph import PortGraph

PLACEMENTS = ("dispersed-random", "adjacent-pair", "same-node", "spread")

_ROBOT = re.compile(r"(\d+)@(\d+)")


def parse_robots(text: str) -> list[RobotSpec]:
    """``"3@0,5@2"`` -> robots labeled 3 and 5 on nodes 0 and 2."""
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        m = _ROBOT.fullmatch(item)
        if m is None:
            raise ValueError(f"bad robot entry {item!r}; expected label@node")
        out.append(RobotSpec(int(m.group(1)), int(m.group(2))))
    if not out:
        raise ValueError("no robots given")
    return out


def format_robots(robots) -> str:
    return ",".join(f"{r.label}@{r.home}" for r in sorted(robots, key=lambda r: r.label))


def draw_labels(k: int, n: int, b: int, rng: random.Random) -> list[int]:
    top = n**b
    if k > top:
        raise ValueError(f"cannot draw {k} distinct labels from [1, {top}]")
    return rng.sample(range(1, top + 1), k)


def place_nodes(g: PortGraph, k: int, kind: str, rng: random.Random) -> list[int]:
    if kind == "dispersed-random":
        if k > g.n:
            raise ValueError("a dispersed placement needs k <= n")
        return rng.sample(range(g.n), k)
    if kind == "adjacent-pair":
        if k != 2:
            raise ValueError("adjacent-pair places exactly two robots")
        edges = sorted(g.edges)
        return list(edges[rng.randrange(len(edges))])
    if kind == "same-node":
        return [rng.randrange(g.n)] * k
    if kind == "spread":
        if k > g.n:
            raise ValueError("a spread placement needs k <= n")
        dist = g.distances
        chosen = [0]
        while len(chosen) < k:
            best = max(
                (v for v in range(g.n) if v not in chosen),
                key=lambda v: (min(dist[v][c] for c in chosen), -v),
            )
            chosen.append(best)
        return chosen
    raise ValueError(f"unknown placement {kind!r}; choose from {PLACEMENTS}")


def generate_placement(g: PortGraph, k: int, kind: str, b: int, seed: int) -> list[RobotSpec]:
    rng = random.Random(f"placement:{kind}:{k}:{seed}")
    nodes = place_nodes(g, k, kind, rng)
    labels = draw_labels(k, g.n, b, rng)
    return [RobotSpec(lab, v) for lab, v in zip(labels, nodes)]
