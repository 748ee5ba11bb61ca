"""Run traces: per-round robot records, queries, and the line-oriented export."""

from __future__ import annotations

import hashlib
import json
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Any, NamedTuple

from . import __version__

EVENTS = ("MEET", "MERGE", "STATE_CHANGE", "TERMINATE", "PHASE_BOUNDARY")


class Row(NamedTuple):
    """One executed round; tuples are indexed like ``Trace.labels``."""

    round: int
    positions: tuple[int, ...]
    actions: tuple[str, ...]
    modes: tuple[str, ...]
    gids: tuple[int, ...]
    events: tuple[tuple[str, ...], ...]


class Skip(NamedTuple):
    """Rounds ``start .. end-1`` in which every live robot stayed put silently."""

    start: int
    end: int
    positions: tuple[int, ...]
    modes: tuple[str, ...]
    gids: tuple[int, ...]


@dataclass
class Trace:
    labels: tuple[int, ...]
    initial: tuple[int, ...]
    rows: list = field(default_factory=list)
    complete: bool = True
    termination_round: dict[int, int] = field(default_factory=dict)
    move_counts: dict[int, int] = field(default_factory=dict)
    final_positions: tuple[int, ...] = ()
    last_round: int = -1
    message_bits: int = 0
    agents: list = field(default_factory=list, repr=False, compare=False)
    meta: dict[str, Any] = field(default_factory=dict)

    # -- queries -------------------------------------------------------------

    @property
    def num_rounds(self) -> int:
        return self.last_round + 1

    @property
    def k(self) -> int:
        return len(self.labels)

    def _starts(self) -> list[int]:
        cache = self.__dict__.get("_start_cache")
        if cache is None or cache[0] != len(self.rows):
            starts = [r.start if isinstance(r, Skip) else r.round for r in self.rows]
            cache = (len(self.rows), starts)
            self.__dict__["_start_cache"] = cache
        return cache[1]

    def row_at(self, rnd: int):
        """The row covering round ``rnd``, or None if it was not recorded."""
        starts = self._starts()
        i = bisect_right(starts, rnd) - 1
        if i < 0:
            return None
        row = self.rows[i]
        if isinstance(row, Skip):
            return row if rnd < row.end else None
        return row if row.round == rnd else None

    def positions_at(self, rnd: int) -> tuple[int, ...]:
        """Positions at the end of round ``rnd`` (``-1`` gives the start)."""
        if rnd < 0:
            return self.initial
        if rnd > self.last_round:
            return self.final_positions
        row = self.row_at(rnd)
        if row is None:
            raise LookupError(f"round {rnd} was not recorded in this trace")
        return row.positions

    def positions_before(self, rnd: int) -> tuple[int, ...]:
        """Positions robots observe in the communication step of round ``rnd``."""
        return self.positions_at(rnd - 1)

    def event_rounds(self, name: str) -> list[int]:
        out = []
        for row in self.rows:
            if isinstance(row, Row) and any(name in ev for ev in row.events):
                out.append(row.round)
        return out

    def events_of(self, label: int) -> list[tuple[int, str]]:
        i = self.labels.index(label)
        return [
            (row.round, ev)
            for row in self.rows
            if isinstance(row, Row)
            for ev in row.events[i]
        ]

    @property
    def gathering_round(self) -> int | None:
        """Round in which the last robot terminated, if all terminated co-located."""
        if len(self.termination_round) != self.k:
            return None
        if len(set(self.final_positions)) != 1:
            return None
        return max(self.termination_round.values())

    # -- export --------------------------------------------------------------

    def records(self):
        """Yield ``(round, label, node, mode, group_id, action, events)`` tuples,
        one per live robot per round, in round then label order."""
        if not self.complete:
            raise ValueError("trace was recorded in summary mode; no per-round export")
        end = {lab: self.termination_round.get(lab, self.last_round) for lab in self.labels}
        labels = self.labels
        for row in self.rows:
            if isinstance(row, Skip):
                for rnd in range(row.start, row.end):
                    for i, lab in enumerate(labels):
                        if rnd <= end[lab]:
                            yield (rnd, lab, row.positions[i], row.modes[i], row.gids[i], "stay", ())
            else:
                rnd = row.round
                for i, lab in enumerate(labels):
                    if rnd <= end[lab]:
                        yield (
                            rnd,
                            lab,
                            row.positions[i],
                            row.modes[i],
                            row.gids[i],
                            row.actions[i],
                            row.events[i],
                        )

    def header(self, manifest: dict | None = None) -> dict:
        return {
            "format": "robogather-trace",
            "version": __version__,
            "manifest": manifest if manifest is not None else self.meta.get("manifest"),
            "labels": list(self.labels),
            "initial": list(self.initial),
        }

    def lines(self, manifest: dict | None = None):
        """Export lines: a header, then one record per robot per round.  A
        summary trace writes its kept rows and idle spans instead."""
        header = self.header(manifest)
        header["record"] = "full" if self.complete else "summary"
        yield json.dumps(header, separators=(",", ":"))
        if not self.complete:
            yield from self._summary_lines()
            return
        for rnd, lab, node, mode, gid, action, events in self.records():
            yield (
                f'{{"round":{rnd},"label":{lab},"node":{node},"mode":"{mode}",'
                f'"group_id":{gid},"action":"{action}","events":{json.dumps(list(events))}}}'
            )

    def _summary_lines(self):
        for row in self.rows:
            if isinstance(row, Skip):
                yield json.dumps(
                    {"skip": [row.start, row.end], "nodes": list(row.positions)},
                    separators=(",", ":"),
                )
            else:
                yield json.dumps(
                    {
                        "round": row.round,
                        "nodes": list(row.positions),
                        "modes": list(row.modes),
                        "group_ids": list(row.gids),
                        "actions": list(row.actions),
                        "events": [list(e) for e in row.events],
                    },
                    separators=(",", ":"),
                )
        yield json.dumps(
            {
                "last_round": self.last_round,
                "final": list(self.final_positions),
                "terminated": {str(k): v for k, v in sorted(self.termination_round.items())},
                "moves": {str(k): v for k, v in sorted(self.move_counts.items())},
            },
            separators=(",", ":"),
        )

    def write(self, path, manifest: dict | None = None) -> None:
        with open(path, "w") as fh:
            for line in self.lines(manifest):
                fh.write(line + "\n")

    def digest(self) -> str:
        """SHA-256 of the compact row representation; works in both record modes."""
        h = hashlib.sha256()
        h.update(repr((self.labels, self.initial, self.last_round)).encode())
        for row in self.rows:
            h.update(repr(tuple(row)).encode())
        h.update(repr(sorted(self.termination_round.items())).encode())
        return h.hexdigest()


def read_trace(lines) -> Trace:
    """Rebuild a complete trace from exported lines (header first)."""
    it = iter(lines)
    header = json.loads(next(it))
    if header.get("record", "full") != "full":
        raise ValueError("only full traces can be read back")
    labels = tuple(header["labels"])
    index = {lab: i for i, lab in enumerate(labels)}
    trace = Trace(labels=labels, initial=tuple(header["initial"]))
    trace.meta["manifest"] = header.get("manifest")
    per_round: dict[int, dict[int, dict]] = {}
    for line in it:
        if not line.strip():
            continue
        rec = json.loads(line)
        per_round.setdefault(rec["round"], {})[rec["label"]] = rec
    positions = list(trace.initial)
    modes = ["?"] * len(labels)
    gids = [0] * len(labels)
    for rnd in sorted(per_round):
        recs = per_round[rnd]
        actions = ["stay"] * len(labels)
        events = [()] * len(labels)
        for lab, rec in recs.items():
            i = index[lab]
            positions[i] = rec["node"]
            modes[i] = rec["mode"]
            gids[i] = rec["group_id"]
            actions[i] = rec["action"]
            events[i] = tuple(rec["events"])
            if rec["action"] == "terminate":
                trace.termination_round[lab] = rnd
            elif rec["action"].startswith("move"):
                trace.move_counts[lab] = trace.move_counts.get(lab, 0) + 1
        trace.rows.append(
            Row(rnd, tuple(positions), tuple(actions), tuple(modes), tuple(gids), tuple(events))
        )
        trace.last_round = rnd
    for lab in labels:
        trace.move_counts.setdefault(lab, 0)
    trace.final_positions = tuple(positions)
    return trace


def colocated_groups(trace: Trace, rnd: int) -> dict[int, tuple[int, ...]]:
    """Robots grouped by node at the end of round ``rnd``: ``{node: labels}``."""
    groups: dict[int, list[int]] = {}
    for lab, node in zip(trace.labels, trace.positions_at(rnd)):
        groups.setdefault(node, []).append(lab)
    return {node: tuple(sorted(labs)) for node, labs in sorted(groups.items())}
