"""Plain-text instance and solution files.

An instance file holds one problem line `p sfast <n> <k>`, one terminal line
`s <v> ...` (possibly listing nothing), and one arc line `a <u> <v>` for each
ordered pair, together describing a full tournament on vertices 0..n-1.
Comment lines starting with `c` and blank lines are ignored anywhere. A
solution file lists arcs to reverse, one `r <u> <v>` line each.
"""

from __future__ import annotations

from typing import Iterable

from .graphs import Arc, Instance, Tournament

__all__ = [
    "InstanceFormatError",
    "parse_instance",
    "parse_solution",
    "serialize_instance",
    "serialize_solution",
]


class InstanceFormatError(ValueError):
    """Raised with a 1-based line number when a file cannot be parsed."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _tokens(text: str):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        yield number, line.split()


def _ints(number: int, fields: list[str]) -> list[int]:
    try:
        return [int(f) for f in fields]
    except ValueError:
        raise InstanceFormatError(number, f"expected integers, got {' '.join(fields)}") from None


def parse_instance(text: str) -> Instance:
    n = k = None
    terminals: frozenset[int] | None = None
    pairs: dict[tuple[int, int], Arc] = {}
    last = 0
    for number, fields in _tokens(text):
        last = number
        kind = fields[0]
        if kind == "p":
            if n is not None:
                raise InstanceFormatError(number, "second problem line")
            if len(fields) != 4 or fields[1] != "sfast":
                raise InstanceFormatError(number, "problem line must read `p sfast <n> <k>`")
            n, k = _ints(number, fields[2:])
            if n < 0:
                raise InstanceFormatError(number, "negative vertex count")
        elif kind == "s":
            if n is None:
                raise InstanceFormatError(number, "terminal line before the problem line")
            if terminals is not None:
                raise InstanceFormatError(number, "second terminal line")
            listed = _ints(number, fields[1:])
            for v in listed:
                if not 0 <= v < n:
                    raise InstanceFormatError(number, f"terminal {v} out of range")
            if len(set(listed)) != len(listed):
                raise InstanceFormatError(number, "terminal listed twice")
            terminals = frozenset(listed)
        elif kind == "a":
            if n is None:
                raise InstanceFormatError(number, "arc line before the problem line")
            if len(fields) != 3:
                raise InstanceFormatError(number, "arc line must read `a <u> <v>`")
            u, v = _ints(number, fields[1:])
            if not (0 <= u < n and 0 <= v < n) or u == v:
                raise InstanceFormatError(number, f"bad arc ({u}, {v})")
            key = (min(u, v), max(u, v))
            if key in pairs:
                raise InstanceFormatError(number, f"pair {{{u}, {v}}} oriented twice")
            pairs[key] = (u, v)
        else:
            raise InstanceFormatError(number, f"unknown line type {kind!r}")
    if n is None:
        raise InstanceFormatError(last + 1, "missing problem line")
    if terminals is None:
        raise InstanceFormatError(last + 1, "missing terminal line")
    if len(pairs) != n * (n - 1) // 2:
        raise InstanceFormatError(
            last + 1, f"{len(pairs)} arcs given, a tournament on {n} vertices has {n * (n - 1) // 2}"
        )
    return Instance(Tournament.from_arcs(n, pairs.values()), terminals, k)


def serialize_instance(instance: Instance) -> str:
    lines = [f"p sfast {instance.n} {instance.k}"]
    lines.append(" ".join(["s", *map(str, sorted(instance.terminals))]).rstrip())
    lines.extend(f"a {u} {v}" for u, v in instance.tournament.arcs())
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> frozenset[Arc]:
    arcs: set[Arc] = set()
    for number, fields in _tokens(text):
        if fields[0] != "r" or len(fields) != 3:
            raise InstanceFormatError(number, "solution lines must read `r <u> <v>`")
        u, v = _ints(number, fields[1:])
        if (u, v) in arcs:
            raise InstanceFormatError(number, f"arc ({u}, {v}) listed twice")
        arcs.add((u, v))
    return frozenset(arcs)


def serialize_solution(arcs: Iterable[Arc]) -> str:
    return "".join(f"r {u} {v}\n" for u, v in sorted(arcs))
