"""Two-level covers: SOP memorizers, cube merging, don't-care expansion.

A cube is a string over ``0``/``1``/``-`` (one character per variable, ``-``
meaning don't-care), which doubles as the PLA text form.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from nn2logic.aig import AigGraph


def _as_row(row) -> str:
    if isinstance(row, str):
        return row
    return "".join(str(int(b)) for b in row)


def cube_covers(cube: str, row: str) -> bool:
    return all(c == "-" or c == r for c, r in zip(cube, row))


@dataclass
class SopCover:
    n_vars: int
    cubes: set[str] = field(default_factory=set)

    def __post_init__(self) -> None:
        for cube in self.cubes:
            if len(cube) != self.n_vars or any(c not in "01-" for c in cube):
                raise ValueError(f"bad cube {cube!r} for {self.n_vars} variables")


def sop_from_samples(positive_rows, n_vars: int | None = None) -> SopCover:
    """Pure memorization: one full-width cube per distinct positive row."""
    rows = [_as_row(r) for r in positive_rows]
    if n_vars is None:
        if not rows:
            raise ValueError("cannot infer variable count from an empty onset")
        n_vars = len(rows[0])
    return SopCover(n_vars, set(rows))


def eval_sop(cover: SopCover, row) -> int:
    row = _as_row(row)
    return int(any(cube_covers(c, row) for c in cover.cubes))


def merge_adjacent(cover: SopCover) -> SopCover:
    """Repeatedly merge cube pairs differing in exactly one specified variable.

    Replacing such a pair with the merged cube is exact, so the covered
    function never changes; iterates to a fixed point.
    """
    cubes = set(cover.cubes)
    changed = True
    while changed:
        changed = False
        ordered = sorted(cubes)
        for i, a in enumerate(ordered):
            for b in ordered[i + 1 :]:
                pos = -1
                ok = True
                for k, (ca, cb) in enumerate(zip(a, b)):
                    if ca == cb:
                        continue
                    if ca == "-" or cb == "-" or pos >= 0:
                        ok = False
                        break
                    pos = k
                if ok and pos >= 0:
                    cubes.discard(a)
                    cubes.discard(b)
                    cubes.add(a[:pos] + "-" + a[pos + 1 :])
                    changed = True
                    break
            if changed:
                break
    return SopCover(cover.n_vars, cubes)


def dontcare_expand(cover: SopCover, offset_rows, seed: int = 0) -> SopCover:
    """Drop cube variables, in seeded random order, that no offset row blocks."""
    rng = random.Random(seed)
    offset = [_as_row(r) for r in offset_rows]
    expanded = set()
    for cube in sorted(cover.cubes):
        positions = [k for k, c in enumerate(cube) if c != "-"]
        rng.shuffle(positions)
        current = cube
        for k in positions:
            candidate = current[:k] + "-" + current[k + 1 :]
            if not any(cube_covers(candidate, row) for row in offset):
                current = candidate
        expanded.add(current)
    return SopCover(cover.n_vars, expanded)


def build_c1c2(features, labels, expand: bool, rng: random.Random) -> tuple[SopCover, SopCover]:
    """Onset cover C1 and offset cover C2, optionally don't-care expanded
    against the rows of the opposite class."""
    rows = [_as_row(r) for r in features]
    if not rows:
        raise ValueError("empty training set")
    n = len(rows[0])
    positives = [r for r, y in zip(rows, labels) if y]
    negatives = [r for r, y in zip(rows, labels) if not y]
    c1 = SopCover(n, set(positives))
    c2 = SopCover(n, set(negatives))
    if expand:
        c1 = dontcare_expand(c1, negatives, seed=rng.randrange(2**30))
        c2 = dontcare_expand(c2, positives, seed=rng.randrange(2**30))
    return c1, c2


def classify_with_covers(c1: SopCover, c2: SopCover, row, rng: random.Random) -> int:
    row = _as_row(row)
    hit1 = eval_sop(c1, row)
    hit2 = eval_sop(c2, row)
    if hit1 and not hit2:
        return 1
    if hit2 and not hit1:
        return 0
    return rng.randrange(2)


def c1c2_classify(features, labels, expand: bool, test_row, seed: int = 0) -> int:
    """Two-memorizer vote: onset cover says 1, offset cover says 0, else coin."""
    rng = random.Random(seed)
    c1, c2 = build_c1c2(features, labels, expand, rng)
    return classify_with_covers(c1, c2, test_row, rng)


def sop_to_aig(cover: SopCover, input_names: list[str] | None = None) -> AigGraph:
    """AND tree per cube, OR of cubes in AND/NOT form."""
    g = AigGraph()
    lits = [
        g.add_input(input_names[k] if input_names else f"v{k}")
        for k in range(cover.n_vars)
    ]
    acc = 0
    for cube in sorted(cover.cubes):
        term = 1
        for k, c in enumerate(cube):
            if c == "1":
                term = g.and2(term, lits[k])
            elif c == "0":
                term = g.and2(term, lits[k] ^ 1)
        acc = g.or2(acc, term)
    g.add_output(acc, "f")
    return g


def to_pla(cover: SopCover) -> str:
    return "\n".join(sorted(cover.cubes)) + "\n"


def from_pla(text: str, n_vars: int | None = None) -> SopCover:
    cubes = {ln.strip() for ln in text.splitlines() if ln.strip()}
    if n_vars is None:
        if not cubes:
            raise ValueError("cannot infer variable count from an empty dump")
        n_vars = len(next(iter(cubes)))
    return SopCover(n_vars, cubes)
