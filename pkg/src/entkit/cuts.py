"""Bipartitions of an N-party system."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Bipartition:
    """A cut of parties {0..N-1} into two non-empty groups.

    Canonical form keeps party 0 on side A, so each cut is enumerated once.
    """

    side_a: tuple[int, ...]
    side_b: tuple[int, ...]

    def __post_init__(self):
        a = tuple(sorted(int(i) for i in self.side_a))
        b = tuple(sorted(int(i) for i in self.side_b))
        object.__setattr__(self, "side_a", a)
        object.__setattr__(self, "side_b", b)
        if not a or not b:
            raise ValueError("both sides of a cut must be non-empty")
        if set(a) & set(b):
            raise ValueError(f"cut sides overlap: {a} | {b}")
        if 0 not in a:
            raise ValueError("canonical cuts keep party 0 on side A")

    @property
    def n_parties(self) -> int:
        return len(self.side_a) + len(self.side_b)

    @property
    def label(self) -> str:
        return "".join(str(i) for i in self.side_a) + "|" + "".join(str(i) for i in self.side_b)

    @classmethod
    def from_side_a(cls, side_a, n: int) -> "Bipartition":
        a = set(int(i) for i in side_a)
        if not a <= set(range(n)):
            raise ValueError(f"side {sorted(a)} out of range for {n} parties")
        b = tuple(i for i in range(n) if i not in a)
        if 0 not in a:
            # normalize to the canonical representative of the same cut
            return cls(b, tuple(sorted(a)))
        return cls(tuple(sorted(a)), b)

    @classmethod
    def parse(cls, text: str, n: int) -> "Bipartition":
        """Parse forms like "0|12", "0|1,2" or "0:12"."""
        for sep in ("|", ":"):
            if sep in text:
                left, right = text.split(sep, 1)
                break
        else:
            raise ValueError(f"cut {text!r} needs a '|' or ':' separator")

        def side(s: str) -> list[int]:
            s = s.strip()
            if "," in s:
                return [int(tok) for tok in s.split(",") if tok.strip()]
            return [int(ch) for ch in s if not ch.isspace()]

        a, b = side(left), side(right)
        if sorted(a + b) != list(range(n)):
            raise ValueError(f"cut {text!r} does not partition parties 0..{n - 1}")
        return cls.from_side_a(a, n)


def enumerate_cuts(n: int) -> list[Bipartition]:
    """All 2^(n-1) - 1 canonical bipartitions of n parties."""
    n = int(n)
    if n < 2:
        raise ValueError("need at least 2 parties")
    cuts = []
    for mask in range(2 ** (n - 1)):
        side_a = (0,) + tuple(i for i in range(1, n) if mask & (1 << (i - 1)))
        if len(side_a) == n:
            continue
        cuts.append(Bipartition.from_side_a(side_a, n))
    return cuts
