# fractal/tree.py

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, List, Sequence, Tuple

from utils.errors import DepthExceeded

Address = Tuple[int, ...]
ROOT: Address = ()


def parent(w: Address) -> Address:
    """Drop the last digit; the root is its own parent."""
    return w[:-1]


def confluence(w: Address, v: Address) -> Address:
    """Longest common prefix of two addresses."""
    n = 0
    for a, b in zip(w, v):
        if a != b:
            break
        n += 1
    return w[:n]


def prefix(w: Address, m: int) -> Address:
    return w[:m]


def ancestors(w: Address) -> List[Address]:
    """All prefixes of w, root first, w last."""
    return [w[:m] for m in range(len(w) + 1)]


def format_address(w: Address) -> str:
    return ".".join(str(d) for d in w)


def parse_address(text: str) -> Address:
    text = text.strip()
    if not text or text in ("root", "-"):
        return ROOT
    return tuple(int(d) for d in text.split("."))


@dataclass(frozen=True)
class TreeShape:
    """A locally finite rooted tree truncated at max_depth.

    alphabet(w) returns the digits of the children of w, in increasing order.
    """
    alphabet: Callable[[Address], Sequence[int]]
    max_depth: int

    def __post_init__(self):
        if self.max_depth < 0:
            raise ValueError("max_depth must be nonnegative")

    def branching(self, w: Address) -> int:
        return len(self.alphabet(w))

    def children(self, w: Address) -> List[Address]:
        if len(w) >= self.max_depth:
            raise DepthExceeded(f"address {format_address(w) or 'root'} is at max_depth {self.max_depth}")
        return [w + (i,) for i in self.alphabet(w)]

    def is_valid(self, w: Address) -> bool:
        if len(w) > self.max_depth:
            return False
        for m, digit in enumerate(w):
            if digit not in self.alphabet(w[:m]):
                return False
        return True

    def level(self, m: int) -> Iterator[Address]:
        """(T)_m in lexicographic order."""
        if m > self.max_depth:
            raise DepthExceeded(f"level {m} beyond max_depth {self.max_depth}")
        frontier = [ROOT]
        for _ in range(m):
            frontier = [c for w in frontier for c in self.children(w)]
        yield from frontier

    def descendants(self, w: Address, k: int) -> List[Address]:
        """S^k(w)."""
        if len(w) + k > self.max_depth:
            raise DepthExceeded(f"S^{k} of a depth-{len(w)} address exceeds max_depth {self.max_depth}")
        frontier = [w]
        for _ in range(k):
            frontier = [c for u in frontier for c in self.children(u)]
        return frontier


def end_metric(omega: Address, tau: Address) -> Fraction:
    """2^{-|omega ^ tau|} on truncated end prefixes; 0 when they agree."""
    if omega == tau:
        return Fraction(0)
    return Fraction(1, 2 ** len(confluence(omega, tau)))


def end_prefixes(shape: TreeShape) -> Iterator[Address]:
    return shape.level(shape.max_depth)
