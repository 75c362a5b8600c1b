"""Words, substitutions, prefix-suffix machinery and gamma-weighted sums.

Letters are single characters; words are plain ``str``.  A substitution maps
each letter to a nonempty word.
"""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np


class DesubstitutionError(ValueError):
    """The window does not determine its prefix-suffix decomposition."""

    def __init__(self, level: int, message: str):
        super().__init__(f"level {level}: {message}")
        self.level = level


class Substitution:
    def __init__(self, images: Mapping[str, str], alphabet: Sequence[str] | None = None):
        images = {str(a): str(w) for a, w in images.items()}
        if alphabet is None:
            alphabet = sorted(images)
        self.alphabet = tuple(alphabet)
        if set(self.alphabet) != set(images):
            raise ValueError("images must be given for exactly the alphabet")
        for a, w in images.items():
            if not w:
                raise ValueError(f"image of {a!r} is empty")
            if set(w) - set(self.alphabet):
                raise ValueError(f"image of {a!r} leaves the alphabet")
        self.images = images
        self.index = {a: i for i, a in enumerate(self.alphabet)}

    def __getitem__(self, a: str) -> str:
        return self.images[a]

    def __eq__(self, other):
        return isinstance(other, Substitution) and self.images == other.images and self.alphabet == other.alphabet

    def __repr__(self):
        return f"Substitution({self.images!r})"

    def apply(self, word: str, times: int = 1) -> str:
        for _ in range(times):
            word = "".join(self.images[c] for c in word)
        return word

    def power(self, k: int) -> "Substitution":
        return Substitution({a: self.apply(a, k) for a in self.alphabet}, self.alphabet)

    def to_json(self) -> str:
        return json.dumps(self.images, sort_keys=True)

    @classmethod
    def from_json(cls, s: str) -> "Substitution":
        return cls(json.loads(s))

    # -- combinatorics ----------------------------------------------------

    def abelianization(self) -> np.ndarray:
        """M[a, b] = number of occurrences of b in sigma(a)."""
        n = len(self.alphabet)
        M = np.zeros((n, n), dtype=np.int64)
        for a, w in self.images.items():
            for c in w:
                M[self.index[a], self.index[c]] += 1
        return M

    def is_primitive(self, n_max: int = 64) -> bool:
        M = (self.abelianization() > 0).astype(np.int64)
        P = M.copy()
        for _ in range(n_max):
            if (P > 0).all():
                return True
            P = ((P @ M) > 0).astype(np.int64)
        return False

    def decompositions(self, a: str) -> list["PssTriple"]:
        return enumerate_decompositions(self, a)

    def factors(self, length: int, depth: int | None = None) -> set[str]:
        """Factors of the given length of the language (subwords of sigma^n(a)).

        Iterates images until the factor set stabilises.
        """
        found: set[str] = set()
        frontier = set(self.alphabet)
        seen_words: set[str] = set()
        stable = 0
        k = 0
        while True:
            before = len(found)
            new_frontier = set()
            for w in frontier:
                img = self.apply(w)
                # keep words short: only windows of the image matter
                for i in range(len(img) - length + 1):
                    found.add(img[i:i + length])
                for i in range(max(1, len(img) - 2 * length + 1)):
                    piece = img[i:i + 2 * length]
                    if piece not in seen_words:
                        seen_words.add(piece)
                        new_frontier.add(piece)
            frontier = new_frontier
            k += 1
            stable = stable + 1 if len(found) == before else 0
            if (depth is not None and k >= depth) or stable >= 3 or not frontier:
                return found


@dataclass(frozen=True)
class PssTriple:
    p: str
    c: str
    s: str
    parent: str

    def __post_init__(self):
        if len(self.c) != 1:
            raise ValueError("center must be a single letter")

    @property
    def word(self) -> str:
        return self.p + self.c + self.s

    def check(self, sigma: Substitution) -> bool:
        return sigma[self.parent] == self.word

    def as_tuple(self) -> tuple[str, str, str]:
        return (self.p, self.c, self.s)

    def __str__(self):
        return f"({self.p or 'e'},{self.c},{self.s or 'e'})"


def enumerate_decompositions(sigma: Substitution, a: str) -> list[PssTriple]:
    """All splittings sigma(a) = p c s, ordered by |p|."""
    w = sigma[a]
    return [PssTriple(w[:i], w[i], w[i + 1:], a) for i in range(len(w))]


@dataclass(frozen=True)
class PssPath:
    """An element of S_a: a chain of triples with sigma(c_m) = p_{m+1} c_{m+1} s_{m+1}.

    ``triples`` holds the explicit part.  If ``period`` is positive, the last
    ``period`` triples repeat forever (eventually periodic shape).  Otherwise
    the path is finite; :meth:`extend_empty` gives its canonical all-empty-prefix
    continuation.
    """

    parent: str
    triples: tuple[tuple[str, str, str], ...]
    period: int = 0

    def __post_init__(self):
        object.__setattr__(self, "triples", tuple(tuple(t) for t in self.triples))
        if self.period < 0 or self.period > len(self.triples):
            raise ValueError("bad period")

    @property
    def depth(self) -> int:
        return len(self.triples)

    @property
    def preperiod(self) -> int:
        return len(self.triples) - self.period if self.period else len(self.triples)

    def check(self, sigma: Substitution) -> bool:
        letter = self.parent
        for p, c, s in self.triples:
            if sigma[letter] != p + c + s:
                return False
            letter = c
        if self.period:
            p, c, s = self.triples[self.preperiod]
            if sigma[letter] != p + c + s:
                return False
        return True

    def triple(self, m: int) -> tuple[str, str, str]:
        """Triple number m (1-based)."""
        if m <= len(self.triples):
            return self.triples[m - 1]
        if not self.period:
            raise IndexError("finite path")
        k = (m - 1 - self.preperiod) % self.period
        return self.triples[self.preperiod + k]

    def prefixes(self) -> list[str]:
        return [t[0] for t in self.triples]

    def shift(self) -> "PssPath":
        """S(x): drop the first triple; the new parent is c_1."""
        if not self.triples:
            raise ValueError("empty path")
        first = self.triples[0]
        if self.period and self.preperiod == 0:
            rest = self.triples[1:] + (first,)
            return PssPath(first[1], rest, self.period)
        return PssPath(first[1], self.triples[1:], self.period)

    def extend_empty(self, sigma: Substitution, depth: int) -> "PssPath":
        """Continue a finite path with empty prefixes up to ``depth`` triples."""
        if self.period:
            raise ValueError("path is already infinite")
        triples = list(self.triples)
        letter = triples[-1][1] if triples else self.parent
        while len(triples) < depth:
            w = sigma[letter]
            triples.append(("", w[0], w[1:]))
            letter = w[0]
        return PssPath(self.parent, tuple(triples))

    def encode(self) -> str:
        body = "".join(f"({p or 'e'},{c},{s or 'e'})" for p, c, s in self.triples)
        if self.period:
            head = "".join(f"({p or 'e'},{c},{s or 'e'})" for p, c, s in self.triples[: self.preperiod])
            tail = body[len(head):]
            return f"{self.parent}:{head}[{tail}]"
        return f"{self.parent}:{body}"

    def to_json(self):
        return {"parent": self.parent, "triples": [list(t) for t in self.triples], "period": self.period}

    @classmethod
    def from_json(cls, data) -> "PssPath":
        return cls(data["parent"], tuple(tuple(t) for t in data["triples"]), int(data.get("period", 0)))


# ---------------------------------------------------------------------------
# gamma-weighted sums


def _weights(gamma, alphabet=None):
    if isinstance(gamma, Mapping):
        return dict(gamma)
    if alphabet is None:
        raise ValueError("alphabet required for a sequence of weights")
    return dict(zip(alphabet, gamma))


def gamma_weight(word: str, gamma: Mapping[str, complex]):
    """gamma(w) = gamma_{w_0} + ... + gamma_{w_{n-1}}; gamma(empty) = 0."""
    total = 0
    for c in word:
        if c not in gamma:
            raise KeyError(f"unknown letter {c!r}")
        total = total + gamma[c]
    return total


@dataclass(frozen=True)
class TwoSidedWindow:
    """Symbols omega_{-m} ... omega_{-1} . omega_0 ... omega_{m'-1}.

    ``word`` holds all symbols and ``origin`` the index of omega_0 in it.
    """

    word: str
    origin: int

    def __post_init__(self):
        if not 0 <= self.origin <= len(self.word):
            raise ValueError("origin outside window")

    @property
    def left(self) -> str:
        return self.word[: self.origin]

    @property
    def right(self) -> str:
        return self.word[self.origin:]

    @property
    def n_back(self) -> int:
        return self.origin

    @property
    def n_fwd(self) -> int:
        return len(self.word) - self.origin

    def __getitem__(self, n: int) -> str:
        i = self.origin + n
        if not 0 <= i < len(self.word):
            raise IndexError(f"index {n} outside window")
        return self.word[i]

    def __str__(self):
        return f"{self.left}·{self.right}"

    @classmethod
    def parse(cls, text: str) -> "TwoSidedWindow":
        left, sep, right = text.strip().partition("·")
        if not sep:
            left, sep, right = text.strip().partition(".")
        if not sep:
            return cls(text.strip(), 0)
        return cls(left + right, len(left))

    def shifted(self, k: int) -> "TwoSidedWindow":
        return TwoSidedWindow(self.word, self.origin + k)


def birkhoff_gamma(window: TwoSidedWindow, gamma: Mapping[str, complex], vectorized: bool = True):
    """gamma_n(omega) for every n in [-n_back, n_fwd].

    Returns ``(ns, values)``: forward sums for n >= 1, negated backward sums
    for n <= -1 and 0 at n = 0.
    """
    g = np.array([gamma[c] for c in window.word], dtype=complex)
    o = window.origin
    csum = np.concatenate([[0.0], np.cumsum(g)])
    # gamma_n = csum[o + n] - csum[o] for both signs
    ns = np.arange(-o, len(g) - o + 1)
    vals = csum[o + ns] - csum[o]
    return ns, vals


def birkhoff_gamma_at(window: TwoSidedWindow, gamma: Mapping[str, complex], n: int):
    if n == 0:
        return 0
    if n > 0:
        if n > window.n_fwd:
            raise IndexError(f"n={n} outside window")
        return gamma_weight(window.word[window.origin:window.origin + n], gamma)
    if -n > window.n_back:
        raise IndexError(f"n={n} outside window")
    return -gamma_weight(window.word[window.origin + n:window.origin], gamma)


# ---------------------------------------------------------------------------
# desubstitution and prefix-suffix decomposition


def recognizability_length(depth: int, expansion: float, growth: float = 4.0) -> int:
    """Window length per side suggested for a decomposition of the given depth."""
    return int(np.ceil(growth * expansion ** depth))


@dataclass
class PssChain:
    """Finite prefix-suffix decomposition (p_m, c_m, s_m)_{0 <= m < N} of a window.

    ``parent`` is c_N, the letter with sigma(c_N) = p_{N-1} c_{N-1} s_{N-1}.
    ``windows`` keeps the desubstituted window at every level.
    """

    triples: list[tuple[str, str, str]]
    parent: str
    windows: list[TwoSidedWindow] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.triples)

    def centers(self) -> list[str]:
        return [t[1] for t in self.triples] + [self.parent]

    def central_part(self, sigma: Substitution) -> TwoSidedWindow:
        """sigma^{N-1}(p_{N-1}) ... sigma(p_1) p_0 . c_0 s_0 sigma(s_1) ... sigma^{N-1}(s_{N-1})."""
        left = "".join(sigma.apply(p, m) for m, (p, _, _) in reversed(list(enumerate(self.triples))))
        right = self.triples[0][1] + "".join(sigma.apply(s, m) for m, (_, _, s) in enumerate(self.triples))
        return TwoSidedWindow(left + right, len(left))

    def is_valid(self, sigma: Substitution) -> bool:
        for m, (p, c, s) in enumerate(self.triples):
            above = self.triples[m + 1][1] if m + 1 < len(self.triples) else self.parent
            if sigma[above] != p + c + s:
                return False
        return True

    def to_json(self):
        return {"triples": [list(t) for t in self.triples], "parent": self.parent}


def _parse_blocks(sigma: Substitution, word: str, legal2: set[str]):
    """All parses of ``word`` into sigma-blocks (partial at both edges).

    Returns a list of blocks ``(start, end, letter, offset)`` common to every
    valid parse, plus the number of parses.  ``start`` may be negative and
    ``end`` may exceed len(word) for edge blocks; ``offset`` is the index in
    sigma(letter) of the first visible symbol.
    """
    L = len(word)
    images = sigma.images
    # boundary states: (position, previous letter or None)
    starts: list[tuple[tuple[int, str | None], tuple]] = []
    edges: dict[tuple[int, str | None], list[tuple[tuple, tuple]]] = {}
    terminal_edges = []

    def fits(pos, img, off=0):
        seg = img[off:]
        return word.startswith(seg[: L - pos], pos)

    init = (0, None)
    nodes = {init}
    # partial first block: letter b, offset j > 0
    first_blocks = []
    for b, img in images.items():
        for j in range(1, len(img)):
            if fits(0, img, j):
                first_blocks.append((b, j))
    frontier = [init]
    for b, j in first_blocks:
        n = len(images[b]) - j
        blk = (-j, n, b, j)
        if n >= L:
            terminal_edges.append((None, blk))
        else:
            node = (n, b)
            starts.append((node, blk))
            if node not in nodes:
                nodes.add(node)
                frontier.append(node)
    # forward exploration
    order = []
    seen = set()
    stack = sorted(nodes, key=lambda x: x[0])
    heap = [(n[0], i, n) for i, n in enumerate(stack)]
    heapq.heapify(heap)
    counter = len(heap)
    while heap:
        _, _, node = heapq.heappop(heap)
        if node in seen:
            continue
        seen.add(node)
        order.append(node)
        pos, prev = node
        for b, img in images.items():
            if prev is not None and prev + b not in legal2:
                continue
            if not fits(pos, img):
                continue
            end = pos + len(img)
            blk = (pos, end, b, 0)
            if end >= L:
                terminal_edges.append((node, blk))
                continue
            nxt = (end, b)
            edges.setdefault(node, []).append((nxt, blk))
            if nxt not in seen:
                heapq.heappush(heap, (end, counter, nxt))
                counter += 1
    # count paths: forward counts from sources, backward counts to terminals
    fwd: dict = {init: 1}
    for node, blk in starts:
        fwd[node] = fwd.get(node, 0) + 1
    for node in order:
        for nxt, _ in edges.get(node, []):
            fwd[nxt] = fwd.get(nxt, 0) + fwd.get(node, 0)
    bwd: dict = {}
    for node, _ in terminal_edges:
        if node is not None:
            bwd[node] = bwd.get(node, 0) + 1
    for node in reversed(order):
        for nxt, _ in edges.get(node, []):
            bwd[node] = bwd.get(node, 0) + bwd.get(nxt, 0)
    total = sum(1 for node, _ in terminal_edges if node is None)
    total += sum(fwd.get(node, 0) for node, _ in terminal_edges if node is not None)
    if total == 0:
        return [], 0
    through: dict[tuple, int] = {}
    for node, blk in starts:
        through[blk] = through.get(blk, 0) + bwd.get(node, 0)
    for node, blk in terminal_edges:
        through[blk] = through.get(blk, 0) + (1 if node is None else fwd.get(node, 0))
    for node in order:
        for nxt, blk in edges.get(node, []):
            through[blk] = through.get(blk, 0) + fwd.get(node, 0) * bwd.get(nxt, 0)
    common = sorted((blk for blk, k in through.items() if k == total), key=lambda b: b[0])
    return common, total


def desubstitute(sigma: Substitution, window: TwoSidedWindow, legal2: set[str], level: int = 0):
    """One step of the prefix-suffix decomposition.

    Returns ``((p, c, s, parent), preimage_window)``.
    """
    word = window.word
    if window.origin >= len(word):
        raise DesubstitutionError(level, "origin has no symbol")
    common, total = _parse_blocks(sigma, word, legal2)
    if total == 0:
        raise DesubstitutionError(level, "window is not a factor of any sigma-image")
    o = window.origin
    own = [blk for blk in common if blk[0] <= o < blk[1]]
    if not own:
        raise DesubstitutionError(level, f"ambiguous desubstitution at the origin ({total} parses)")
    start, end, b, _ = own[0]
    img = sigma[b]
    k = o - start
    triple = (img[:k], img[k], img[k + 1:], b)
    # maximal run of contiguous certain blocks around the origin block
    idx = common.index(own[0])
    lo = idx
    while lo > 0 and common[lo - 1][1] == common[lo][0]:
        lo -= 1
    hi = idx
    while hi + 1 < len(common) and common[hi + 1][0] == common[hi][1]:
        hi += 1
    pre = "".join(blk[2] for blk in common[lo:hi + 1])
    return triple, TwoSidedWindow(pre, idx - lo)


def prefix_suffix_decompose(sigma: Substitution, window: TwoSidedWindow, depth: int,
                            legal2: set[str] | None = None) -> PssChain:
    """Reconstruct (p_m, c_m, s_m) for 0 <= m < depth by repeated desubstitution.

    Raises :class:`DesubstitutionError` naming the level at which the window
    stops determining the decomposition.
    """
    if legal2 is None:
        legal2 = sigma.factors(2)
    triples = []
    windows = [window]
    current = window
    parent = None
    for m in range(depth):
        (p, c, s, parent), current = desubstitute(sigma, current, legal2, level=m)
        if triples and parent is None:
            break
        triples.append((p, c, s))
        windows.append(current)
    chain = PssChain(triples, parent, windows)
    return chain


def eventual_period(triples: Sequence[tuple], min_repeats: int = 2):
    """Smallest (preperiod, period) such that the sequence repeats its period at
    least ``min_repeats`` times up to its end, or None."""
    n = len(triples)
    for q in range(1, n // min_repeats + 1):
        # find smallest n0 such that triples[n0:] is q-periodic
        n0 = n
        while n0 > 0 and (n0 - 1 + q >= n or triples[n0 - 1] == triples[n0 - 1 + q]):
            n0 -= 1
        if n - n0 >= min_repeats * q:
            return n0, q
    return None
