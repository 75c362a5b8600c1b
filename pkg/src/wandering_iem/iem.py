"""Interval exchange maps, affine interval exchange maps, coding and induction.

All intervals are half-open ``[x, y)``; a point on a breakpoint belongs to the
interval on its right.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Callable, Sequence

import numpy as np

from .substitution import Substitution

_MERGE_TOL = 1e-13


class BoundaryHitError(ValueError):
    def __init__(self, m: int, point: float):
        super().__init__(f"orbit hits a partition boundary at m={m} (point {point!r})")
        self.m = m
        self.point = point


class FirstReturnError(RuntimeError):
    def __init__(self, message: str, partial):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class Partition:
    """Labelled partition of ``[0, length)`` into consecutive intervals."""

    breaks: tuple[float, ...]  # left endpoints followed by the right end
    letters: tuple[str, ...]

    def __post_init__(self):
        b = tuple(float(x) for x in self.breaks)
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "letters", tuple(self.letters))
        if len(b) != len(self.letters) + 1:
            raise ValueError("need one more break than letters")
        if any(y <= x for x, y in zip(b, b[1:])):
            raise ValueError("breaks must increase")

    @classmethod
    def from_lengths(cls, letters: Sequence[str], lengths: Sequence[float], start: float = 0.0):
        return cls(tuple(start + np.concatenate([[0.0], np.cumsum(lengths)])), tuple(letters))

    @property
    def length(self) -> float:
        return self.breaks[-1] - self.breaks[0]

    def interval(self, a: str) -> tuple[float, float]:
        i = self.letters.index(a)
        return self.breaks[i], self.breaks[i + 1]

    def index_of(self, x: float) -> int:
        i = int(np.searchsorted(self.breaks, x, side="right")) - 1
        if i < 0 or i >= len(self.letters):
            raise ValueError(f"{x!r} outside [{self.breaks[0]}, {self.breaks[-1]})")
        return i

    def letter_of(self, x: float) -> str:
        return self.letters[self.index_of(x)]

    def near_boundary(self, x: float, tol: float) -> bool:
        inner = np.asarray(self.breaks[1:-1])
        return inner.size > 0 and float(np.min(np.abs(inner - x))) <= tol


class Iem:
    """Interval exchange map on ``[0, L)``.

    ``pi0`` lists the letters in their order before the exchange, ``pi1`` the
    order of the images.
    """

    def __init__(self, lengths, pi0: Sequence[str], pi1: Sequence[str] | None = None,
                 alphabet: Sequence[str] | None = None):
        pi0 = tuple(str(a) for a in pi0)
        pi1 = tuple(str(a) for a in (pi1 if pi1 is not None else pi0))
        if sorted(pi0) != sorted(pi1) or len(set(pi0)) != len(pi0):
            raise ValueError("pi0 and pi1 must order the same letters")
        self.alphabet = tuple(alphabet) if alphabet is not None else tuple(sorted(pi0))
        if set(self.alphabet) != set(pi0):
            raise ValueError("alphabet does not match the orderings")
        if isinstance(lengths, dict):
            lengths = [lengths[a] for a in self.alphabet]
        lam = np.asarray(lengths, dtype=float)
        if lam.shape != (len(self.alphabet),) or (lam <= 0).any():
            raise ValueError("lengths must be positive, one per letter")
        self.lengths = dict(zip(self.alphabet, lam.tolist()))
        self.pi0, self.pi1 = pi0, pi1
        self.length = float(lam.sum())
        self.top = Partition.from_lengths(pi0, [self.lengths[a] for a in pi0])
        self.bottom = Partition.from_lengths(pi1, [self.lengths[a] for a in pi1])
        self.translations = {a: self.bottom.interval(a)[0] - self.top.interval(a)[0] for a in pi0}

    def __repr__(self):
        return f"Iem(lengths={self.lengths}, pi0={''.join(self.pi0)!r}, pi1={''.join(self.pi1)!r})"

    @classmethod
    def from_function(cls, f: Callable[[float], float], breaks: Sequence[float],
                      letters: Sequence[str] | None = None) -> "Iem":
        """Read off an IEM from a piecewise translation given its continuity breaks."""
        breaks = list(breaks)
        n = len(breaks) - 1
        letters = list(letters) if letters is not None else [str(i + 1) for i in range(n)]
        lengths = np.diff(breaks)
        images = [f(breaks[i] + lengths[i] / 2) - lengths[i] / 2 for i in range(n)]
        pi1 = [letters[i] for i in np.argsort(images, kind="stable")]
        return cls(lengths, letters, pi1, alphabet=letters)

    def delta(self, a: str) -> float:
        return self.translations[a]

    def __call__(self, t):
        return self.evaluate(t)

    def evaluate(self, t: float) -> float:
        if not 0.0 <= t < self.length:
            raise ValueError(f"{t!r} outside [0, {self.length})")
        a = self.top.letter_of(t)
        return t + self.translations[a]

    def evaluate_many(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if ((ts < 0) | (ts >= self.length)).any():
            raise ValueError("points outside the domain")
        idx = np.searchsorted(self.top.breaks, ts, side="right") - 1
        shift = np.array([self.translations[a] for a in self.top.letters])
        return ts + shift[idx]

    def inverse(self) -> "Iem":
        return Iem([self.lengths[a] for a in self.alphabet], self.pi1, self.pi0, self.alphabet)

    def breakpoints(self) -> tuple[float, ...]:
        return self.top.breaks

    def to_dict(self):
        return {
            "alphabet": list(self.alphabet),
            "lambda": [repr(self.lengths[a]) for a in self.alphabet],
            "pi0": list(self.pi0),
            "pi1": list(self.pi1),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d) -> "Iem":
        lam = [float(Decimal(str(x))) for x in d["lambda"]]
        return cls(lam, d["pi0"], d["pi1"], alphabet=d["alphabet"])

    @classmethod
    def from_json(cls, s: str) -> "Iem":
        return cls.from_dict(json.loads(s))


class AffineIem:
    """Bijective piecewise affine map of ``[0, 1)`` with positive slopes.

    On piece ``k`` (``[breaks[k], breaks[k+1])``) the map is
    ``t -> slopes[k] * t + intercepts[k]``.
    """

    def __init__(self, breaks, slopes, intercepts, labels: Sequence[str] | None = None,
                 check: bool = True, tol: float = 1e-9):
        self.breaks = np.asarray(breaks, dtype=float)
        self.slopes = np.asarray(slopes, dtype=float)
        self.intercepts = np.asarray(intercepts, dtype=float)
        n = len(self.slopes)
        if self.breaks.shape != (n + 1,) or self.intercepts.shape != (n,):
            raise ValueError("inconsistent piece data")
        self.labels = tuple(labels) if labels is not None else tuple(str(k) for k in range(n))
        if (self.slopes <= 0).any():
            raise ValueError("slopes must be positive")
        if (np.diff(self.breaks) <= 0).any():
            raise ValueError("breaks must increase")
        lo = self.slopes * self.breaks[:-1] + self.intercepts
        hi = self.slopes * self.breaks[1:] + self.intercepts
        order = np.argsort(lo, kind="stable")
        self._img_lo, self._img_hi, self._img_order = lo[order], hi[order], order
        if check:
            gaps = np.abs(self._img_lo[1:] - self._img_hi[:-1])
            err = max(abs(self._img_lo[0] - self.breaks[0]), abs(self._img_hi[-1] - self.breaks[-1]),
                      float(gaps.max()) if gaps.size else 0.0)
            if err > tol:
                raise ValueError(f"image intervals do not tile the domain (defect {err:.3g})")

    @property
    def n_pieces(self) -> int:
        return len(self.slopes)

    def piece_of(self, t: float) -> int:
        k = int(np.searchsorted(self.breaks, t, side="right")) - 1
        if k < 0 or k >= self.n_pieces:
            raise ValueError(f"{t!r} outside the domain")
        return k

    def __call__(self, t):
        return self.evaluate(t)

    def evaluate(self, t: float) -> float:
        k = self.piece_of(t)
        return float(self.slopes[k] * t + self.intercepts[k])

    def evaluate_many(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        k = np.searchsorted(self.breaks, ts, side="right") - 1
        if ((k < 0) | (k >= self.n_pieces)).any():
            raise ValueError("points outside the domain")
        return self.slopes[k] * ts + self.intercepts[k]

    def inverse_evaluate(self, y: float) -> float:
        j = int(np.searchsorted(self._img_lo, y, side="right")) - 1
        j = min(max(j, 0), self.n_pieces - 1)
        k = self._img_order[j]
        return float((y - self.intercepts[k]) / self.slopes[k])

    def image_interval(self, lo: float, hi: float) -> tuple[float, float]:
        """Image of ``[lo, hi)`` assuming it lies in one piece."""
        k = self.piece_of(lo)
        return float(self.slopes[k] * lo + self.intercepts[k]), float(self.slopes[k] * hi + self.intercepts[k])

    def preimage_interval(self, lo: float, hi: float) -> tuple[float, float]:
        a = self.inverse_evaluate(lo)
        j = int(np.searchsorted(self._img_lo, lo, side="right")) - 1
        k = self._img_order[min(max(j, 0), self.n_pieces - 1)]
        return a, float((hi - self.intercepts[k]) / self.slopes[k])

    def to_dict(self):
        return {
            "breaks": [repr(float(x)) for x in self.breaks],
            "slopes": [repr(float(x)) for x in self.slopes],
            "intercepts": [repr(float(x)) for x in self.intercepts],
            "labels": list(self.labels),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d) -> "AffineIem":
        f = lambda xs: [float(x) for x in xs]
        return cls(f(d["breaks"]), f(d["slopes"]), f(d["intercepts"]), d.get("labels"))

    @classmethod
    def from_json(cls, s: str) -> "AffineIem":
        return cls.from_dict(json.loads(s))


def evaluate(T, t: float) -> float:
    return T.evaluate(t)


def itinerary(T: Iem, t: float, n_back: int, n_fwd: int, partition: Partition | None = None,
              strict: bool = False, boundary_tol: float = 1e-12):
    """Coding of the orbit of ``t``: symbols for m = -n_back .. n_fwd - 1.

    Returns ``(word, origin)`` with ``word[origin]`` the symbol of ``t``.
    With ``strict`` an orbit point within ``boundary_tol`` of an interior
    partition break raises :class:`BoundaryHitError`.
    """
    partition = partition or T.top
    fwd = []
    x = t
    for m in range(n_fwd):
        if strict and partition.near_boundary(x, boundary_tol):
            raise BoundaryHitError(m, x)
        fwd.append(partition.letter_of(x))
        if m + 1 < n_fwd:
            x = T.evaluate(x)
    back = []
    if n_back:
        Tinv = T.inverse()
        x = t
        for m in range(1, n_back + 1):
            x = Tinv.evaluate(x)
            if strict and partition.near_boundary(x, boundary_tol):
                raise BoundaryHitError(-m, x)
            back.append(partition.letter_of(x))
    return "".join(reversed(back)) + "".join(fwd), n_back


def _split(lo: float, hi: float, cuts) -> list[tuple[float, float]]:
    inner = [c for c in cuts if lo + _MERGE_TOL < c < hi - _MERGE_TOL]
    pts = [lo] + inner + [hi]
    return list(zip(pts, pts[1:]))


@dataclass
class ReturnPiece:
    left: float
    right: float
    translation: float
    word: str

    @property
    def return_time(self) -> int:
        return len(self.word)

    @property
    def length(self) -> float:
        return self.right - self.left


@dataclass
class FirstReturn:
    cut: float
    pieces: list[ReturnPiece]
    induced: Iem
    R: np.ndarray  # rows: partition letters, columns: pieces in order
    row_letters: tuple[str, ...]

    @property
    def return_words(self) -> list[str]:
        return [p.word for p in self.pieces]

    def evaluate(self, x: float) -> float:
        return self.induced.evaluate(x)


def first_return(T: Iem, cut: float, partition: Partition | None = None,
                 budget: int = 10**6) -> FirstReturn:
    """First return map of ``T`` to ``[0, cut)`` computed on intervals.

    Pieces are cut wherever the return word (coded by ``partition``) or the
    total translation changes.
    """
    if not 0 < cut <= T.length:
        raise ValueError("cut must lie in (0, length]")
    partition = partition or T.top
    cuts = sorted(set(T.top.breaks[1:-1]) | set(partition.breaks[1:-1]) | {cut})
    todo = [(lo, hi, 0.0, "") for lo, hi in _split(0.0, cut, cuts)]
    done: list[ReturnPiece] = []
    while todo:
        lo, hi, shift, word = todo.pop()
        if word and hi <= cut + _MERGE_TOL:
            done.append(ReturnPiece(lo - shift, hi - shift, shift, word))
            continue
        if len(word) >= budget:
            raise FirstReturnError(f"no return within {budget} steps from {lo - shift!r}", done)
        mid = (lo + hi) / 2
        d = T.translations[T.top.letter_of(mid)]
        word += partition.letter_of(mid)
        for plo, phi in _split(lo + d, hi + d, cuts):
            todo.append((plo, phi, shift + d, word))
    done = sorted((p for p in done if p.length > _MERGE_TOL), key=lambda p: p.left)
    merged: list[ReturnPiece] = []
    for p in done:
        q = merged[-1] if merged else None
        if q and q.word == p.word and abs(q.translation - p.translation) < 1e-12 and abs(q.right - p.left) < 1e-12:
            q.right = p.right
        else:
            merged.append(p)
    labels = [str(k) for k in range(len(merged))]
    lengths = [p.length for p in merged]
    images = [p.left + p.translation for p in merged]
    pi1 = [labels[k] for k in np.argsort(images, kind="stable")]
    induced = Iem(lengths, labels, pi1, alphabet=labels)
    rows = partition.letters
    R = np.zeros((len(rows), len(merged)), dtype=np.int64)
    for j, p in enumerate(merged):
        for c in p.word:
            R[rows.index(c), j] += 1
    return FirstReturn(cut, merged, induced, R, tuple(rows))


@dataclass
class SelfSimilarityReport:
    is_scaled_copy: bool
    max_residual: float
    failing_sample: float | None
    R: np.ndarray | None
    substitution: Substitution | None
    abelianization_matches: bool
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "is_scaled_copy": self.is_scaled_copy,
            "max_residual": self.max_residual,
            "failing_sample": self.failing_sample,
            "R": None if self.R is None else self.R.tolist(),
            "substitution": None if self.substitution is None else self.substitution.images,
            "abelianization_matches": self.abelianization_matches,
        }


def self_similarity_check(T: Iem, scale: float, partition: Partition | None = None,
                          rotation: float = 0.0, n_samples: int = 2000, tol: float = 1e-9) -> SelfSimilarityReport:
    """Check that the first return to ``[0, scale)`` is a rescaled copy of ``T``.

    With a nonzero ``rotation`` r the rescaling is ``phi(x) = (x/scale + r) mod 1``
    and the claim is ``induced = phi^-1 o T o phi``.  The substitution is read
    from return words: sigma(b) is the return word of ``phi^-1(I_b)``.
    """
    partition = partition or T.top
    L = T.length
    fr = first_return(T, scale, partition)

    def phi(x):
        return (x / scale + rotation) % L

    def phi_inv(y):
        return ((y - rotation) % L) * scale

    xs = (np.arange(n_samples) + 0.5) / n_samples * scale
    worst, where = 0.0, None
    for x in xs:
        lhs = fr.induced.evaluate(float(x))
        rhs = phi_inv(T.evaluate(phi(float(x))))
        r = abs(lhs - rhs)
        r = min(r, scale - r)  # values near the cut are equal on the circle
        if r > worst:
            worst, where = r, float(x)
    ok = worst <= tol
    images, sub, R, match = {}, None, None, False
    consistent = True
    for b in partition.letters:
        lo, hi = partition.interval(b)
        words = set()
        for f in (0.01, 0.5, 0.99):
            x = phi_inv(lo + f * (hi - lo))
            k = int(np.searchsorted([p.left for p in fr.pieces], x, side="right")) - 1
            words.add(fr.pieces[k].word)
        if len(words) != 1:
            consistent = False
        images[b] = min(words)
    try:
        sub = Substitution(images, partition.letters)
        letters = partition.letters
        R = np.zeros((len(letters), len(letters)), dtype=np.int64)
        for j, b in enumerate(letters):
            for c in images[b]:
                R[letters.index(c), j] += 1
        match = consistent and np.array_equal(sub.abelianization(), R.T)
    except ValueError:
        consistent = False
    return SelfSimilarityReport(ok and consistent, float(worst), None if ok else where, R, sub,
                                bool(match), {"n_pieces": len(fr.pieces)})
