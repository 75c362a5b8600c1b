"""Atomic measure on an orbit, the monotone maps g and h, and the affine IEM they induce.

Gap widths equal normalized atom weights and fall far below double precision
for large |n|.  The measure, g, h and the exact copy of f are therefore kept in
``decimal`` arithmetic with a precision chosen from the smallest weight; the
float ``AffineIem`` is a rounding of the exact map used for serialization.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from typing import Mapping, Sequence

import numpy as np

from .iem import AffineIem, Iem, Partition
from .minimal import growth_check
from .substitution import TwoSidedWindow

GAP_MERGE = 1e-12
_WIDTH_TOL = 1e-15


class EmptyCylinderError(ValueError):
    """The window is not the itinerary of any point."""


class NonSummableError(ValueError):
    pass


class SlopeMismatchError(ValueError):
    def __init__(self, residuals: Mapping[str, float], tol: float):
        bad = {a: r for a, r in residuals.items() if r > tol}
        super().__init__(f"slopes off by more than {tol:g}: {bad}")
        self.residuals = dict(residuals)


# ---------------------------------------------------------------- locating

@dataclass(frozen=True)
class LocatedPoint:
    lo: float
    hi: float
    pieces: tuple[tuple[float, float], ...]
    n_fwd: int
    n_back: int

    @property
    def midpoint(self) -> float:
        return (self.lo + self.hi) / 2

    @property
    def width(self) -> float:
        return self.hi - self.lo


def _cut(lo: float, hi: float, breaks) -> list[tuple[float, float]]:
    inner = [b for b in breaks if lo < b < hi]
    pts = [lo, *inner, hi]
    return list(zip(pts, pts[1:]))


def _refine(pieces, T: Iem, partition: Partition, letters: str, backward: bool):
    # pieces: (lo, hi, shift) with T^m x = x + shift on [lo, hi)
    U = T.inverse() if backward else T
    for a in letters:
        alo, ahi = partition.interval(a)
        out = []
        for lo, hi, sh in pieces:
            if backward:
                for plo, phi in _cut(lo + sh, hi + sh, U.top.breaks):
                    d = U.translations[U.top.letter_of((plo + phi) / 2)]
                    qlo, qhi = max(plo + d, alo), min(phi + d, ahi)
                    if qhi - qlo > _WIDTH_TOL:
                        out.append((qlo - sh - d, qhi - sh - d, sh + d))
            else:
                qlo, qhi = max(lo + sh, alo), min(hi + sh, ahi)
                if qhi - qlo <= _WIDTH_TOL:
                    continue
                for plo, phi in _cut(qlo, qhi, U.top.breaks):
                    d = U.translations[U.top.letter_of((plo + phi) / 2)]
                    out.append((plo - sh, phi - sh, sh + d))
        if not out:
            raise EmptyCylinderError(f"no point has this itinerary (failed at letter {a!r})")
        pieces = out
    return pieces


def _merge(intervals):
    out = []
    for lo, hi in sorted(intervals):
        if out and lo - out[-1][1] <= _WIDTH_TOL:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def locate_point(T: Iem, partition: Partition, window: TwoSidedWindow, n_fwd: int | None = None,
                 n_back: int = 0) -> LocatedPoint:
    """Interval of points whose coding matches the window on ``-n_back <= n < n_fwd``.

    When the cylinder is a union of intervals the longest one is returned
    (``pieces`` keeps all of them).
    """
    n_fwd = window.n_fwd if n_fwd is None else n_fwd
    if n_fwd < 1:
        raise ValueError("need at least one forward symbol")
    if n_fwd > window.n_fwd or n_back > window.n_back:
        raise ValueError("window too short for the requested range")
    fwd = window.right[:n_fwd]
    pieces = _refine([(0.0, T.length, 0.0)], T, partition, fwd, backward=False)
    if n_back:
        back = window.left[::-1][:n_back]
        pieces = _refine([(lo, hi, 0.0) for lo, hi, _ in pieces], T, partition, back, backward=True)
    merged = _merge((lo, hi) for lo, hi, _ in pieces)
    lo, hi = max(merged, key=lambda p: p[1] - p[0])
    return LocatedPoint(lo, hi, tuple(merged), n_fwd, n_back)


# ---------------------------------------------------------------- measure

def _precision_for(max_log_weight: float) -> int:
    return 40 + int(max_log_weight / math.log(10)) + 1


def _dec(x: float) -> Decimal:
    return Decimal(repr(float(x)))


@dataclass
class AtomicMeasure:
    base_point: float
    N: int
    ns: np.ndarray
    positions: np.ndarray
    letters: str  # omega_n for n = -N .. N
    weights: list  # Decimal, unnormalized, weights[N] == 1
    K: Decimal
    slopes: dict  # letter -> Decimal exp(-Re gamma_a)
    precision: int
    re_gamma: np.ndarray
    tail: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.positions)

    def normalized(self) -> np.ndarray:
        with localcontext() as ctx:
            ctx.prec = self.precision
            return np.array([float(w / self.K) for w in self.weights])

    def log_weights(self) -> np.ndarray:
        """-log of each unnormalized weight, i.e. Re gamma_n."""
        return np.array([-float(w.ln()) for w in self.weights])

    def index(self, n: int) -> int:
        if abs(n) > self.N:
            raise IndexError(n)
        return n + self.N

    def mass(self, lo: float, hi: float) -> Decimal:
        """Normalized mass of ``[lo, hi)``."""
        with localcontext() as ctx:
            ctx.prec = self.precision
            sel = np.nonzero((self.positions >= lo) & (self.positions < hi))[0]
            return sum((self.weights[i] for i in sel), Decimal(0)) / self.K

    def summary(self) -> dict:
        return {"N": self.N, "base_point": repr(self.base_point), "K": str(+self.K),
                "n_atoms": len(self), "precision": self.precision,
                "min_weight": repr(float(min(self.weights) / self.K)),
                "tail": self.tail}


def _orbit(T: Iem, t: float, N: int) -> np.ndarray:
    Tinv = T.inverse()
    out = np.empty(2 * N + 1)
    out[N] = t
    x = t
    for n in range(1, N + 1):
        x = T.evaluate(x)
        out[N + n] = x
    x = t
    for n in range(1, N + 1):
        x = Tinv.evaluate(x)
        out[N - n] = x
    return out


def tail_estimate(window: TwoSidedWindow, gamma: Mapping[str, complex], N: int, rho: float = 0.4) -> dict:
    """Bound on the weight beyond |n| = N from the growth rate seen on the window.

    ``c`` is the smallest Re(gamma_n)/|n|^rho over N/2 <= |n| within the
    window; the bound is 2 * sum_{n > N} exp(-c n^rho).
    """
    radius = min(window.n_back, window.n_fwd)
    lo = max(2, N // 2)
    if radius <= lo:
        return {"rho": rho, "c": None, "bound": None, "from": lo}
    gc = growth_check(window, gamma, rho, n_min=lo, n_max=radius)
    c = gc["min_ratio"]
    if c <= 0:
        return {"rho": rho, "c": c, "bound": math.inf, "from": lo}
    n = np.arange(N + 1, N + 1 + 10**6, dtype=float)
    terms = np.exp(-c * n ** rho)
    bound = 2 * float(terms.sum())
    # remaining tail beyond the explicit sum, by comparison with the integral
    last = n[-1]
    bound += 2 * float(np.exp(-c * last ** rho) * last ** (1 - rho) / (c * rho))
    return {"rho": rho, "c": c, "bound": bound, "from": lo}


def build_measure(T: Iem, window: TwoSidedWindow, gamma: Mapping[str, complex], N: int,
                  partition: Partition | None = None, eps: float = 1e-9, rho: float = 0.4,
                  base_point: float | None = None) -> AtomicMeasure:
    """Atoms T^n(t), |n| <= N, with weights exp(-Re gamma_n) built letter by letter.

    Weights are generated recursively (w_{n+1} = w_n * exp(-Re gamma_{omega_n}))
    so that the transport identity holds to the working precision.
    """
    partition = partition or T.top
    if N < 0:
        raise ValueError("N must be non-negative")
    if window.n_fwd < N + 1 or window.n_back < N:
        raise ValueError(f"window covers n in [{-window.n_back}, {window.n_fwd}); need |n| <= {N}")
    re = {a: complex(g).real for a, g in gamma.items()}
    letters = window.word[window.origin - N: window.origin + N + 1]
    run = np.concatenate([[0.0], np.cumsum([re[c] for c in letters])])
    vals = run - run[N]  # Re gamma_n for n = -N .. N+1
    if N and (vals.min() < -eps):
        raise NonSummableError(f"Re gamma_n dips to {vals.min():.3g} on the window")
    if N >= 2:
        gc = growth_check(window, gamma, rho, n_min=2, n_max=N)
        if not gc["ok"]:
            raise NonSummableError(f"growth check failed: {gc}")
    if base_point is None:
        loc = locate_point(T, partition, window, n_fwd=N + 1, n_back=N)
        base_point = loc.midpoint
    pos = _orbit(T, base_point, N)
    coded = "".join(partition.letter_of(x) for x in pos)
    if coded != letters:
        k = next(i for i, (p, q) in enumerate(zip(coded, letters)) if p != q)
        raise ValueError(f"orbit coding departs from the window at n={k - N}")
    prec = _precision_for(float(vals.max()) + 5)
    with localcontext() as ctx:
        ctx.prec = prec
        slopes = {a: (-_dec(r)).exp() for a, r in re.items()}
        w = [Decimal(0)] * (2 * N + 1)
        w[N] = Decimal(1)
        for n in range(1, N + 1):
            w[N + n] = w[N + n - 1] * slopes[letters[N + n - 1]]
            w[N - n] = w[N - n + 1] / slopes[letters[N - n]]
        K = sum(w, Decimal(0))
    ns = np.arange(-N, N + 1)
    if len(np.unique(pos)) != len(pos):
        raise ValueError("orbit is not injective on the window")
    m = AtomicMeasure(base_point, N, ns, pos, letters, w, K, slopes, prec, vals[:-1])
    m.tail = tail_estimate(window, gamma, N, rho) if N else {}
    return m


# ---------------------------------------------------------------- conjugacy

@dataclass
class ConjugacyPair:
    """g(t) = mu([0, t)) and its pseudo-inverse h, constant on each gap."""

    measure: AtomicMeasure
    order: np.ndarray  # atom indices sorted by position
    xs: np.ndarray  # sorted positions
    cum: list  # Decimal; cum[k] = mass of the k leftmost atoms, cum[-1] == 1
    precision: int

    def g_exact(self, t) -> Decimal:
        k = int(np.searchsorted(self.xs, float(t), side="left"))
        return self.cum[k]

    def g(self, t: float) -> float:
        return float(self.g_exact(t))

    def g_many(self, ts) -> np.ndarray:
        k = np.searchsorted(self.xs, np.asarray(ts, dtype=float), side="left")
        cf = np.array([float(c) for c in self.cum])
        return cf[k]

    def rank(self, s) -> int:
        """Sorted index of the atom whose gap contains s."""
        if not isinstance(s, Decimal):
            s = _dec(s)
        k = bisect.bisect_right(self.cum, s) - 1
        return min(max(k, 0), len(self.xs) - 1)

    def h(self, s) -> float:
        return float(self.xs[self.rank(s)])

    def h_many(self, ss) -> np.ndarray:
        cf = np.array([float(c) for c in self.cum])
        k = np.clip(np.searchsorted(cf, np.asarray(ss, dtype=float), side="right") - 1, 0, len(self.xs) - 1)
        return self.xs[k]

    def gap_of_atom(self, i: int) -> tuple[Decimal, Decimal]:
        """Exact gap [g(x), g(x+)) of atom ``i`` (index into the measure arrays)."""
        k = int(self.where[i])
        return self.cum[k], self.cum[k + 1]

    @property
    def where(self) -> np.ndarray:
        inv = np.empty_like(self.order)
        inv[self.order] = np.arange(len(self.order))
        return inv

    def gaps(self, min_width: float = GAP_MERGE) -> list[tuple[float, float, int]]:
        """Float gaps ``(lo, hi, atom index)``; gaps narrower than ``min_width``
        are absorbed into the gap on their left."""
        out: list[list] = []
        for k in range(len(self.xs)):
            lo, hi = float(self.cum[k]), float(self.cum[k + 1])
            if out and hi - lo < min_width:
                out[-1][1] = hi
            else:
                out.append([lo, hi, int(self.order[k])])
        return [tuple(g) for g in out]

    def largest_gap(self) -> int:
        """Measure index of the heaviest atom."""
        return int(np.argmax([float(w) for w in self.measure.weights]))


def build_conjugacy(mu: AtomicMeasure) -> ConjugacyPair:
    order = np.argsort(mu.positions, kind="stable")
    xs = mu.positions[order]
    with localcontext() as ctx:
        ctx.prec = mu.precision
        cum = [Decimal(0)]
        for i in order:
            cum.append(cum[-1] + mu.weights[i])
        cum = [c / mu.K for c in cum]
    cum[-1] = Decimal(1)
    return ConjugacyPair(mu, order, xs, cum, mu.precision)


# ---------------------------------------------------------------- affine map

def common_breaks(T: Iem, partition: Partition, tol: float = 1e-12) -> list[float]:
    """Continuity breaks of T joined with the partition breaks, near-duplicates merged."""
    out: list[float] = []
    for b in sorted([*partition.breaks, *T.top.breaks]):
        if not out or b - out[-1] > tol:
            out.append(b)
    out[-1] = T.length
    return out


@dataclass
class AffineSynthesis:
    f: AffineIem
    breaks: list  # Decimal, in the g-coordinate
    slopes: list  # Decimal
    intercepts: list  # Decimal
    labels: tuple[str, ...]
    position_breaks: tuple[float, ...]
    slope_residuals: dict  # letter -> max relative deviation from exp(-Re gamma_a)
    min_gap: list  # per piece, smallest gap width inside it
    precision: int
    tiling_defect: float = 0.0

    def piece_of(self, s: Decimal) -> int:
        k = bisect.bisect_right(self.breaks, s) - 1
        return min(max(k, 0), len(self.slopes) - 1)

    def evaluate_exact(self, s) -> Decimal:
        if not isinstance(s, Decimal):
            s = _dec(s)
        k = self.piece_of(s)
        with localcontext() as ctx:
            ctx.prec = self.precision
            return self.slopes[k] * s + self.intercepts[k]

    def inverse_exact(self, y: Decimal) -> Decimal:
        with localcontext() as ctx:
            ctx.prec = self.precision
            for k in range(len(self.slopes)):
                lo = self.slopes[k] * self.breaks[k] + self.intercepts[k]
                hi = self.slopes[k] * self.breaks[k + 1] + self.intercepts[k]
                if lo <= y < hi:
                    return (y - self.intercepts[k]) / self.slopes[k]
        raise ValueError("point outside the image")

    def ok(self, tol: float = 1e-6) -> bool:
        return max(self.slope_residuals.values()) <= tol

    def report(self) -> dict:
        return {
            "labels": list(self.labels),
            "slopes": [repr(float(s)) for s in self.slopes],
            "slope_residuals": {a: repr(r) for a, r in sorted(self.slope_residuals.items())},
            "min_gap": [repr(m) for m in self.min_gap],
            "condition": [repr(_condition(s, m)) for s, m in zip(self.slopes, self.min_gap)],
            "tiling_defect": repr(self.tiling_defect),
        }


def _condition(slope, min_gap: float) -> float:
    # ratio of double-precision resolution to the narrowest gap on the piece
    return float(np.finfo(float).eps) / min_gap if min_gap > 0 else math.inf


def measured_slopes(T: Iem, mu: AtomicMeasure, conj: ConjugacyPair, partition: Partition) -> list:
    """(letter, mu(T I) / mu(I)) for each continuity interval I of T refined by the partition."""
    pbreaks = common_breaks(T, partition)
    out = []
    with localcontext() as ctx:
        ctx.prec = mu.precision
        for lo, hi in zip(pbreaks, pbreaks[1:]):
            mid = (lo + hi) / 2
            d = T.translations[T.top.letter_of(mid)]
            m = conj.g_exact(hi) - conj.g_exact(lo) if hi < T.length else 1 - conj.g_exact(lo)
            img = conj.g_exact(hi + d) if hi + d < T.length - 1e-15 else Decimal(1)
            if m > 0:
                out.append((partition.letter_of(mid), (img - conj.g_exact(lo + d)) / m))
    return out


def synthesize_affine(T: Iem, mu: AtomicMeasure, conj: ConjugacyPair | None = None,
                      partition: Partition | None = None, tol: float | None = None) -> AffineSynthesis:
    """Affine IEM f with h o f = T o h on every gap whose atom has an atom as image.

    Each continuity interval of T (refined by the partition) gets slope
    exp(-Re gamma_a).  Truncating the orbit at |n| = N leaves two defects: the
    last atom has no image atom, and the first atom has no preimage atom.  The
    pieces are split at those two places and every sub-piece is anchored on
    one of its own atoms, which makes f send each such gap exactly onto the
    next one.  The price is a tiling defect of order (w_N + w_-N)/K, reported
    as ``tiling_defect``.  ``slope_residuals`` compares the measured ratios
    mu(T I)/mu(I) with the target slopes.  Pieces carrying no atom are dropped.
    """
    conj = conj or build_conjugacy(mu)
    partition = partition or T.top
    pbreaks = common_breaks(T, partition)
    cuts = []
    if mu.N:
        cuts = [float(mu.positions[-1]), T.inverse().evaluate(float(mu.positions[0]))]
    pos_breaks = sorted(set(pbreaks) | {c for c in cuts if min(abs(c - b) for b in pbreaks) > 1e-12})
    where = conj.where
    last = len(mu) - 1
    with localcontext() as ctx:
        ctx.prec = mu.precision
        G, slopes, icepts, labels, mins, used = [], [], [], [], [], []
        for lo, hi in zip(pos_breaks, pos_breaks[1:]):
            inside = np.nonzero((mu.positions >= lo) & (mu.positions < hi))[0]
            if not len(inside):
                continue
            mid = (lo + hi) / 2
            a = partition.letter_of(mid)
            ell = mu.slopes[a]
            regular = [int(i) for i in inside if i != last]
            g_lo = conj.g_exact(lo)
            if regular:
                i = max(regular, key=lambda j: mu.weights[j])
                b = conj.cum[int(where[i + 1])] - ell * conj.cum[int(where[i])]
            else:
                d = T.translations[T.top.letter_of(mid)]
                b = conj.g_exact(lo + d) - ell * g_lo
            G.append(g_lo)
            slopes.append(ell)
            icepts.append(b)
            labels.append(a)
            used.append(lo)
            mins.append(float(min(mu.weights[int(j)] for j in inside) / mu.K))
        G[0] = Decimal(0)
        G.append(Decimal(1))
        used.append(T.length)
        resid: dict[str, float] = {}
        for a, s in measured_slopes(T, mu, conj, partition):
            resid[a] = max(resid.get(a, 0.0), abs(float(s / mu.slopes[a]) - 1.0))
        ends = sorted((slopes[k] * G[k] + icepts[k], slopes[k] * G[k + 1] + icepts[k]) for k in range(len(slopes)))
        defect = max([abs(ends[0][0]), abs(ends[-1][1] - 1)] +
                     [abs(q[0] - p[1]) for p, q in zip(ends, ends[1:])])
    f = AffineIem([float(x) for x in G], [float(x) for x in slopes], [float(x) for x in icepts], labels,
                  tol=max(1e-9, 2 * float(defect)))
    out = AffineSynthesis(f, G, slopes, icepts, tuple(labels), tuple(used), resid, mins, mu.precision,
                          float(defect))
    if tol is not None and not out.ok(tol):
        raise SlopeMismatchError(resid, tol)
    return out


def semiconjugacy_residual(T: Iem, syn: AffineSynthesis, conj: ConjugacyPair) -> dict:
    """max |h(f(s)) - T(h(s))| with s the centre of each gap whose atom's image is an atom.

    Evaluated in the exact arithmetic of the synthesis.
    """
    mu = conj.measure
    N = mu.N
    where = conj.where
    worst, at, fails = 0.0, None, 0
    with localcontext() as ctx:
        ctx.prec = mu.precision
        for i in range(len(mu) - 1):  # n = -N .. N-1
            k = int(where[i])
            s = (conj.cum[k] + conj.cum[k + 1]) / 2
            y = syn.evaluate_exact(s)
            x = float(conj.xs[conj.rank(y)])
            r = abs(x - T.evaluate(float(mu.positions[i])))
            if r > worst:
                worst, at = r, int(mu.ns[i])
            fails += r > 1e-9
    return {"max_residual": worst, "at_n": at, "n_checked": len(mu) - 1, "n_failed": fails,
            "range": [-N, N - 1]}


def transport_check(T: Iem, mu: AtomicMeasure, partition: Partition | None = None, n_samples: int = 100,
                    seed: int = 0) -> dict:
    """mu(T J) / mu(J) against exp(-Re gamma_a) for random J = [x_i, x_j) between atoms.

    Intervals are drawn inside single continuity pieces of T refined by the partition.
    """
    partition = partition or T.top
    rng = np.random.default_rng(seed)
    pbreaks = common_breaks(T, partition)
    worst = 0.0
    done = 0
    order = np.argsort(mu.positions)
    xs = mu.positions[order]
    while done < n_samples:
        k = int(rng.integers(len(pbreaks) - 1))
        lo, hi = pbreaks[k], pbreaks[k + 1]
        inside = xs[(xs >= lo) & (xs < hi)]
        if len(inside) < 2:
            continue
        i, j = sorted(rng.choice(len(inside), 2, replace=False))
        a, b = float(inside[i]), float(inside[j])
        d = T.translations[T.top.letter_of((lo + hi) / 2)]
        letter = partition.letter_of((lo + hi) / 2)
        with localcontext() as ctx:
            ctx.prec = mu.precision
            ratio = mu.mass(a + d, b + d) / mu.mass(a, b)
            worst = max(worst, abs(float(ratio / mu.slopes[letter]) - 1.0))
        done += 1
    return {"n_samples": n_samples, "max_relative_error": worst}


# ---------------------------------------------------------------- wandering

@dataclass
class WanderingReport:
    atom_n: int
    gap: tuple[float, float]
    n_orbit: int
    disjoint: bool
    overlap: tuple[int, int] | None
    total_length: float
    collapse_ok: bool
    product_error: float
    intervals: list = field(default_factory=list)  # (n, lo, hi) floats

    @property
    def ok(self) -> bool:
        return self.disjoint and self.total_length <= 1.0 and self.collapse_ok

    def to_dict(self) -> dict:
        return {"atom_n": self.atom_n, "gap": [repr(x) for x in self.gap], "n_orbit": self.n_orbit,
                "disjoint": self.disjoint, "overlap": list(self.overlap) if self.overlap else None,
                "total_length": repr(self.total_length), "collapse_ok": self.collapse_ok,
                "product_error": repr(self.product_error), "ok": self.ok}


def verify_wandering(T: Iem, syn: AffineSynthesis, conj: ConjugacyPair, atom: int | None = None,
                     n_orbit: int = 500) -> WanderingReport:
    """Iterate the gap of ``atom`` (measure index; default the heaviest) under f and f^-1.

    The images are checked for pairwise disjointness, for total length at most
    1, and for collapsing under h onto the orbit of the atom under T.
    """
    mu = conj.measure
    atom = conj.largest_gap() if atom is None else atom
    n0 = int(mu.ns[atom])
    lo0, hi0 = conj.gap_of_atom(atom)
    ivs = {0: (lo0, hi0)}
    collapse = True
    prod_err = 0.0
    Tinv = T.inverse()
    with localcontext() as ctx:
        ctx.prec = mu.precision
        width0 = hi0 - lo0
        for sign in (1, -1):
            lo, hi = lo0, hi0
            x = float(mu.positions[atom])
            scale = Decimal(1)
            for step in range(1, n_orbit + 1):
                # pieces are chosen at the centre: an endpoint may sit inside the tiling defect
                mid = (lo + hi) / 2
                if sign > 0:
                    k = syn.piece_of(mid)
                    lo, hi = syn.slopes[k] * lo + syn.intercepts[k], syn.slopes[k] * hi + syn.intercepts[k]
                    scale *= syn.slopes[k]
                    x = T.evaluate(x)
                else:
                    k = syn.piece_of(syn.inverse_exact(mid))
                    lo, hi = (lo - syn.intercepts[k]) / syn.slopes[k], (hi - syn.intercepts[k]) / syn.slopes[k]
                    scale /= syn.slopes[k]
                    x = Tinv.evaluate(x)
                ivs[sign * step] = (lo, hi)
                # h must send the whole image to T^n of the atom
                inner = hi - (hi - lo) / 1000
                if conj.h(lo + (hi - lo) / 1000) != x or conj.h(inner) != x:
                    collapse = False
                prod_err = max(prod_err, abs(float((hi - lo) / (width0 * scale)) - 1.0))
        items = sorted(ivs.items(), key=lambda kv: kv[1][0])
        overlap = None
        # rounding drift of the exact iteration is far below this; real overlaps are gap-sized
        slack = Decimal(10) ** -(mu.precision // 2)
        for (n1, (a1, b1)), (n2, (a2, b2)) in zip(items, items[1:]):
            if a2 < b1 - slack:
                overlap = (n1, n2)
                break
        total = float(sum((b - a for _, (a, b) in items), Decimal(0)))
    intervals = [(n, float(a), float(b)) for n, (a, b) in sorted(ivs.items())]
    return WanderingReport(n0, (float(lo0), float(hi0)), n_orbit, overlap is None, overlap, total,
                           collapse, prod_err, intervals)


def slope_orthogonality(slopes: Sequence[float], lengths: Sequence[float]) -> float:
    """|<log slopes, lengths>|."""
    ell = np.asarray(slopes, dtype=float)
    if (ell <= 0).any():
        raise ValueError("slopes must be positive")
    return abs(float(np.dot(np.log(ell), np.asarray(lengths, dtype=float))))


# ---------------------------------------------------------------- pipeline

@dataclass
class PipelineResult:
    measure: AtomicMeasure
    conjugacy: ConjugacyPair
    synthesis: AffineSynthesis
    semiconjugacy: dict
    wandering: WanderingReport
    orthogonality: float

    def report(self) -> dict:
        return {
            "measure": self.measure.summary(),
            "affine": self.synthesis.report(),
            "semiconjugacy": {k: (repr(v) if isinstance(v, float) else v) for k, v in self.semiconjugacy.items()},
            "wandering": self.wandering.to_dict(),
            "orthogonality": repr(self.orthogonality),
        }


def run_pipeline(T: Iem, partition: Partition, window: TwoSidedWindow, gamma: Mapping[str, complex],
                 lengths: Sequence[float], N: int, n_orbit: int = 500) -> PipelineResult:
    mu = build_measure(T, window, gamma, N, partition)
    conj = build_conjugacy(mu)
    syn = synthesize_affine(T, mu, conj, partition)
    semi = semiconjugacy_residual(T, syn, conj)
    wr = verify_wandering(T, syn, conj, n_orbit=min(n_orbit, N))
    ell = [float(mu.slopes[a]) for a in partition.letters]
    orth = slope_orthogonality(ell, lengths)
    return PipelineResult(mu, conj, syn, semi, wr, orth)
