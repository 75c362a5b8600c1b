"""The cubic Arnoux-Yoccoz interval exchange and everything attached to it.

Field constants are exact :class:`CubicNumber` values with ``b`` standing for
the complex root beta of t^3 + t^2 + t - 1.
"""
from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import fractal as fr
from . import minimal as mn
from . import wandering as wd
from .iem import Iem, Partition, self_similarity_check
from .numberfield import ALPHA, BETA, CubicNumber, char_poly, eigen_pair, poly_mul, squarefree_decomposition
from .substitution import PssPath, Substitution

LETTERS = tuple("123456789")
SIGMA = Substitution({"1": "35", "2": "45", "3": "46", "4": "17", "5": "18", "6": "19",
                      "7": "29", "8": "2", "9": "3"}, LETTERS)
M_AY = SIGMA.abelianization()

b = CubicNumber.t()
B_INV = b.inv()
HALF = Fraction(1, 2)

GAMMA_EXACT = {
    "1": b * b + b + 1,
    "2": -b,
    "3": -b,
    "4": -b * b - b - 1,
    "5": b + 1,
    "6": b + 1,
    "7": -b * b - b - 2,
    "8": CubicNumber(-1),
    "9": CubicNumber(-1),
}
GAMMA = {a: g.embed_beta() for a, g in GAMMA_EXACT.items()}

# (1 - t^3)(t^3 + t^2 + t - 1)(-t^3 + t^2 + t + 1), lowest degree first
CHAR_POLY_FACTORS = ((1, 0, 0, -1), (-1, 1, 1, 1), (1, 1, 1, -1))
ROTATION = (ALPHA + ALPHA * ALPHA) / 2


def char_poly_expected() -> list[int]:
    p = [1]
    for f in CHAR_POLY_FACTORS:
        p = poly_mul(p, list(f))
    return [int(c) for c in p]


def gamma(theta: float = 0.0) -> dict[str, complex]:
    """The eigenvector rotated by e^{i theta}."""
    w = cmath.exp(1j * theta)
    return {a: w * g for a, g in GAMMA.items()}


def system(theta: float = 0.0) -> fr.FractalSystem:
    return fr.FractalSystem(SIGMA, gamma(theta), BETA)


@dataclass
class EigenReport:
    char_poly: list[int]
    matches_factorization: bool
    eigenvector_exact: bool
    beta_simple: bool
    beta_error: float
    beta: complex

    def ok(self) -> bool:
        return self.matches_factorization and self.eigenvector_exact and self.beta_simple and self.beta_error < 5e-6

    def to_dict(self):
        return {"char_poly": [str(c) for c in self.char_poly], "matches_factorization": self.matches_factorization,
                "eigenvector_exact": self.eigenvector_exact, "beta_simple": self.beta_simple,
                "beta_error": repr(self.beta_error), "beta": [repr(self.beta.real), repr(self.beta.imag)]}


def gamma_is_exact_eigenvector() -> bool:
    for i, a in enumerate(LETTERS):
        row = sum((int(M_AY[i, j]) * GAMMA_EXACT[c] for j, c in enumerate(LETTERS)), CubicNumber(0))
        if row - b * GAMMA_EXACT[a] != CubicNumber(0):
            return False
    return True


def beta_is_simple_root() -> bool:
    """The minimal polynomial divides char_poly exactly once."""
    parts = squarefree_decomposition(char_poly(M_AY))
    mp = [Fraction(c) for c in (-1, 1, 1, 1)]
    for mult, factor in parts.items():
        q, r = _divmod(factor, mp)
        if not any(r):
            return mult == 1
    return False


def _divmod(p, q):
    from .numberfield import _poly_divmod
    return _poly_divmod(p, q)


def eigen_report() -> EigenReport:
    cp = char_poly(M_AY)
    ep = eigen_pair(M_AY, complex(-0.77, 1.11))
    return EigenReport(cp, cp == char_poly_expected(), gamma_is_exact_eigenvector(), beta_is_simple_root(),
                       abs(ep.eigenvalue - complex(-0.771845, 1.11514)), ep.eigenvalue)


# ---------------------------------------------------------------------------
# the map


def half_exchange(t0: float, t1: float, t: float) -> float:
    """Swap the two halves of [t0, t1); identity elsewhere."""
    m, h = (t0 + t1) / 2, (t1 - t0) / 2
    if t0 <= t < m:
        return t + h
    if m <= t < t1:
        return t - h
    return t


def ay_map(t: float) -> float:
    if not 0.0 <= t < 1.0:
        raise ValueError(f"{t!r} outside [0, 1)")
    a = ALPHA
    t = half_exchange(a + a * a, 1.0, t)
    t = half_exchange(a, a + a * a, t)
    t = half_exchange(0.0, a, t)
    return half_exchange(0.0, 1.0, t)


def continuity_breaks() -> list[float]:
    a = ALPHA
    inner = sorted([(1 - a) / 2, a / 2, a, a + a * a / 2, a + a * a, a + a * a + a ** 3 / 2])
    return [0.0] + inner + [1.0]


@lru_cache(maxsize=1)
def ay_iem() -> Iem:
    """The map as a 7-interval exchange, letters A..G from left to right."""
    return Iem.from_function(ay_map, continuity_breaks(), list("ABCDEFG"))


def perron_lengths() -> np.ndarray:
    ep = eigen_pair(M_AY.T, 1.84)
    v = np.abs(np.real(ep.eigenvector))
    return v / v.sum()


@lru_cache(maxsize=1)
def ay_partition() -> Partition:
    """Nine-interval partition whose return-word coding is sigma.

    Lengths come from the Perron vector.  All orderings of the lengths (and
    all labellings among equal lengths) are tried; the rescaling includes the
    rotation by ROTATION.  Exactly one configuration is expected.
    """
    sols = search_partitions()
    if len(sols) != 1:
        raise RuntimeError(f"expected a unique compatible partition, found {len(sols)}")
    return sols[0]


def search_partitions() -> list[Partition]:
    T = ay_iem()
    lam = perron_lengths()
    a = ALPHA

    def phi_inv(y):
        return ((y - ROTATION) % 1.0) * a

    keyed = [round(float(x), 9) for x in lam]
    groups: dict[float, list[int]] = {}
    for k, v in enumerate(keyed):
        groups.setdefault(v, []).append(k)
    exact = {v: float(lam[ks[0]]) for v, ks in groups.items()}
    found = []
    for seq in sorted(set(itertools.permutations(keyed))):
        lens = [exact[v] for v in seq]
        cum = np.concatenate([[0.0], np.cumsum(lens)])
        cum[-1] = 1.0
        words = []
        ok = True
        for j in range(9):
            ws = set()
            for f in (0.02, 0.5, 0.98):
                x = phi_inv(cum[j] + f * lens[j])
                w = [int(np.searchsorted(cum, x, side="right")) - 1]
                z = T.evaluate(x)
                while z >= a:
                    w.append(int(np.searchsorted(cum, z, side="right")) - 1)
                    z = T.evaluate(z)
                ws.add(tuple(w))
            if len(ws) != 1:
                ok = False
                break
            words.append(ws.pop())
        if not ok:
            continue
        positions: dict[float, list[int]] = {}
        for j, v in enumerate(seq):
            positions.setdefault(v, []).append(j)
        keys = list(positions)
        for combo in itertools.product(*[itertools.permutations(groups[v]) for v in keys]):
            lab = [0] * 9
            for v, perm in zip(keys, combo):
                for j, k in zip(positions[v], perm):
                    lab[j] = k
            if all("".join(LETTERS[lab[i]] for i in words[j]) == SIGMA[LETTERS[lab[j]]] for j in range(9)):
                letters = tuple(LETTERS[k] for k in lab)
                found.append(Partition(tuple(cum), letters))
    return found


def self_similarity(n_samples: int = 2000):
    """First return to [0, alpha) against the map conjugated by x -> (x/alpha + r) mod 1."""
    return self_similarity_check(ay_iem(), ALPHA, ay_partition(), rotation=ROTATION, n_samples=n_samples)


# ---------------------------------------------------------------------------
# tribonacci fractal


def _check_digits(digits) -> list[int]:
    d = [int(x) for x in digits]
    if any(x not in (0, 1) for x in d):
        raise ValueError("digits must be 0 or 1")
    s = "".join(map(str, d))
    if "111" in s:
        raise ValueError("three consecutive 1's: not a valid representation")
    return d


def trib_value(digits) -> complex:
    """sum_{m>=3} beta^-m a_{m-2} for a finite digit list a_1 a_2 ..."""
    d = _check_digits(digits)
    z, coef = 0j, BETA ** -2
    for x in d:
        coef = coef / BETA
        if x:
            z += coef
    return z


def trib_shift(digits, value: complex) -> complex:
    """Value of the shifted digit sequence predicted from the first digit."""
    d = _check_digits(digits)
    if d and d[0] == 1:
        return BETA * (value - BETA ** -3)
    return BETA * value


def trib_words(n: int) -> list[tuple[int, ...]]:
    out = [()]
    for _ in range(n):
        out = [w + (x,) for w in out for x in (0, 1) if not (x == 1 and w[-2:] == (1, 1))]
    return out


def trib_cloud(n: int) -> np.ndarray:
    """Values of all length-n digit words without three consecutive 1's."""
    vals = np.zeros(1, dtype=complex)
    tails = np.zeros(1, dtype=np.int64)  # number of trailing 1's
    coef = BETA ** -2
    for _ in range(n):
        coef = coef / BETA
        v0, t0 = vals, np.zeros_like(tails)
        ok = tails < 2
        v1, t1 = vals[ok] + coef, tails[ok] + 1
        vals = np.concatenate([v0, v1])
        tails = np.concatenate([t0, t1])
    return vals


# kappa maps as (constant, linear coefficient) pairs
Z0_EXACT = B_INV ** 4 / (1 - B_INV ** 3)
KAPPA_EXACT = {
    0: (B_INV ** 4, B_INV ** 3),
    1: (B_INV ** 4 + B_INV ** 6 + B_INV ** 10 / (1 - B_INV ** 3), -(B_INV ** 4)),
    2: (B_INV ** 3 + B_INV ** 4, B_INV ** 3),
}
KAPPA = {k: (c.embed_beta(), m.embed_beta()) for k, (c, m) in KAPPA_EXACT.items()}
Z0 = Z0_EXACT.embed_beta()


def kappa_fixed_exact(digit: int) -> CubicNumber:
    c, m = KAPPA_EXACT[digit]
    return c / (1 - m)


K_END_EXACT = kappa_fixed_exact(2) - Z0_EXACT  # kappa(1) - z0
K_END = K_END_EXACT.embed_beta()


def base3_digits(t: float, d: int) -> list[int]:
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    if t == 1.0:
        return [2] * d
    out = []
    for _ in range(d):
        t *= 3
        k = min(int(t), 2)
        out.append(k)
        t -= k
    return out


def kappa(t: float, d: int = 40) -> complex:
    """d-fold composition of the kappa maps (digits of t in base 3) applied to z0."""
    z = Z0
    for k in reversed(base3_digits(t, d)):
        c, m = KAPPA[k]
        z = c + m * z
    return z


def kappa_contraction() -> float:
    return max(abs(m) for _, m in KAPPA.values())


def k_samples(d: int, ordered: bool = True) -> np.ndarray:
    """Points of K = kappa([0,1]) - z0 from all base-3 words of length d.

    Each word is applied to z0 and to the fixed point of kappa_2, so the
    sample set is invariant under z -> kappa(1) - z.  With ``ordered`` the
    points follow the parameter t.
    """
    starts = np.array([Z0, kappa_fixed_exact(2).embed_beta()])
    pts = starts.copy().reshape(1, 2)
    for _ in range(d):
        # prepend a digit: new = kappa_k(old); digit order becomes most significant first
        pts = np.concatenate([KAPPA[k][0] + KAPPA[k][1] * pts for k in (0, 1, 2)])
    pts = pts - Z0
    if ordered:
        # row r holds the word with base-3 value r; column 0 sits at t = r/3^d, column 1 at (r+1)/3^d
        return pts.reshape(-1)
    return pts.reshape(-1)


def k_polyline(d: int) -> np.ndarray:
    rows = k_samples(d).reshape(-1, 2)
    return np.concatenate([rows[:, 0], rows[-1:, 1]])


# ---------------------------------------------------------------------------
# boundary curves

_C1 = [(-1, CubicNumber(0)), (-2, b * b + b + 1), (0, (3 * b * b + 4 * b + 3) * HALF),
       (-2, (3 * b * b + 4 * b + 3) * HALF), (-1, (b * b + 2 * b + 1) * HALF), (0, (b * b + 2 * b + 1) * HALF)]
_C2 = [(0, CubicNumber(0)), (1, -b), (0, (b * b + 1) * HALF), (1, (b * b + 1) * HALF)]
_C4 = [(1, CubicNumber(0)), (-1, b + 1), (-3, b + 1), (-2, -b * b - b - 1),
       (-2, (b * b + 2 * b + 3) * HALF), (-1, (b * b + 2 * b + 3) * HALF)]
_C5 = [(1, CubicNumber(0)), (-1, b + 1), (1, (b * b + 2 * b + 3) * HALF), (-1, (b * b + 2 * b + 3) * HALF)]
_C7 = [(-1, CubicNumber(0)), (0, CubicNumber(-1)), (-2, CubicNumber(-1)), (-1, -b * b - b - 2),
       (-2, (b * b + 2 * b + 1) * HALF), (0, (b * b + 2 * b + 1) * HALF)]
# third piece is a scaled copy of K (follows from C8 = beta^-1 C2)
_C8 = [(-1, CubicNumber(0)), (0, CubicNumber(-1)), (-1, (b * b + 2 * b + 1) * HALF), (0, (b * b + 2 * b + 1) * HALF)]
BOUNDARY_SEGMENTS = {"1": _C1, "2": _C2, "3": _C2, "4": _C4, "5": _C5, "6": _C5, "7": _C7, "8": _C8, "9": _C8}


@dataclass
class Segment:
    power: int  # the piece is beta^power K + shift
    shift: CubicNumber
    reversed: bool  # traversed from beta^power * K_END + shift to shift

    def endpoints(self) -> tuple[CubicNumber, CubicNumber]:
        p, q = self.shift, b ** self.power * K_END_EXACT + self.shift
        return (q, p) if self.reversed else (p, q)


@dataclass
class BoundaryCurve:
    letter: str
    segments: list[Segment]
    polyline: np.ndarray = field(repr=False)
    closed: bool = False
    joints_ok: bool = False

    @property
    def n_segments(self) -> int:
        return len(self.segments)


def boundary_curve(a: str, depth: int = 7) -> BoundaryCurve:
    """Closed polyline through the pieces of the boundary of the fractal of ``a``.

    Each piece is oriented so that it starts where the previous one ends;
    the joints are checked exactly in the field.
    """
    if a not in BOUNDARY_SEGMENTS:
        raise ValueError(f"unknown letter {a!r}")
    base = k_polyline(depth)
    segs: list[Segment] = []
    joints_ok = True
    current = CubicNumber(0)
    for k, shift in BOUNDARY_SEGMENTS[a]:
        fwd = Segment(k, shift, False)
        if fwd.endpoints()[0] == current:
            seg = fwd
        else:
            seg = Segment(k, shift, True)
            if seg.endpoints()[0] != current:
                joints_ok = False
        segs.append(seg)
        current = seg.endpoints()[1]
    closed = current == CubicNumber(0)
    parts = []
    for s in segs:
        pts = BETA ** s.power * base + s.shift.embed_beta()
        parts.append(pts[::-1] if s.reversed else pts)
    return BoundaryCurve(a, segs, np.concatenate(parts), closed, joints_ok)


# ---------------------------------------------------------------------------
# IFS

# left letter -> list of (right letter, translation); the union is of beta^-1 (t + F_c)
IFS = {
    "1": [("2", CubicNumber(0)), ("5", -b)],
    "2": [("4", CubicNumber(0)), ("5", -B_INV)],
    "4": [("1", CubicNumber(0)), ("7", B_INV)],
    "5": [("1", CubicNumber(0)), ("8", B_INV)],
    "7": [("2", CubicNumber(0)), ("8", -b)],
    "8": [("2", CubicNumber(0))],
}
EQUALITIES = [("2", "3"), ("5", "6"), ("8", "9")]


@dataclass
class IfsReport:
    depth: int
    C: float
    bound: float
    residuals: dict
    lagged_residuals: dict
    equalities: dict
    ratios: dict
    ok: bool

    def to_dict(self):
        f = lambda d: {k: repr(float(v)) for k, v in d.items()}
        return {"depth": self.depth, "C": repr(self.C), "bound": repr(self.bound), "residuals": f(self.residuals),
                "lagged_residuals": f(self.lagged_residuals), "equalities": f(self.equalities),
                "ratios": f(self.ratios), "ok": self.ok}


def cloud_radius(depth: int = 16, sys: fr.FractalSystem | None = None) -> float:
    sys = sys or system()
    return float(max(np.abs(fr.cloud(a, depth, sys).points).max() for a in LETTERS))


def ifs_residuals(n: int, sys: fr.FractalSystem | None = None, lag: int = 0) -> dict[str, float]:
    """Hausdorff distance between cloud(a, n) and the union of beta^-1 (t + cloud(c, n - lag))."""
    sys = sys or system()
    clouds = {}

    def get(a, k):
        if (a, k) not in clouds:
            clouds[(a, k)] = fr.cloud(a, k, sys).points
        return clouds[(a, k)]

    out = {}
    for a, rhs in IFS.items():
        right = np.concatenate([(t.embed_beta() + get(c, n - lag)) / BETA for c, t in rhs])
        out[a] = fr.hausdorff(get(a, n), right)
    return out


def verify_ifs(n: int = 12, tol: float = 1e-9, c_depth: int = 16, ratio_from: int | None = None) -> IfsReport:
    """Six IFS equations and three equalities of fractals at depth n.

    The residual compares the depth-n cloud of the left side with the
    right side built from depth-n clouds, which converges like |beta|^-n.
    Building the right side from depth n-1 reproduces the left cloud exactly
    and is reported as ``lagged_residuals``.
    """
    if n < 8:
        raise ValueError("depth must be at least 8")
    sys = system()
    C = cloud_radius(c_depth, sys)
    bound = C * abs(BETA) ** -n + tol
    res = ifs_residuals(n, sys)
    lag = ifs_residuals(n, sys, lag=1)
    eq = {f"{x}={y}": fr.hausdorff(fr.cloud(x, n, sys).points, fr.cloud(y, n, sys).points) for x, y in EQUALITIES}
    m = ratio_from if ratio_from is not None else n - 2
    prev = ifs_residuals(m, sys)
    ratios = {a: res[a] / prev[a] for a in res}
    lo, hi = abs(BETA) ** -(n - m) / 3, 3 * abs(BETA) ** -(n - m)
    ok = (all(r <= bound for r in res.values()) and all(r <= bound for r in lag.values())
          and all(r <= bound for r in eq.values()) and all(lo <= q <= hi for q in ratios.values()))
    return IfsReport(n, C, bound, res, lag, eq, ratios, ok)


# ---------------------------------------------------------------------------
# unique representation witnesses

E = ""
URP_CASES = {
    "1": [
        (PssPath("1", (("3", "5", E),)), CubicNumber(-1)),
        (PssPath("1", (("", "3", "5"), ("", "4", "6"), ("1", "7", E), ("", "2", "9"), ("", "4", "5")), period=3),
         (-b * b - 2 * b - 3) * HALF),
    ],
    "2": [
        (PssPath("2", (("4", "5", E),)), -b * b - 2 * b - 2),
        (PssPath("2", (("4", "5", E), ("1", "8", E))), b * b + b + 2),
    ],
    "3": [
        (PssPath("3", (("4", "6", E),)), -b * b - 2 * b - 2),
        (PssPath("3", (("4", "6", E), ("1", "9", E))), b * b + b + 2),
    ],
    "4": [
        (PssPath("4", (("1", "7", E),)), b * b + 2 * b + 2),
        (PssPath("4", (("", "1", "7"), ("3", "5", E))), -b * b - b - 1),
    ],
    "5": [
        (PssPath("5", (("1", "8", E),)), b * b + 2 * b + 2),
        (PssPath("5", (("", "1", "8"), ("3", "5", E), ("", "1", "8"),
                       ("", "3", "5"), ("4", "6", E), ("", "1", "9")), period=3), (3 * b * b + 6 * b + 7) * HALF),
    ],
    "6": [
        (PssPath("6", (("1", "9", E),)), b * b + 2 * b + 2),
        (PssPath("6", (("", "1", "9"), ("3", "5", E), ("", "1", "8"),
                       ("", "3", "5"), ("4", "6", E), ("", "1", "9")), period=3), (3 * b * b + 6 * b + 7) * HALF),
    ],
    "7": [
        (PssPath("7", (("2", "9", E),)), CubicNumber(-1)),
        (PssPath("7", (("", "2", "9"), ("4", "5", E), ("", "1", "8"),
                       ("", "3", "5"), ("4", "6", E), ("", "1", "9")), period=3), (b * b + 2 * b + 1) * HALF),
    ],
}


@dataclass
class MembershipCertificate:
    """An eventually periodic path rooted at ``letter`` with first triple ``first`` whose value is ``point``."""

    letter: str
    first: tuple[str, str, str]
    point: CubicNumber
    path: PssPath | None
    states: int

    @property
    def found(self) -> bool:
        return self.path is not None


def membership_certificate(point: CubicNumber, letter: str, first: tuple[str, str, str],
                           max_states: int = 200_000, cloud_depth: int = 10) -> MembershipCertificate:
    """Search for an exact representation of ``point`` in the subfractal ``first`` of ``letter``.

    States are pairs (letter c, w) asking whether w lies in the fractal of c;
    a state moves to (c', beta w - gamma(p')) for each splitting p' c' s' of
    sigma(c).  States whose beta-image is farther from the depth-``cloud_depth``
    cloud than the truncation tail cannot be members and are dropped.  Finitely
    many states survive, so a cycle yields an eventually periodic path.
    """
    sys = system()
    trees = {c: cKDTree(fr.cloud(c, cloud_depth, sys).xy()) for c in LETTERS}
    rb = abs(BETA)
    tail = sys.max_prefix * rb ** -cloud_depth / (rb - 1) + 1e-9

    def feasible(c, w):
        z = w.embed_beta()
        return trees[c].query([z.real, z.imag])[0] <= tail

    p, c, s = first
    if SIGMA[letter] != p + c + s:
        raise ValueError("first triple does not split sigma(letter)")
    start = (c, b * point - _gamma_word(p))
    color: dict = {}
    stack_states: list = []
    stack_triples: list = []
    count = 0

    def build(cycle_at):
        k = stack_states.index(cycle_at)
        triples = (first,) + tuple(stack_triples)
        return PssPath(letter, triples, period=len(stack_triples) - k)

    # iterative DFS
    if not feasible(*start):
        return MembershipCertificate(letter, first, point, None, 0)
    iters = [(start, iter(SIGMA.decompositions(start[0])))]
    color[start] = 1
    stack_states.append(start)
    while iters:
        state, it = iters[-1]
        t = next(it, None)
        if t is None:
            iters.pop()
            color[state] = 2
            stack_states.pop()
            if stack_triples:
                stack_triples.pop()
            continue
        nxt = (t.c, b * state[1] - _gamma_word(t.p))
        if color.get(nxt) == 2:
            continue
        stack_triples.append(t.as_tuple())
        if color.get(nxt) == 1:
            return MembershipCertificate(letter, first, point, build(nxt), count)
        if not feasible(*nxt):
            stack_triples.pop()
            continue
        count += 1
        if count > max_states:
            return MembershipCertificate(letter, first, point, None, count)
        color[nxt] = 1
        stack_states.append(nxt)
        iters.append((nxt, iter(SIGMA.decompositions(nxt[0]))))
    return MembershipCertificate(letter, first, point, None, count)


def _gamma_word(w: str) -> CubicNumber:
    return sum((GAMMA_EXACT[c] for c in w), CubicNumber(0))


@dataclass
class UrpRow:
    case: str
    witness: int
    path: PssPath
    expected: CubicNumber
    value: CubicNumber
    exact_match: bool
    distances: dict  # first-triple label -> distance to that subfractal cloud
    certificates: dict  # first-triple label -> bool

    def to_dict(self):
        return {"case": self.case, "witness": self.witness, "path": self.path.encode(),
                "expected": self.expected.to_json(), "value": self.value.to_json(), "exact_match": self.exact_match,
                "distances": {k: repr(v) for k, v in self.distances.items()},
                "certified_in": {k: v for k, v in self.certificates.items()}}


def _label(t) -> str:
    p, c, s = t
    return f"({p or 'e'},{c},{s or 'e'})"


def verify_urp_witnesses(depth: int = 14, certify: bool = True) -> list[UrpRow]:
    """Evaluate the 14 witnesses exactly and locate them in the two first-level subfractals."""
    sys = system()
    subs = {a: fr.subfractal_clouds(a, depth, sys) for a in URP_CASES}
    rows = []
    for a, ws in URP_CASES.items():
        for i, (path, expected) in enumerate(ws, start=1):
            if not path.check(SIGMA):
                raise ValueError(f"witness {i} of case {a} is not a valid chain")
            value = fr.value_of_path(path, GAMMA_EXACT, b)
            z = value.embed_beta()
            dist = {_label(t.as_tuple()): float(np.abs(pts - z).min()) for t, pts in subs[a]}
            cert = {}
            if certify:
                for t, _ in subs[a]:
                    cert[_label(t.as_tuple())] = membership_certificate(value, a, t.as_tuple()).found
            rows.append(UrpRow(a, i, path, expected, value, value == expected, dist, cert))
    return rows


# ---------------------------------------------------------------------------
# boundary lemmas


@dataclass
class BoundaryLemmaReport:
    depth: int
    separations: dict
    rauzy3: dict
    rauzy2: dict
    K_in_R: float
    symmetry: float
    decomposition: float
    ok: bool

    def to_dict(self):
        return {"depth": self.depth, "separations": {k: repr(v) for k, v in self.separations.items()},
                "rauzy3": self.rauzy3, "rauzy2": self.rauzy2, "K_in_R": repr(self.K_in_R),
                "symmetry": repr(self.symmetry), "decomposition": repr(self.decomposition), "ok": self.ok}


def _clusters(pts: np.ndarray, radius: float) -> int:
    if len(pts) == 0:
        return 0
    tree = cKDTree(np.column_stack([pts.real, pts.imag]))
    pairs = tree.query_pairs(radius, output_type="ndarray")
    from scipy.sparse import coo_matrix
    n = len(pts)
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)) if len(pairs) else coo_matrix((n, n))
    return int(connected_components(g, directed=False)[0])


def _close_points(A: np.ndarray, Bset: np.ndarray, tol: float) -> np.ndarray:
    tree = cKDTree(np.column_stack([Bset.real, Bset.imag]))
    d = tree.query(np.column_stack([A.real, A.imag]))[0]
    return A[d <= tol]


def _max_nearest(A: np.ndarray, Bset: np.ndarray) -> float:
    tree = cKDTree(np.column_stack([Bset.real, Bset.imag]))
    return float(tree.query(np.column_stack([A.real, A.imag]))[0].max())


def k_symmetry_residual(d: int) -> float:
    S = k_samples(d, ordered=False)
    return fr.hausdorff(S, K_END - S)


def k_decomposition_residual(d: int) -> float:
    S = k_samples(d, ordered=False)
    S1 = k_samples(d - 1, ordered=False)
    b3, b4 = BETA ** -3, BETA ** -4
    rhs = np.concatenate([b3 * S1, b4 * S1 + b3, b3 * S1 + b3])
    return fr.hausdorff(S, rhs)


def verify_boundary_lemmas(depth: int = 12, k_depth: int = 8, tol: float | None = None, margin: float = 1e-3,
                           cluster_radius: float = 1e-6) -> BoundaryLemmaReport:
    """Sampled evidence for the separation and intersection properties of the tribonacci pieces.

    ``depth`` is the digit length of the tribonacci cloud, ``k_depth`` the base-3
    word length for K.  ``tol`` defaults to the sampling resolution of both sets.
    """
    if depth < 10:
        raise ValueError("depth must be at least 10")
    rb = abs(BETA)
    R = trib_cloud(depth)
    r_tail = rb ** -(depth + 2) / (rb - 1)
    Kp = k_samples(k_depth, ordered=False) + Z0
    k_tail = kappa_contraction() ** k_depth * 2 * np.abs(Kp - Z0).max()
    if tol is None:
        tol = 2 * (r_tail + k_tail)
    seps = {
        "i": fr.set_distance(R, R + ((BETA ** 2 - 1) / 2)),
        "ii": fr.set_distance(Kp, R + (BETA ** 2 + 2 * BETA + 3) / 2),
        "iii": fr.set_distance(Kp, BETA ** -2 * R),
    }
    K = Kp - Z0
    r3 = {}
    for name, other in (("first", BETA * K + (BETA ** 2 + 1) / 2), ("second", BETA ** 2 * K + (1 - BETA ** 2) / 2)):
        close = _close_points(K, other, tol)
        r3[name] = {"nearest_to_zero": repr(float(np.abs(other).min())),
                    "close_radius": repr(float(np.abs(close).max()) if len(close) else 0.0)}
    A = K - 2 * BETA ** 2 - 3 * BETA - 4
    Bs = K + (-3 * BETA ** 2 - 4 * BETA - 7) / 2
    close = _close_points(A, Bs, cluster_radius)
    n_clusters = _clusters(close, max(cluster_radius, 10 * tol))
    r2 = {"close_points": int(len(close)), "clusters": n_clusters,
          "min_distance": repr(fr.set_distance(A, Bs))}
    K_in_R = max(_max_nearest(Kp, R), _max_nearest(Kp, R + 1 / BETA))
    sym = k_symmetry_residual(k_depth)
    dec = k_decomposition_residual(k_depth)
    ok = (all(v > margin for v in seps.values()) and n_clusters == 1 and sym <= 1e-8 and dec <= 1e-8
          and all(float(v["close_radius"]) <= 3 * tol + 1e-12 for v in r3.values()))
    return BoundaryLemmaReport(depth, seps, r3, r2, K_in_R, sym, dec, ok)


# ---------------------------------------------------------------- minimal windows and the affine map

SEED_PAIR = ("1", "2")
DEFAULT_THETA = 0.3


def window_power(n_min: int = 20, max_arg: float = 0.2) -> int:
    """Smallest exponent n >= n_min with beta0^n close to the positive real axis."""
    return mn.good_exponents(BETA, n_min + 200, max_arg, n_min)[0]


def minimal_window(theta: float = DEFAULT_THETA, radius: int = 10_000, n: int | None = None,
                   pair: tuple[str, str] | None = SEED_PAIR) -> mn.MinimalWindow:
    """Central crop of a minimal sequence for gamma(theta) seeded by ``pair``."""
    g = gamma(theta)
    seed = mn.find_seed_letters(g, SIGMA, pair=pair)
    n = window_power() if n is None else n
    return mn.minimal_window_central(SIGMA, g, BETA, seed, n, radius, theta=theta)


def wandering_pipeline(theta: float = DEFAULT_THETA, N: int = 5000, n_orbit: int = 500,
                       n: int | None = None) -> wd.PipelineResult:
    """Measure, conjugacy, affine map and wandering check for gamma(theta)."""
    mw = minimal_window(theta, radius=2 * N + 2, n=n)
    return wd.run_pipeline(ay_iem(), ay_partition(), mw.window, gamma(theta), perron_lengths(), N, n_orbit)
