"""Fractals built from prefix-suffix chains, their support functions and extreme points.

For a letter ``a`` the depth-n cloud collects ``sum_{m=1..n} beta^-m gamma(p_m)``
over all chains ``(p_m, c_m, s_m)`` rooted at ``a``.  ``v_a(tau)`` is the
minimum of ``Re(tau z)`` over the cloud.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .substitution import PssPath, PssTriple, Substitution, gamma_weight

CLUSTER_TOL = 1e-9
DEDUP_TOL = 1e-12


class CloudBudgetError(RuntimeError):
    pass


class FractalSystem:
    """Decomposition tables of a substitution with a complex weight vector."""

    def __init__(self, sigma: Substitution, gamma: Mapping[str, complex], beta: complex):
        self.sigma = sigma
        self.gamma = {a: complex(gamma[a]) for a in sigma.alphabet}
        self.beta = complex(beta)
        self.abs_beta = abs(self.beta)
        self.beta0 = self.beta / self.abs_beta
        self.letters = sigma.alphabet
        self.index = {a: i for i, a in enumerate(self.letters)}
        self.decs = {a: sigma.decompositions(a) for a in self.letters}
        self.prefix_weights = {a: [gamma_weight(t.p, self.gamma) + 0j for t in self.decs[a]] for a in self.letters}
        self.max_prefix = max(abs(w) for ws in self.prefix_weights.values() for w in ws)

    def scaled(self, z: complex) -> "FractalSystem":
        return FractalSystem(self.sigma, {a: z * g for a, g in self.gamma.items()}, self.beta)

    def tail_bound(self, k: int, n: int) -> float:
        """sum_{m=k+1..n} |beta|^-m * max |gamma(p)|."""
        r = 1.0 / self.abs_beta
        return self.max_prefix * sum(r ** m for m in range(k + 1, n + 1))

    def path_from_choices(self, a: str, choices: Sequence[int]) -> PssPath:
        triples, letter = [], a
        for j in choices:
            t = self.decs[letter][int(j)]
            triples.append(t.as_tuple())
            letter = t.c
        return PssPath(a, tuple(triples))

    def choices_from_path(self, path: PssPath) -> list[int]:
        out, letter = [], path.parent
        for p, c, s in path.triples:
            out.append(len(p))
            letter = c
        return out


# ---------------------------------------------------------------------------
# path values


def value_of_path(path: PssPath, gamma: Mapping, beta):
    """Sum of beta^-m gamma(p_m); closed form for eventually periodic paths.

    Works with complex numbers or exact field elements alike.
    """
    z = 0
    coef = 1
    head = path.triples[: path.preperiod]
    for p, _, _ in head:
        coef = coef / beta
        z = z + coef * gamma_weight(p, gamma)
    if not path.period:
        return z
    zp, cp = 0, 1
    for p, _, _ in path.triples[path.preperiod:]:
        cp = cp / beta
        zp = zp + cp * gamma_weight(p, gamma)
    return z + coef * zp / (1 - cp)


# ---------------------------------------------------------------------------
# clouds


@dataclass
class FractalCloud:
    letter: str
    depth: int
    points: np.ndarray  # complex, canonically sorted, deduplicated
    choices: np.ndarray  # (len(points), depth) decomposition indices
    system: FractalSystem = field(repr=False)

    def __len__(self):
        return len(self.points)

    def path(self, i: int) -> PssPath:
        return self.system.path_from_choices(self.letter, self.choices[i])

    def path_string(self, i: int) -> str:
        return "".join(f"({p or 'e'},{c},{s or 'e'})" for p, c, s in self.path(i).triples)

    def xy(self) -> np.ndarray:
        return np.column_stack([self.points.real, self.points.imag])


def _enumerate(system: FractalSystem, a: str, n: int, budget: int):
    letters = system.letters
    idx = system.index
    centers = np.array([idx[a]], dtype=np.int64)
    values = np.zeros(1, dtype=complex)
    choices = np.zeros((1, 0), dtype=np.int64)
    coef = 1.0 + 0j
    for _ in range(n):
        coef = coef / system.beta
        new_c, new_v, new_ch = [], [], []
        for li, letter in enumerate(letters):
            sel = np.nonzero(centers == li)[0]
            if sel.size == 0:
                continue
            for j, t in enumerate(system.decs[letter]):
                new_c.append(np.full(sel.size, idx[t.c], dtype=np.int64))
                new_v.append(values[sel] + coef * system.prefix_weights[letter][j])
                new_ch.append(np.column_stack([choices[sel], np.full(sel.size, j, dtype=np.int64)]))
        centers = np.concatenate(new_c)
        values = np.concatenate(new_v)
        choices = np.concatenate(new_ch)
        if values.size > budget:
            raise CloudBudgetError(
                f"cloud for {a!r} exceeds {budget} points at depth {choices.shape[1]}; use v_min (branch and bound)")
    return values, choices


def _dedup(values: np.ndarray, choices: np.ndarray, tol: float = DEDUP_TOL):
    # canonical order: lexicographic in choices first so the kept representative is stable
    order = np.lexsort(choices.T[::-1]) if choices.shape[1] else np.arange(len(values))
    values, choices = values[order], choices[order]
    key = np.column_stack([np.round(values.real / tol), np.round(values.imag / tol)]).astype(np.int64)
    _, first = np.unique(key, axis=0, return_index=True)
    first = np.sort(first)
    v, ch = values[first], choices[first]
    o = np.lexsort((v.imag, v.real))
    return v[o], ch[o]


def cloud(a: str, n: int, system: FractalSystem, budget: int = 5_000_000, dedup: bool = True) -> FractalCloud:
    if n < 0:
        raise ValueError("depth must be nonnegative")
    values, choices = _enumerate(system, a, n, budget)
    if dedup:
        values, choices = _dedup(values, choices)
    return FractalCloud(a, n, values, choices, system)


def subfractal_clouds(a: str, n: int, system: FractalSystem) -> list[tuple[PssTriple, np.ndarray]]:
    """beta^-1 (gamma(p) + cloud(c, n-1)) for each decomposition (p, c, s) of sigma(a)."""
    out = []
    for t, w in zip(system.decs[a], system.prefix_weights[a]):
        sub = cloud(t.c, n - 1, system)
        out.append((t, (w + sub.points) / system.beta))
    return out


def hausdorff(X, Y) -> float:
    """Symmetric Hausdorff distance between two finite planar point sets."""
    X = _as_xy(X)
    Y = _as_xy(Y)
    dx = cKDTree(Y).query(X)[0].max()
    dy = cKDTree(X).query(Y)[0].max()
    return float(max(dx, dy))


def set_distance(X, Y) -> float:
    X, Y = _as_xy(X), _as_xy(Y)
    return float(cKDTree(Y).query(X)[0].min())


def _as_xy(Z) -> np.ndarray:
    Z = np.asarray(Z)
    if np.iscomplexobj(Z) or Z.ndim == 1:
        Z = Z.astype(complex)
        return np.column_stack([Z.real, Z.imag])
    return Z


# ---------------------------------------------------------------------------
# support function and extreme points


@dataclass
class ExtremeReport:
    letter: str
    depth: int
    tau: complex
    value: float
    argmins: list[tuple[tuple[int, ...], complex]]
    labels: list[tuple[str, str, str]]

    def to_dict(self):
        return {
            "letter": self.letter,
            "depth": self.depth,
            "tau": [repr(self.tau.real), repr(self.tau.imag)],
            "value": repr(self.value),
            "argmins": [{"choices": list(ch), "point": [repr(z.real), repr(z.imag)]} for ch, z in self.argmins],
            "labels": [list(t) for t in self.labels],
        }


def direction(theta: float) -> complex:
    return cmath.exp(1j * theta)


def v_min(a: str, n: int, tau: complex, system: FractalSystem, cluster_tol: float = CLUSTER_TOL) -> ExtremeReport:
    """Branch-and-bound minimum of Re(tau z) over the depth-n cloud of ``a``."""
    if n < 1:
        raise ValueError("depth must be at least 1")
    tau = complex(tau)
    beta = system.beta
    tails = [system.tail_bound(k, n) for k in range(n + 1)]
    best = [0.0]  # the all-empty-prefix path has value 0
    found: list[tuple[float, tuple[int, ...], complex]] = []
    decs, weights = system.decs, system.prefix_weights
    path: list[int] = []

    def dfs(letter: str, k: int, z: complex, coef: complex):
        if k == n:
            r = (tau * z).real
            if r <= best[0] + cluster_tol:
                if r < best[0]:
                    best[0] = r
                found.append((r, tuple(path), z))
            return
        c2 = coef / beta
        for j, t in enumerate(decs[letter]):
            z2 = z + c2 * weights[letter][j]
            if (tau * z2).real - tails[k + 1] > best[0] + cluster_tol:
                continue
            path.append(j)
            dfs(t.c, k + 1, z2, c2)
            path.pop()

    dfs(a, 0, 0j, 1 + 0j)
    val = min(r for r, _, _ in found)
    keep = sorted({(ch, z) for r, ch, z in found if r <= val + cluster_tol})
    labels = [system.decs[a][ch[0]].as_tuple() for ch, _ in keep]
    return ExtremeReport(a, n, tau, val, [(ch, z) for ch, z in keep], labels)


def v_exhaustive(a: str, n: int, tau: complex, system: FractalSystem) -> float:
    """Unpruned depth-first minimum with the same summation order as :func:`v_min`."""
    tau = complex(tau)
    best = math.inf

    def dfs(letter, k, z, coef):
        nonlocal best
        if k == n:
            best = min(best, (tau * z).real)
            return
        c2 = coef / system.beta
        for j, t in enumerate(system.decs[letter]):
            dfs(t.c, k + 1, z + c2 * system.prefix_weights[letter][j], c2)

    dfs(a, 0, 0j, 1 + 0j)
    return best


def support_values(n: int, taus, system: FractalSystem) -> dict[str, np.ndarray]:
    """v_b^(n)(tau) for all letters b and an array of directions, by dynamic programming.

    Uses v_a^(n)(tau) = min_(p,c,s) [Re(tau beta^-1 gamma(p)) + |beta|^-1 v_c^(n-1)(tau beta0^-1)].
    """
    taus = np.asarray(taus, dtype=complex)
    rot = [taus / system.beta0 ** k for k in range(n + 1)]
    vals = {b: np.zeros_like(taus, dtype=float) for b in system.letters}
    for level in range(1, n + 1):
        t = rot[n - level]
        new = {}
        for b in system.letters:
            cands = [(t * w / system.beta).real + vals[d.c] / system.abs_beta
                     for d, w in zip(system.decs[b], system.prefix_weights[b])]
            new[b] = np.min(cands, axis=0)
        vals = new
    return vals


def support_function(a: str, n: int, taus, system: FractalSystem) -> np.ndarray:
    return support_values(n, taus, system)[a]


# ---------------------------------------------------------------------------
# checks on extreme points


@dataclass
class CheckResult:
    ok: bool
    residual: float
    offending: object = None
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {"ok": self.ok, "residual": self.residual,
                "offending": None if self.offending is None else str(self.offending), **self.details}


def continuation_check(report: ExtremeReport, system: FractalSystem, tol: float = 1e-9) -> CheckResult:
    """Shifted argmins are argmins one level down in the rotated direction."""
    n = report.depth
    if n < 2:
        return CheckResult(True, 0.0)
    tau2 = report.tau / system.beta0
    worst, bad = 0.0, None
    cache: dict[str, float] = {}
    for ch, z in report.argmins:
        t1 = system.decs[report.letter][ch[0]]
        c1 = t1.c
        if c1 not in cache:
            cache[c1] = v_min(c1, n - 1, tau2, system).value
        v_low = cache[c1]
        shifted = system.path_from_choices(c1, ch[1:])
        z_low = value_of_path(shifted, system.gamma, system.beta)
        r1 = (tau2 * z_low).real - v_low
        lhs = (report.tau * z).real
        rhs = (report.tau * system.prefix_weights[report.letter][ch[0]] / system.beta).real + v_low / system.abs_beta
        r2 = abs(lhs - rhs)
        r = max(r1, r2)
        if r > worst:
            worst, bad = r, ch
    return CheckResult(worst <= tol, float(worst), None if worst <= tol else bad)


def exp_approx_check(a: str, tau: complex, n_max: int, system: FractalSystem, n_min: int = 1,
                     c_bound: float | None = None, n_dirs: int = 256) -> CheckResult:
    """Table of |v^(n) - v^(n_max)| against |beta|^-n.

    ``c_bound`` defaults to max over letters and a direction grid of -v_b^(n_max),
    the constant for which the bound is expected to hold.
    """
    vs = {n: float(support_function(a, n, [tau], system)[0]) for n in range(n_min, n_max + 1)}
    ref = vs[n_max]
    rows = [(n, abs(vs[n] - ref), abs(vs[n] - ref) * system.abs_beta ** n) for n in range(n_min, n_max + 1)]
    c_est = max(r[2] for r in rows)
    if c_bound is None:
        grid = np.exp(2j * np.pi * np.arange(n_dirs) / n_dirs)
        allv = support_values(n_max, grid, system)
        c_bound = float(max(-allv[b].min() for b in system.letters))
    ok = math.isfinite(c_est) and c_est <= c_bound * (1 + 1e-9) + 1e-12
    return CheckResult(ok, c_est, None, {"C_est": c_est, "C_bound": c_bound,
                                         "table": [[n, d, r] for n, d, r in rows]})


@dataclass
class PsiCandidate:
    theta: float
    labels: tuple[tuple[str, str, str], tuple[str, str, str]]
    separation: float
    gap: float

    def to_dict(self):
        return {"theta": repr(self.theta), "labels": [list(l) for l in self.labels],
                "separation": repr(self.separation), "gap": repr(self.gap)}


def _hull_vertices(points: np.ndarray) -> np.ndarray:
    pts = np.unique(np.round(points, 13))
    if len(pts) < 4:
        return pts
    try:
        hull = ConvexHull(np.column_stack([pts.real, pts.imag]))
    except QhullError:
        return pts
    return pts[hull.vertices]


def psi_scan(a: str, thetas, n: int, system: FractalSystem, gap_tol: float = 1e-7,
             cluster_tol: float = CLUSTER_TOL, bisect_steps: int = 60) -> list[PsiCandidate]:
    """Directions where two different first-level subfractals both attain the minimum.

    Looks for sign changes of the winning subfractal along the grid and
    bisects each switch.  Candidates whose two argmin clusters coincide
    (separation below ``cluster_tol``) are dropped: the extreme point is shared.
    """
    subs = subfractal_clouds(a, n, system)
    if len(subs) < 2:
        return []
    hulls = [_hull_vertices(pts) for _, pts in subs]
    labels = [t.as_tuple() for t, _ in subs]

    def mins(theta):
        tau = cmath.exp(1j * theta)
        return np.array([(tau * h).real.min() for h in hulls])

    thetas = np.asarray(sorted(thetas), dtype=float)
    winners = [int(np.argmin(mins(t))) for t in thetas]
    found = []
    for i in range(len(thetas)):
        j = (i + 1) % len(thetas)
        if winners[i] == winners[j]:
            continue
        lo, hi = thetas[i], thetas[j] if j else thetas[0] + 2 * np.pi
        wl, wh = winners[i], winners[j]
        for _ in range(bisect_steps):
            mid = (lo + hi) / 2
            w = int(np.argmin(mins(mid)))
            if w == wl:
                lo = mid
            elif w == wh:
                hi = mid
            else:
                hi, wh = mid, w
        theta = float(((lo + hi) / 2) % (2 * np.pi))
        m = mins(theta)
        gap = abs(m[wl] - m[wh])
        if gap > gap_tol:
            continue
        tau = cmath.exp(1j * theta)
        cl = [h[(tau * h).real <= m[k] + max(gap_tol, cluster_tol)] for k, h in ((wl, hulls[wl]), (wh, hulls[wh]))]
        sep = float(np.min(np.abs(cl[0][:, None] - cl[1][None, :])))
        if sep <= cluster_tol:
            continue
        found.append(PsiCandidate(theta, (labels[wl], labels[wh]), sep, float(gap)))
    found.sort(key=lambda c: c.theta)
    return found


def reverse_prefix_suffix(triples: Sequence[tuple[str, str, str]], k: int, top: str | None = None,
                          sigma: Substitution | None = None, extend_to: int | None = None) -> PssPath:
    """Path (p_{k-1}, c_{k-1}, s_{k-1}), ..., (p_0, c_0, s_0) rooted at c_k.

    ``triples[m]`` is (p_m, c_m, s_m).  ``top`` is the letter above the last
    triple and is needed when k equals the chain length.  With ``sigma`` and
    ``extend_to`` the path is continued by empty prefixes.
    """
    triples = [tuple(t) for t in triples]
    if not 1 <= k <= len(triples):
        raise ValueError("k must lie in 1..len(chain)")
    parent = triples[k][1] if k < len(triples) else top
    if parent is None:
        raise ValueError("the letter above the chain is required")
    rev = tuple(reversed(triples[:k]))
    if sigma is not None:
        letter = parent
        for p, c, s in rev:
            if sigma[letter] != p + c + s:
                raise ValueError("invalid chain: triples do not decompose the images above them")
            letter = c
    path = PssPath(parent, rev)
    if extend_to is not None:
        path = path.extend_empty(sigma, extend_to)
    return path


@dataclass
class DerivativeReport:
    right: list[float]
    left: list[float]
    expected_right: float
    expected_left: float
    residuals: list[float]
    kink: float

    def to_dict(self):
        return {"right": self.right, "left": self.left, "expected_right": self.expected_right,
                "expected_left": self.expected_left, "residuals": self.residuals, "kink": self.kink}


def one_sided_derivative_check(a: str, tau: complex, n: int, h_list: Sequence[float], system: FractalSystem,
                               cluster_tol: float = CLUSTER_TOL) -> DerivativeReport:
    """Finite differences of theta -> v(tau e^{i theta}) against -Im(tau e+-)."""
    cl = cloud(a, n, system)
    pts = cl.points
    tau = complex(tau)
    proj = (tau * pts).real
    v0 = proj.min()
    arg = pts[proj <= v0 + cluster_tol]
    ims = (tau * arg).imag
    e_plus, e_minus = ims.max(), ims.min()
    right, left, res = [], [], []
    for h in h_list:
        vp = (tau * cmath.exp(1j * h) * pts).real.min()
        vm = (tau * cmath.exp(-1j * h) * pts).real.min()
        dr = (vp - v0) / h
        dl = (vm - v0) / (-h)
        right.append(float(dr))
        left.append(float(dl))
        res.append(float(max(abs(dr + e_plus), abs(dl + e_minus))))
    return DerivativeReport(right, left, float(-e_plus), float(-e_minus), res, float(e_plus - e_minus))
