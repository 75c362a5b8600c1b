"""Finite central windows of minimal sequences and their growth.

A two-sided sequence is minimal for a weight vector when every forward sum
of real parts from the origin is nonnegative and every backward sum is
nonpositive, so the origin sits at the lowest point of the running sum.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .substitution import Substitution, TwoSidedWindow

EPS_MIN = 1e-9


class MinimalityError(RuntimeError):
    pass


def _real_weights(gamma: Mapping[str, complex]) -> dict[str, float]:
    return {a: complex(g).real for a, g in gamma.items()}


def find_seed_letters(gamma: Mapping[str, complex], sigma: Substitution, max_power: int = 12,
                      max_gap: int = 12, pair: tuple[str, str] | None = None) -> tuple[str, str, str]:
    """Letters a, b with Re(gamma_a) < 0 < Re(gamma_b) and a word w with awb in the language.

    Pairs are tried in alphabet order; for each pair the shortest connecting
    word found in sigma^k images (k <= max_power) is returned as ``(a, w, b)``.
    ``pair`` pins the two letters and only the connecting word is searched.
    """
    re = _real_weights(gamma)
    if pair is not None:
        a, b = pair
        if not re[a] < 0 < re[b]:
            raise ValueError(f"pair {pair!r} does not straddle zero in real weight")
        neg, pos = [a], [b]
    else:
        neg = [a for a in sigma.alphabet if re[a] < 0]
        pos = [a for a in sigma.alphabet if re[a] > 0]
    if not neg or not pos:
        raise ValueError("need letters with negative and positive real weight")
    text = _language_sample(sigma, max_power)
    best = None
    for a in neg:
        for b in pos:
            w = _shortest_gap(text, a, b, max_gap)
            if w is not None and (best is None or len(w) < len(best[1])):
                best = (a, w, b)
        if best is not None:
            return best
    raise ValueError("no occurrence of a w b found within the scan budget")


def _language_sample(sigma: Substitution, k: int) -> list[str]:
    return [sigma.apply(a, k) for a in sigma.alphabet]


def _shortest_gap(texts: Sequence[str], a: str, b: str, max_gap: int) -> str | None:
    best = None
    for t in texts:
        i = t.find(a)
        while i != -1:
            j = t.find(b, i + 1, i + 2 + max_gap)
            if j != -1:
                w = t[i + 1:j]
                if best is None or len(w) < len(best):
                    best = w
                    if not w:
                        return w
            i = t.find(a, i + 1)
    return best


def minimal_prefix(word: str, v: Mapping[str, complex], tie_tol: float = 1e-12) -> int:
    """Length of the prefix with the smallest real weight; ties go to the shortest."""
    re = _real_weights(v)
    run = np.concatenate([[0.0], np.cumsum([re[c] for c in word])])
    m = run.min()
    return int(np.nonzero(run <= m + tie_tol)[0][0])


def good_exponents(beta: complex, n_max: int, max_arg: float = 0.2, n_min: int = 0) -> list[int]:
    """Exponents n with |arg(beta0^n)| < max_arg."""
    b0 = beta / abs(beta)
    return [n for n in range(n_min, n_max + 1) if abs(cmath.phase(b0 ** n)) < max_arg]


def substitute_array(sigma: Substitution, word: np.ndarray, n: int) -> np.ndarray:
    """sigma^n applied to a word stored as an array of letter indices."""
    idx = sigma.index
    images = [np.array([idx[c] for c in sigma[a]], dtype=np.int8) for a in sigma.alphabet]
    lens = np.array([len(im) for im in images], dtype=np.int64)
    flat = np.concatenate(images)
    starts = np.concatenate([[0], np.cumsum(lens)[:-1]])
    w = np.asarray(word, dtype=np.int8)
    for _ in range(n):
        L = lens[w]
        total = int(L.sum())
        offs = np.repeat(np.cumsum(L) - L, L)
        pos = np.arange(total, dtype=np.int64) - offs
        w = flat[np.repeat(starts[w], L) + pos]
    return w


@dataclass
class MinimalWindow:
    window: TwoSidedWindow
    gamma: dict
    seed: tuple[str, str, str]
    n: int
    split: int
    theta: float | None = None
    log: dict = field(default_factory=dict)

    @property
    def certified_range(self) -> tuple[int, int]:
        return (-self.window.n_back, self.window.n_fwd)

    def re_sums(self) -> tuple[np.ndarray, np.ndarray]:
        """(ns, Re gamma_n) over the whole window."""
        re = _real_weights(self.gamma)
        return _re_sums(self.window, re)

    def to_text(self) -> str:
        return f"{self.window.left}·{self.window.right}\n"

    def sidecar(self) -> dict:
        return {"seed": "".join(self.seed), "seed_parts": list(self.seed), "n": self.n, "split": self.split,
                "theta": None if self.theta is None else repr(self.theta), "length": len(self.window.word)}

    def to_json(self) -> str:
        return json.dumps(self.sidecar(), sort_keys=True)


def _re_sums(window: TwoSidedWindow, re: Mapping[str, float]):
    letters = sorted(re)
    table = np.zeros(256)
    for a in letters:
        table[ord(a)] = re[a]
    codes = np.frombuffer(window.word.encode("latin-1"), dtype=np.uint8)
    run = np.concatenate([[0.0], np.cumsum(table[codes])])
    o = window.origin
    ns = np.arange(-o, len(codes) - o + 1)
    return ns, run - run[o]


def minimal_window(sigma: Substitution, gamma: Mapping[str, complex], seed: tuple[str, str, str] | str, n: int,
                   eps: float = EPS_MIN, theta: float | None = None) -> MinimalWindow:
    """sigma^n(a w b) split at its minimal prefix."""
    if isinstance(seed, str):
        seed = (seed[0], seed[1:-1], seed[-1])
    word0 = "".join(seed)
    alphabet = sigma.alphabet
    arr = substitute_array(sigma, np.array([sigma.index[c] for c in word0]), n)
    word = np.array([ord(c) for c in alphabet], dtype=np.uint8)[arr].tobytes().decode("latin-1")
    re = _real_weights(gamma)
    table = np.array([re[a] for a in alphabet])
    run = np.concatenate([[0.0], np.cumsum(table[arr])])
    m = run.min()
    split = int(np.nonzero(run <= m + 1e-12)[0][0])
    mw = MinimalWindow(TwoSidedWindow(word, split), dict(gamma), seed, n, split, theta,
                       {"length": len(word), "left": split, "right": len(word) - split})
    verdict = verify_minimality(mw.window, gamma, eps=eps, n_pairs=0)
    if not verdict["ok"]:
        raise MinimalityError(f"window violates minimality at n={verdict['worst_n']} ({verdict['worst_value']:.3g})")
    return mw


def _suffix_power(sigma: Substitution, u: str, k: int, r: int) -> str:
    """Last r symbols of sigma^k(u)."""
    u = u[-r:] if r else ""
    for _ in range(k):
        u = sigma.apply(u)[-r:] if r else ""
    return u


def _prefix_power(sigma: Substitution, u: str, k: int, r: int) -> str:
    """First r symbols of sigma^k(u)."""
    u = u[:r]
    for _ in range(k):
        u = sigma.apply(u)[:r]
    return u


def minimal_window_central(sigma: Substitution, gamma: Mapping[str, complex], beta: complex,
                           seed: tuple[str, str, str] | str, n: int, radius: int,
                           eps: float = EPS_MIN, theta: float | None = None) -> MinimalWindow:
    """Central crop of radius ``radius`` of sigma^n(a w b) split at its minimal prefix.

    Uses gamma(sigma^k(u)) = beta^k gamma(u): the lowest prefix sum of
    sigma^k(c) satisfies a recursion over the splittings of sigma(c), so the
    split is located by descending the substitution tree and only the symbols
    near it are generated.  ``gamma`` must be an eigenvector for ``beta``.
    """
    if isinstance(seed, str):
        seed = (seed[0], seed[1:-1], seed[-1])
    word0 = "".join(seed)
    re_pow = lambda u, k: (beta ** k * sum((complex(gamma[c]) for c in u), 0j)).real
    letters = sigma.alphabet
    # lowest[k][c]: minimum over proper prefixes (including empty) of sigma^k(c)
    lowest = [{c: 0.0 for c in letters}]
    for k in range(1, n + 1):
        prev = lowest[-1]
        lowest.append({c: min(re_pow(sigma[c][:j], k - 1) + prev[sigma[c][j]] for j in range(len(sigma[c])))
                       for c in letters})
    scale = 1.0 + abs(beta) ** n * max(abs(complex(g)) for g in gamma.values())
    tol = 1e-12 * scale
    # top level: blocks of the seed word plus the end of the word
    cands = [(re_pow(word0[:i], n) + lowest[n][word0[i]], i) for i in range(len(word0))]
    cands.append((re_pow(word0, n), len(word0)))
    best = min(v for v, _ in cands)
    i = next(i for v, i in cands if v <= best + tol)
    if i == len(word0):
        left = _suffix_power(sigma, word0, n, radius)
        return _finish(sigma, gamma, seed, n, left, "", None, eps, theta)
    target = best - re_pow(word0[:i], n)
    prefixes, suffixes = [], []
    c = word0[i]
    for k in range(n, 0, -1):
        img = sigma[c]
        for j in range(len(img)):
            v = re_pow(img[:j], k - 1) + lowest[k - 1][img[j]]
            if v <= target + tol:
                break
        target -= re_pow(img[:j], k - 1)
        prefixes.append((img[:j], k - 1))
        suffixes.append((img[j + 1:], k - 1))
        c = img[j]
    left = ""
    # left side: sigma^n(word0[:i]) sigma^{n-1}(p_{n-1}) ... p_0, assembled from the inside out
    pieces_left = [(word0[:i], n)] + prefixes
    for u, k in reversed(pieces_left):
        if len(left) >= radius:
            break
        left = _suffix_power(sigma, u, k, radius - len(left)) + left
    right = c
    pieces_right = list(reversed(suffixes)) + [(word0[i + 1:], n)]
    for u, k in pieces_right:
        if len(right) >= radius:
            break
        right = right + _prefix_power(sigma, u, k, radius - len(right))
    return _finish(sigma, gamma, seed, n, left[-radius:], right[:radius], None, eps, theta)


def _finish(sigma, gamma, seed, n, left, right, split, eps, theta) -> MinimalWindow:
    window = TwoSidedWindow(left + right, len(left))
    mw = MinimalWindow(window, dict(gamma), seed, n, len(left) if split is None else split, theta,
                       {"length": len(window.word), "left": len(left), "right": len(right), "cropped": True})
    verdict = verify_minimality(window, gamma, eps=eps, n_pairs=0)
    if not verdict["ok"]:
        raise MinimalityError(f"window violates minimality at n={verdict['worst_n']} ({verdict['worst_value']:.3g})")
    return mw


def verify_minimality(window: TwoSidedWindow, gamma: Mapping[str, complex], eps: float = EPS_MIN,
                      n_pairs: int = 200, seed: int = 0, side: str = "both") -> dict:
    """Re(gamma_n) >= -eps over the window, plus the two-sided comparison on random pairs.

    The comparison: for n < 0 <= m, Re(gamma(w_n..w_-1)) <= Re(gamma(w_n..w_m)).
    """
    re = _real_weights(gamma)
    ns, vals = _re_sums(window, re)
    mask = np.ones_like(ns, dtype=bool)
    if side == "forward":
        mask = ns >= 0
    elif side == "backward":
        mask = ns <= 0
    k = int(np.argmin(np.where(mask, vals, np.inf)))
    worst_n, worst = int(ns[k]), float(vals[k])
    ok = worst >= -eps
    pair_fail = None
    if n_pairs and window.n_back and window.n_fwd:
        rng = np.random.default_rng(seed)
        nn = rng.integers(-window.n_back, 0, size=n_pairs)
        mm = rng.integers(0, window.n_fwd, size=n_pairs)
        o = window.origin
        # Re gamma(w_n..w_-1) = -vals[n]; Re gamma(w_n..w_m) = vals[m+1] - vals[n]
        lhs = -vals[nn + o]
        rhs = vals[mm + 1 + o] - vals[nn + o]
        bad = np.nonzero(lhs > rhs + eps)[0]
        if bad.size:
            ok = False
            pair_fail = (int(nn[bad[0]]), int(mm[bad[0]]))
    return {"ok": bool(ok), "worst_n": worst_n, "worst_value": worst, "pair_failure": pair_fail}


def rho_max(alpha: float, beta: complex) -> float:
    """log|beta| / log(1/alpha), the largest admissible growth exponent."""
    return math.log(abs(beta)) / math.log(1 / alpha)


def growth_check(window: TwoSidedWindow, gamma: Mapping[str, complex], rho: float, n_min: int = 2,
                 n_max: int | None = None) -> dict:
    """min over n_min <= |n| <= n_max of Re(gamma_n) / |n|^rho on both sides."""
    re = _real_weights(gamma)
    ns, vals = _re_sums(window, re)
    a = np.abs(ns)
    sel = a >= n_min
    if n_max is not None:
        sel &= a <= n_max
    ratios = vals[sel] / a[sel].astype(float) ** rho
    k = int(np.argmin(ratios))
    value = float(ratios[k])
    return {"rho": rho, "min_ratio": value, "at_n": int(ns[sel][k]), "ok": value > 0}


def liminf_check(tau: complex, beta: complex, k_max: int, A: float, xi: complex = 1.0, tail_from: int | None = None) -> dict:
    """A^k |tau - beta0^k xi| for k <= k_max, summarised by its minimum over the tail."""
    b0 = beta / abs(beta)
    ks = np.arange(1, k_max + 1)
    z = b0 ** ks * xi
    vals = A ** ks.astype(float) * np.abs(tau - z)
    start = tail_from if tail_from is not None else k_max // 2
    tail = vals[ks >= start]
    return {"A": A, "tail_min": float(tail.min()), "overall_min": float(vals.min()),
            "argmin_k": int(ks[np.argmin(vals)])}


def good_direction_check(taus: Sequence[complex], beta: complex, k_max: int = 400,
                         A_values: Sequence[float] | None = None, xi: complex = 1.0, threshold: float = 1.0) -> dict:
    """Bounded certificate that the tail of A^k |tau - beta0^k xi| stays away from zero.

    A direction passes for a given A when the minimum over k in
    [k_max/2, k_max] exceeds ``threshold``.
    """
    if A_values is None:
        A_values = (1.05, 1.2, abs(beta))
    rows = []
    ok = True
    for tau in taus:
        for A in A_values:
            r = liminf_check(complex(tau), beta, k_max, A, xi)
            r["tau"] = [repr(complex(tau).real), repr(complex(tau).imag)]
            r["ok"] = r["tail_min"] > threshold
            ok &= r["ok"]
            rows.append(r)
    return {"ok": bool(ok), "rows": rows}
