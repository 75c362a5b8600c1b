"""Exact arithmetic in Q[t]/(t^3 + t^2 + t - 1) and integer-matrix eigendata.

The cubic field is the one of the Arnoux-Yoccoz map: its real root is
``alpha`` (alpha + alpha^2 + alpha^3 = 1) and its complex roots are ``beta``
and ``conj(beta)``.  Elements are stored as exact rationals; embeddings are
evaluated in double precision.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

# minimal polynomial t^3 + t^2 + t - 1, so t^3 = 1 - t - t^2
MIN_POLY = (-1, 1, 1, 1)

_ROOTS = np.roots([1.0, 1.0, 1.0, -1.0])
ALPHA = float(min(_ROOTS, key=lambda r: abs(r.imag)).real)
BETA = complex(max(_ROOTS, key=lambda r: r.imag))


def _polish(z: complex) -> complex:
    for _ in range(4):
        z = z - (z ** 3 + z ** 2 + z - 1) / (3 * z ** 2 + 2 * z + 1)
    return z


ALPHA = _polish(complex(ALPHA)).real
BETA = _polish(BETA)


@dataclass(frozen=True)
class CubicNumber:
    """c0 + c1*t + c2*t^2 modulo t^3 + t^2 + t - 1, with rational coefficients."""

    c0: Fraction = Fraction(0)
    c1: Fraction = Fraction(0)
    c2: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("c0", "c1", "c2"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))

    @classmethod
    def coerce(cls, x) -> "CubicNumber":
        if isinstance(x, CubicNumber):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(Fraction(x))
        raise TypeError(f"cannot coerce {type(x).__name__} to CubicNumber")

    @classmethod
    def t(cls) -> "CubicNumber":
        return cls(0, 1, 0)

    @property
    def coeffs(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.c0, self.c1, self.c2)

    def __add__(self, other):
        try:
            o = CubicNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return CubicNumber(self.c0 + o.c0, self.c1 + o.c1, self.c2 + o.c2)

    __radd__ = __add__

    def __neg__(self):
        return CubicNumber(-self.c0, -self.c1, -self.c2)

    def __sub__(self, other):
        try:
            o = CubicNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return CubicNumber.coerce(other) - self

    def __mul__(self, other):
        try:
            o = CubicNumber.coerce(other)
        except TypeError:
            return NotImplemented
        a, b = self.coeffs, o.coeffs
        prod = [Fraction(0)] * 5
        for i in range(3):
            for j in range(3):
                prod[i + j] += a[i] * b[j]
        # t^4 = t * t^3 = t - t^2 - t^3, then fold t^3 again
        for k in (4, 3):
            c = prod[k]
            if c:
                prod[k] = Fraction(0)
                prod[k - 3] += c
                prod[k - 2] -= c
                prod[k - 1] -= c
        return CubicNumber(prod[0], prod[1], prod[2])

    __rmul__ = __mul__

    def _matrix(self) -> list[list[Fraction]]:
        # columns are self * 1, self * t, self * t^2
        cols = [self, self * CubicNumber.t(), self * CubicNumber(0, 0, 1)]
        return [[cols[j].coeffs[i] for j in range(3)] for i in range(3)]

    def inv(self) -> "CubicNumber":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in the cubic field")
        m = self._matrix()
        # solve m @ x = e0 by Gauss-Jordan over Q
        aug = [row[:] + [Fraction(int(i == 0))] for i, row in enumerate(m)]
        for col in range(3):
            piv = next(r for r in range(col, 3) if aug[r][col] != 0)
            aug[col], aug[piv] = aug[piv], aug[col]
            p = aug[col][col]
            aug[col] = [v / p for v in aug[col]]
            for r in range(3):
                if r != col and aug[r][col] != 0:
                    f = aug[r][col]
                    aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
        return CubicNumber(aug[0][3], aug[1][3], aug[2][3])

    def __truediv__(self, other):
        try:
            o = CubicNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inv()

    def __rtruediv__(self, other):
        return CubicNumber.coerce(other) * self.inv()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        base = self if n >= 0 else self.inv()
        result = CubicNumber(1)
        for _ in range(abs(n)):
            result = result * base
        return result

    def __eq__(self, other):
        try:
            o = CubicNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def is_zero(self) -> bool:
        return self.c0 == 0 and self.c1 == 0 and self.c2 == 0

    def embed(self, root: complex) -> complex:
        return complex(float(self.c0) + float(self.c1) * root + float(self.c2) * root * root)

    def embed_alpha(self) -> float:
        return self.embed(ALPHA).real

    def embed_beta(self) -> complex:
        return self.embed(BETA)

    def __complex__(self):
        return self.embed_beta()

    def __repr__(self):
        terms = []
        for c, mono in zip(self.coeffs, ("", "b", "b^2")):
            if c:
                terms.append(f"{c}{'*' + mono if mono else ''}")
        return "CubicNumber(" + (" + ".join(terms) or "0") + ")"

    def to_json(self) -> list[str]:
        return [str(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data) -> "CubicNumber":
        return cls(*(Fraction(s) for s in data))


ONE = CubicNumber(1)
T = CubicNumber.t()  # the class of t, i.e. beta in the complex embedding
T_INV = T.inv()


# ---------------------------------------------------------------------------
# integer polynomials (coefficient lists, lowest degree first)


def poly_mul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return _trim(out)


def _trim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def poly_eval(p, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_deriv(p):
    return _trim([i * c for i, c in enumerate(p)][1:] or [0])


def _poly_divmod(p, q):
    p = [Fraction(c) for c in p]
    q = [Fraction(c) for c in _trim(q)]
    out = [Fraction(0)] * max(len(p) - len(q) + 1, 1)
    while len(p) >= len(q) and any(p):
        shift = len(p) - len(q)
        f = p[-1] / q[-1]
        out[shift] = f
        for i, c in enumerate(q):
            p[i + shift] -= f * c
        p = _trim(p)
        if len(p) == 1 and p[0] == 0:
            break
    return _trim(out), _trim(p)


def _poly_gcd(p, q):
    p, q = [Fraction(c) for c in _trim(p)], [Fraction(c) for c in _trim(q)]
    while any(q):
        _, r = _poly_divmod(p, q)
        p, q = q, r
    return [c / p[-1] for c in p]


def squarefree_decomposition(p) -> dict[int, list[Fraction]]:
    """Yun's algorithm: p = lc * prod(q_i ** i) with each q_i squarefree and monic."""
    out = {}
    a = _poly_gcd(p, poly_deriv(p))
    b, _ = _poly_divmod(p, a)
    c, _ = _poly_divmod(poly_deriv(p), a)
    d = [x - y for x, y in _zip_pad(c, poly_deriv(b))]
    i = 1
    while len(_trim(b)) > 1:
        a = _poly_gcd(b, _trim(d))
        if len(a) > 1:
            out[i] = a
        b, _ = _poly_divmod(b, a)
        c, _ = _poly_divmod(_trim(d), a)
        d = [x - y for x, y in _zip_pad(c, poly_deriv(b))]
        i += 1
    return out


def _zip_pad(p, q):
    n = max(len(p), len(q))
    p = list(p) + [0] * (n - len(p))
    q = list(q) + [0] * (n - len(q))
    return zip(p, q)


def char_poly(M) -> list[int]:
    """Characteristic polynomial det(tI - M), exact, lowest degree first.

    Faddeev-LeVerrier over the rationals; all coefficients come out integral
    for an integer matrix.
    """
    A = [[Fraction(int(v)) for v in row] for row in np.asarray(M, dtype=object)]
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("matrix must be square")
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    Mk = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # Mk <- A @ M_{k-1} + c_{n-k+1} I
        prev = Mk
        Mk = [[sum(A[i][l] * prev[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        for i in range(n):
            Mk[i][i] += coeffs[n - k + 1]
        AM = [[sum(A[i][l] * Mk[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        coeffs[n - k] = -sum(AM[i][i] for i in range(n)) / k
    if any(c.denominator != 1 for c in coeffs):
        raise ArithmeticError("non-integral characteristic polynomial")
    return [int(c) for c in coeffs]


def poly_to_json(p) -> str:
    return json.dumps([str(int(c)) for c in p])


def poly_from_json(s) -> list[int]:
    return [int(c) for c in json.loads(s)]


def matrix_to_json(M) -> str:
    return json.dumps([[str(int(v)) for v in row] for row in np.asarray(M)])


def matrix_from_json(s) -> np.ndarray:
    return np.array([[int(v) for v in row] for row in json.loads(s)], dtype=np.int64)


# ---------------------------------------------------------------------------
# eigendata


@dataclass(frozen=True)
class EigenPair:
    eigenvalue: complex
    eigenvector: np.ndarray
    multiplicity: int

    def residual(self, M) -> float:
        M = np.asarray(M, dtype=float)
        v = self.eigenvector
        return float(np.abs(M @ v - self.eigenvalue * v).max() / np.abs(v).max())


def _newton(p, z, iters=60):
    dp = poly_deriv(p)
    pf = [float(c) for c in p]
    dpf = [float(c) for c in dp]
    for _ in range(iters):
        d = poly_eval(dpf, z)
        if d == 0:
            break
        step = poly_eval(pf, z) / d
        z = z - step
        if abs(step) <= 1e-16 * max(1.0, abs(z)):
            break
    return z


def eigen_pair(M, root: complex) -> EigenPair:
    """Refine an eigenvalue of the integer matrix M near ``root`` and return it
    with an eigenvector and its algebraic multiplicity.

    The root is attributed to the squarefree factor of the characteristic
    polynomial on which it (nearly) vanishes, then polished by Newton on that
    factor, where it is a simple root.
    """
    M = np.asarray(M)
    p = char_poly(M)
    factors = squarefree_decomposition(p)

    def rel_val(q, z):
        qf = [float(c) for c in q]
        scale = sum(abs(c) * max(1.0, abs(z)) ** i for i, c in enumerate(qf))
        return abs(poly_eval(qf, z)) / scale

    mult, factor = min(factors.items(), key=lambda kv: rel_val(kv[1], complex(root)))
    lam = _newton(factor, complex(root))
    if abs(lam.imag) < 1e-13 * max(1.0, abs(lam)):
        lam = complex(lam.real, 0.0)
    A = M.astype(complex) - lam * np.eye(len(M))
    _, _, vh = np.linalg.svd(A)
    v = vh[-1].conj()
    if abs(lam.imag) == 0.0:
        v = v * np.exp(-1j * np.angle(v[np.argmax(np.abs(v))]))
        v = v.real.astype(complex)
        if v.real.sum() < 0:
            v = -v
    return EigenPair(lam, v, mult)


def root_of_unity_check(z: complex, n_max: int, tol: float = 1e-9):
    """Least n <= n_max with (z/|z|)^n real within ``tol``, or None.

    Only a bounded search: a None answer is "none up to n_max", not a proof.
    """
    z = complex(z)
    if abs(z) == 0:
        raise ValueError("z must be nonzero")
    u = z / abs(z)
    w = 1 + 0j
    for n in range(1, n_max + 1):
        w = w * u
        w = w / abs(w)
        if abs(w.imag) <= tol:
            return n
    return None
