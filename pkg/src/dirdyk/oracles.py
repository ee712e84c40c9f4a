"""Convex function oracles: value, proximal map and Fenchel conjugate.

Three families are supported, all in closed form:

``Zero``
    f(x) = 0.  Its conjugate is the indicator of {0}, reported as ``inf``
    away from the origin.
``Quadratic``
    f(x) = 1/2 x'Ax + b'x + c with A symmetric positive definite.
``MaxTwoQuadratics``
    f(x) = max(f1(x), f2(x)) where both pieces share the Hessian A.

Linear systems are solved with a dense Cholesky factorization.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DimensionError, ProblemFormatError

__all__ = [
    "ConvexFunction",
    "Zero",
    "Quadratic",
    "MaxTwoQuadratics",
    "function_from_dict",
    "evaluate",
    "prox",
    "conjugate",
    "fenchel_young_gap",
]

SYMMETRY_RTOL = 1e-12
# below this |g(0) - g(1)| the two pieces differ by a constant
DEGENERATE_SLOPE = 1e-14
FY_CLAMP = 1e-10


def _vector(x, m, name="x"):
    if type(x) is np.ndarray and x.dtype == np.float64 and x.shape == (m,):
        return x
    x = np.asarray(x, dtype=float)
    if x.shape != (m,):
        raise DimensionError(f"{name} has shape {x.shape}, expected ({m},)")
    return x


def _check_spd(A):
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ProblemFormatError(f"Hessian must be square, got shape {A.shape}")
    scale = max(np.abs(A).max(), 1.0)
    if np.abs(A - A.T).max() > SYMMETRY_RTOL * scale:
        raise ProblemFormatError("Hessian is not symmetric")
    lam_min = np.linalg.eigvalsh(A).min()
    if not lam_min > 0:
        raise ProblemFormatError(
            f"Hessian failed the eigenvalue check: smallest eigenvalue {lam_min:.3e} <= 0"
        )
    A.setflags(write=False)
    return A


class ConvexFunction:
    """Common interface.  Subclasses are immutable after construction."""

    kind: str
    dim: int

    def __call__(self, x) -> float:
        return self.eval(x)

    def eval(self, x) -> float:
        raise NotImplementedError

    def prox(self, s: float, x_temp):
        """Return ``(x, z)`` with ``x = argmin s/2|x_temp - x|^2 + f(x)``
        and ``z = s (x_temp - x)``, a subgradient of f at x."""
        raise NotImplementedError

    def conjugate(self, z) -> float:
        raise NotImplementedError

    def subgradients(self, x) -> list[np.ndarray]:
        """Extreme points of the subdifferential at ``x``."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def _check_step(self, s):
        s = float(s)
        if not s > 0:
            raise ValueError(f"prox step s must be positive, got {s}")
        return s


class Zero(ConvexFunction):
    kind = "zero"

    def __init__(self, dim: int):
        self.dim = int(dim)

    def eval(self, x):
        _vector(x, self.dim)
        return 0.0

    def prox(self, s, x_temp):
        self._check_step(s)
        x = _vector(x_temp, self.dim, "x_temp").copy()
        return x, np.zeros(self.dim)

    def conjugate(self, z):
        z = _vector(z, self.dim, "z")
        return math.inf if z.any() else 0.0

    def subgradients(self, x):
        _vector(x, self.dim)
        return [np.zeros(self.dim)]

    def to_dict(self):
        return {"kind": self.kind}

    def __eq__(self, other):
        return isinstance(other, Zero) and other.dim == self.dim

    def __repr__(self):
        return f"Zero(dim={self.dim})"


class Quadratic(ConvexFunction):
    kind = "quadratic"

    def __init__(self, A, b, c=0.0):
        self.A = _check_spd(A)
        self.dim = self.A.shape[0]
        self.b = _vector(b, self.dim, "b").copy()
        self.c = float(c)
        self._chol = cho_factor(self.A, check_finite=False)

    def eval(self, x):
        x = _vector(x, self.dim)
        return 0.5 * x @ self.A @ x + self.b @ x + self.c

    def gradient(self, x):
        return self.A @ _vector(x, self.dim) + self.b

    def prox(self, s, x_temp):
        s = self._check_step(s)
        t = _vector(x_temp, self.dim, "x_temp")
        M = self.A + s * np.eye(self.dim)
        x = cho_solve(cho_factor(M, check_finite=False), s * t - self.b, check_finite=False)
        return x, s * (t - x)

    def conjugate(self, z):
        w = _vector(z, self.dim, "z") - self.b
        return 0.5 * w @ cho_solve(self._chol, w, check_finite=False) - self.c

    def conjugate_gradient(self, z):
        return cho_solve(self._chol, _vector(z, self.dim, "z") - self.b, check_finite=False)

    def subgradients(self, x):
        return [self.gradient(x)]

    def to_dict(self):
        return {"kind": self.kind, "A": self.A.tolist(), "b": self.b.tolist(), "c": self.c}

    def __eq__(self, other):
        return (
            isinstance(other, Quadratic)
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.b, other.b)
            and self.c == other.c
        )

    def __repr__(self):
        return f"Quadratic(dim={self.dim})"


class MaxTwoQuadratics(ConvexFunction):
    """f(x) = max(1/2 x'Ax + b1'x + c1, 1/2 x'Ax + b2'x + c2).

    Because the pieces share A, their difference is affine, which makes the
    prox and the conjugate one-dimensional problems in the mixing weight
    ``lam`` of ``b_lam = lam*b1 + (1-lam)*b2``.
    """

    kind = "max2"

    def __init__(self, A, b1, c1, b2, c2):
        self.A = _check_spd(A)
        self.dim = self.A.shape[0]
        self.b1 = _vector(b1, self.dim, "b1").copy()
        self.b2 = _vector(b2, self.dim, "b2").copy()
        self.c1 = float(c1)
        self.c2 = float(c2)
        self._chol = cho_factor(self.A, check_finite=False)
        self._delta = self.b1 - self.b2
        self._Ainv_delta = cho_solve(self._chol, self._delta, check_finite=False)
        self._delta_norm = self._delta @ self._Ainv_delta

    def pieces(self, x):
        x = _vector(x, self.dim)
        q = 0.5 * x @ self.A @ x
        return q + self.b1 @ x + self.c1, q + self.b2 @ x + self.c2

    def eval(self, x):
        return max(self.pieces(x))

    def piece_gradients(self, x):
        Ax = self.A @ _vector(x, self.dim)
        return Ax + self.b1, Ax + self.b2

    def _gap(self, x):
        # f1 - f2, affine in x
        return self._delta @ x + (self.c1 - self.c2)

    def prox(self, s, x_temp):
        s = self._check_step(s)
        t = _vector(x_temp, self.dim, "x_temp")
        chol = cho_factor(self.A + s * np.eye(self.dim), check_finite=False)
        x1 = cho_solve(chol, s * t - self.b1, check_finite=False)
        x2 = cho_solve(chol, s * t - self.b2, check_finite=False)
        g1, g0 = self._gap(x1), self._gap(x2)
        if g1 >= 0.0:
            x = x1
        elif g0 <= 0.0:
            x = x2
        elif abs(g0 - g1) < DEGENERATE_SLOPE:
            mid = 0.5 * (x1 + x2)
            x = x1 if self._gap(mid) >= 0.0 else x2
        else:
            # x(lam) = lam*x1 + (1-lam)*x2 and g is affine in lam
            lam = g0 / (g0 - g1)
            x = lam * x1 + (1.0 - lam) * x2
        return x, s * (t - x)

    def conjugate_weight(self, z):
        """Mixing weight in [0, 1] attaining the conjugate."""
        w0 = _vector(z, self.dim, "z") - self.b2
        if self._delta_norm <= 0.0:
            return 1.0 if self.c1 > self.c2 else 0.0
        lam = (self._Ainv_delta @ w0 + (self.c1 - self.c2)) / self._delta_norm
        return min(1.0, max(0.0, lam))

    def conjugate(self, z):
        z = _vector(z, self.dim, "z")
        lam = self.conjugate_weight(z)
        w = z - self.b2 - lam * self._delta
        Ainv_w = cho_solve(self._chol, w, check_finite=False)
        return 0.5 * w @ Ainv_w - (self.c2 + lam * (self.c1 - self.c2))

    def subgradients(self, x, atol=1e-9):
        f1, f2 = self.pieces(x)
        g1, g2 = self.piece_gradients(x)
        scale = max(1.0, abs(f1), abs(f2))
        if abs(f1 - f2) <= atol * scale:
            return [g1, g2]
        return [g1] if f1 > f2 else [g2]

    def to_dict(self):
        return {
            "kind": self.kind,
            "A": self.A.tolist(),
            "b1": self.b1.tolist(),
            "c1": self.c1,
            "b2": self.b2.tolist(),
            "c2": self.c2,
        }

    def __eq__(self, other):
        return (
            isinstance(other, MaxTwoQuadratics)
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.b1, other.b1)
            and np.array_equal(self.b2, other.b2)
            and self.c1 == other.c1
            and self.c2 == other.c2
        )

    def __repr__(self):
        return f"MaxTwoQuadratics(dim={self.dim})"


def function_from_dict(data: dict, dim: int) -> ConvexFunction:
    try:
        kind = data["kind"]
        if kind == "zero":
            return Zero(dim)
        if kind == "quadratic":
            f = Quadratic(data["A"], data["b"], data.get("c", 0.0))
        elif kind == "max2":
            f = MaxTwoQuadratics(data["A"], data["b1"], data["c1"], data["b2"], data["c2"])
        else:
            raise ProblemFormatError(f"unknown function kind {kind!r}")
    except KeyError as exc:
        raise ProblemFormatError(f"function is missing field {exc.args[0]!r}") from None
    except DimensionError as exc:
        raise ProblemFormatError(str(exc)) from None
    if f.dim != dim:
        raise ProblemFormatError(f"function dimension {f.dim} does not match m={dim}")
    return f


def evaluate(f: ConvexFunction, x) -> float:
    return f.eval(x)


def prox(f: ConvexFunction, s: float, x_temp):
    return f.prox(s, x_temp)


def conjugate(f: ConvexFunction, z) -> float:
    return f.conjugate(z)


def fenchel_young_gap(f: ConvexFunction, x, z) -> float:
    """f(x) + f*(z) - <x, z>; tiny negative rounding is reported as 0."""
    fz = f.conjugate(z)
    if math.isinf(fz):
        return math.inf
    gap = f.eval(x) + fz - float(np.dot(x, z))
    if -FY_CLAMP <= gap < 0.0:
        return 0.0
    return gap
