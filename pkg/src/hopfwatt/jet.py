"""Taylor jets of vector fields stored as symmetric multilinear forms.

Only one representative of each symmetric tensor entry is kept: the entry
``d^r F_i / dx_{i1} ... dx_{ir}`` is filed under its multiplicity vector
``alpha`` (``alpha[m]`` counts how often coordinate ``m`` occurs).  Evaluating
the form on ``r`` vectors then sums, for each stored ``alpha``, the coefficient
of ``t**alpha`` in ``prod_k <x_k, t>``, which accounts for every ordering of the
multi-index at once.
"""

from __future__ import annotations

import itertools
import math
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .series import TruncatedSeries

MAX_ORDER = 9
FD_MAX_ORDER = 4

FORM_NAMES = {1: "A", 2: "B", 3: "C", 4: "D", 5: "E", 6: "K", 7: "L", 8: "M", 9: "N"}


def multiplicities(n: int, order: int) -> list[tuple[int, ...]]:
    """All multiplicity vectors of length ``n`` summing to ``order``."""
    out = []
    for combo in itertools.combinations_with_replacement(range(n), order):
        alpha = [0] * n
        for i in combo:
            alpha[i] += 1
        out.append(tuple(alpha))
    return out


def alpha_factorial(alpha) -> int:
    return math.prod(math.factorial(a) for a in alpha)


def _linear_form_product(args: Sequence[np.ndarray]) -> dict[tuple[int, ...], complex]:
    n = len(args[0])
    poly = {(0,) * n: 1.0 + 0j}
    for vec in args:
        nxt: dict[tuple[int, ...], complex] = {}
        for alpha, c in poly.items():
            for i in range(n):
                v = vec[i]
                if v == 0:
                    continue
                beta = alpha[:i] + (alpha[i] + 1,) + alpha[i + 1 :]
                nxt[beta] = nxt.get(beta, 0.0) + c * v
        poly = nxt
    return poly


class VectorFieldJet:
    """Derivatives of orders 1..``max_order`` of ``F: R^n -> R^n`` at a point.

    Parameters
    ----------
    dim : int
        State dimension ``n``.
    entries : mapping
        ``{alpha: value}`` where ``alpha`` is a multiplicity vector and
        ``value`` the real ``n``-vector of partial derivatives
        ``d^|alpha| F / dx^alpha``.  Zero entries may be omitted.
    max_order : int
        Highest derivative order represented (entries above it are rejected).
    """

    def __init__(self, dim: int, entries: Mapping[tuple[int, ...], Iterable[float]], max_order: int = MAX_ORDER):
        if dim < 1:
            raise ValueError("dimension must be positive")
        if not 1 <= max_order <= MAX_ORDER:
            raise ValueError(f"max_order must lie in 1..{MAX_ORDER}")
        self.dim = int(dim)
        self.max_order = int(max_order)
        by_order: dict[int, dict[tuple[int, ...], np.ndarray]] = {r: {} for r in range(1, self.max_order + 1)}
        for alpha, value in entries.items():
            alpha = tuple(int(a) for a in alpha)
            r = sum(alpha)
            if len(alpha) != self.dim or min(alpha) < 0:
                raise ValueError(f"bad multiplicity vector {alpha}")
            if not 1 <= r <= self.max_order:
                raise ValueError(f"entry {alpha} outside orders 1..{self.max_order}")
            value = np.asarray(value, dtype=float).reshape(self.dim)
            if not np.all(np.isfinite(value)):
                raise FloatingPointError(f"non-finite derivative at {alpha}")
            if np.any(value != 0):
                by_order[r][alpha] = value.copy()
        self._alphas = {}
        self._values = {}
        for r, table in by_order.items():
            keys = sorted(table)
            self._alphas[r] = tuple(keys)
            vals = np.array([table[k] for k in keys]).reshape(len(keys), self.dim)
            vals.setflags(write=False)
            self._values[r] = vals
        self._entries = MappingProxyType({a: v for r in by_order for a, v in by_order[r].items()})

    # constructors -----------------------------------------------------------

    @classmethod
    def from_tensors(cls, tensors: Mapping[int, np.ndarray], max_order: int | None = None):
        """Build from dense arrays ``T[r]`` of shape ``(n,) + (n,) * r``.

        Only the sorted-index representative of each entry is read, so the
        resulting jet is symmetric whatever the input.
        """
        n = np.asarray(tensors[min(tensors)]).shape[0]
        max_order = max_order or max(tensors)
        entries = {}
        for r, dense in tensors.items():
            dense = np.asarray(dense, dtype=float)
            for alpha in multiplicities(n, r):
                idx = tuple(i for i, a in enumerate(alpha) for _ in range(a))
                entries[alpha] = dense[(slice(None),) + idx]
        return cls(n, entries, max_order)

    # access -------------------------------------------------------------------

    @property
    def jacobian(self) -> np.ndarray:
        A = np.zeros((self.dim, self.dim))
        for alpha, val in zip(self._alphas[1], self._values[1]):
            A[:, alpha.index(1)] = val
        return A

    @property
    def entries(self) -> Mapping[tuple[int, ...], np.ndarray]:
        return self._entries

    def derivative(self, alpha) -> np.ndarray:
        alpha = tuple(alpha)
        if alpha in self._entries:
            return self._entries[alpha].copy()
        if sum(alpha) > self.max_order:
            raise ValueError(f"order {sum(alpha)} exceeds jet order {self.max_order}")
        return np.zeros(self.dim)

    def taylor_terms(self, order: int):
        """``(alphas, coefficients)`` of the order-``order`` Taylor polynomial,
        coefficients being ``d^alpha F / alpha!``."""
        alphas = self._alphas.get(order, ())
        facts = np.array([alpha_factorial(a) for a in alphas], dtype=float)
        vals = self._values.get(order, np.zeros((0, self.dim)))
        return alphas, vals / facts[:, None] if len(alphas) else vals

    def dense(self, order: int) -> np.ndarray:
        """Full tensor of shape ``(n,) + (n,) * order``; test and debug helper."""
        n = self.dim
        out = np.zeros((n,) + (n,) * order)
        for alpha, val in zip(self._alphas[order], self._values[order]):
            idx = tuple(i for i, a in enumerate(alpha) for _ in range(a))
            for perm in set(itertools.permutations(idx)):
                out[(slice(None),) + perm] = val
        return out

    # evaluation ---------------------------------------------------------------

    def eval_form(self, order: int, args: Sequence) -> np.ndarray:
        """Apply the order-``order`` derivative form to ``args`` (complex allowed)."""
        if not 1 <= order <= self.max_order:
            raise ValueError(f"order must lie in 1..{self.max_order}, got {order}")
        if len(args) != order:
            raise ValueError(f"form of order {order} needs {order} arguments, got {len(args)}")
        vecs = [np.asarray(a, dtype=complex).reshape(-1) for a in args]
        if any(v.shape[0] != self.dim for v in vecs):
            raise ValueError(f"arguments must have dimension {self.dim}")
        alphas = self._alphas[order]
        if not alphas:
            return np.zeros(self.dim, dtype=complex)
        poly = _linear_form_product(vecs)
        weights = np.array([poly.get(a, 0.0) for a in alphas], dtype=complex)
        return weights @ self._values[order]

    def __call__(self, *args):
        return self.eval_form(len(args), args)

    def __repr__(self):
        nnz = {r: len(a) for r, a in self._alphas.items() if a}
        return f"VectorFieldJet(dim={self.dim}, max_order={self.max_order}, nonzero={nnz})"


def eval_form(jet: VectorFieldJet, order: int, args: Sequence) -> np.ndarray:
    return jet.eval_form(order, args)


# construction from callables ------------------------------------------------------


def _taylor_jet(f, x0, order):
    n = len(x0)
    xs = [TruncatedSeries.variable(i, n, order, value=float(x0[i])) for i in range(n)]
    out = f(np.array(xs, dtype=object))
    out = list(out)
    if len(out) != n:
        raise ValueError(f"callable returned {len(out)} components for a {n}-dimensional state")
    entries = {}
    for r in range(1, order + 1):
        for alpha in multiplicities(n, r):
            fact = alpha_factorial(alpha)
            val = []
            for comp in out:
                if isinstance(comp, TruncatedSeries):
                    val.append(np.real_if_close(comp[alpha]) * fact)
                else:
                    val.append(0.0)
            entries[alpha] = np.array(val, dtype=float)
    return entries


def _central_difference(f, x0, alpha, h):
    """Nested central difference for ``d^alpha f`` with step ``h``; O(h^2)."""
    n = len(x0)
    stencils = []
    for m in range(n):
        a = alpha[m]
        pts = [((a / 2 - j) * h, (-1) ** j * math.comb(a, j)) for j in range(a + 1)]
        stencils.append(pts)
    total = 0.0
    for combo in itertools.product(*stencils):
        shift = np.array([c[0] for c in combo])
        weight = math.prod(c[1] for c in combo)
        total = total + weight * np.asarray(f(x0 + shift), dtype=float)
    return total / h ** sum(alpha)


def _fd_jet(f, x0, order, step):
    n = len(x0)
    scale = max(1.0, float(np.max(np.abs(x0))))
    entries = {}
    for r in range(1, order + 1):
        h = step if step is not None else scale * 10.0 ** (-16.0 / (r + 6))
        for alpha in multiplicities(n, r):
            # two Richardson levels on an h^2 error expansion
            d1 = _central_difference(f, x0, alpha, h)
            d2 = _central_difference(f, x0, alpha, h / 2)
            d4 = _central_difference(f, x0, alpha, h / 4)
            r1 = (4 * d2 - d1) / 3
            r2 = (4 * d4 - d2) / 3
            entries[alpha] = (16 * r2 - r1) / 15
    return entries


def jet_from_callable(
    f: Callable,
    x0,
    order: int = MAX_ORDER,
    method: str = "analytic",
    step: float | None = None,
) -> VectorFieldJet:
    """Differentiate ``f`` at ``x0`` up to ``order``.

    ``method="analytic"`` pushes truncated power series through ``f``; this is
    exact to rounding provided ``f`` is written with numpy ufuncs (``np.sin``,
    ``np.cos``, ``np.exp``, ``np.log``, ``np.sqrt``, arithmetic and powers) and
    returns a sequence of components.  ``method="finite-difference"`` uses
    Richardson-extrapolated central differences and is limited to order 4.
    """
    x0 = np.asarray(x0, dtype=float)
    if method == "analytic":
        entries = _taylor_jet(f, x0, order)
    elif method == "finite-difference":
        if order > FD_MAX_ORDER:
            raise ValueError(f"finite differences are unreliable above order {FD_MAX_ORDER}")
        entries = _fd_jet(f, x0, order, step)
    else:
        raise ValueError(f"unknown method {method!r}")
    for alpha, val in entries.items():
        if not np.all(np.isfinite(val)):
            raise FloatingPointError(f"non-finite derivative {alpha} at {x0}")
    return VectorFieldJet(len(x0), entries, max_order=order)
