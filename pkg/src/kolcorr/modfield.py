"""Number-theoretic transforms over 32-bit prime fields.

The default field has order ``p = 5 N + 1 = 3874204891`` with
``N = 2 * 3**18``; ``32`` generates its subgroup of order ``N`` so every
length ``2 * 3**j`` (``j <= 18``) has a root of unity.  The alternative
``3 * 2**30 + 1`` supports power-of-two lengths with a pure radix-2 plan.

Residues are stored as ``uint32``; products are formed in ``uint64``
(both factors are below 2**32, so the product is exact) and reduced with
``%``.

Transform plan
--------------
Decimation in frequency, in place, one stage per prime factor of the
length in the order given by :meth:`PrimeField.plan` (the radix-2 stage
first, then radix-3 stages).  A stage with radix ``R`` sees the buffer as
``(B, R, M)`` blocks and writes::

    out[b, r, j] = w**(r*j) * sum_q in[b, q, j] * w_R**(r*q)

where ``w`` has order ``R*M`` and ``w_R = w**M``.  After all stages the
buffer holds the transform at digit-reversed positions: position
``r_1*(R_2...R_s) + ... + r_s`` holds ``f(w**(r_1 + R_1 r_2 + ...))``.  A
final axis transpose restores natural order.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidParams, ValidationError

CHUNK = 1 << 20


def _factor_small(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    q = 2
    while q * q <= n:
        while n % q == 0:
            out[q] = out.get(q, 0) + 1
            n //= q
        q += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@dataclass(frozen=True)
class PrimeField:
    name: str
    p: int
    order: int
    root: int
    radices: tuple[int, ...]

    def __post_init__(self):
        if self.p >= 1 << 32:
            raise InvalidParams("modulus must fit in 32 bits")
        if (self.p - 1) % self.order:
            raise InvalidParams("root order must divide p - 1")
        if not self.has_order(self.root, self.order):
            raise InvalidParams(f"{self.root} does not have order {self.order} mod {self.p}")

    # -- scalar arithmetic ---------------------------------------------------
    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def pow(self, a: int, e: int) -> int:
        return pow(a, e, self.p)

    def inv(self, a: int) -> int:
        """Inverse by the extended Euclidean algorithm."""
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        r0, r1, s0, s1 = self.p, a, 0, 1
        while r1:
            q = r0 // r1
            r0, r1 = r1, r0 - q * r1
            s0, s1 = s1, s0 - q * s1
        return s0 % self.p

    def has_order(self, w: int, L: int) -> bool:
        if pow(w, L, self.p) != 1:
            return False
        return all(pow(w, L // q, self.p) != 1 for q in _factor_small(L))

    def decode(self, v):
        """Map residues to the centered range (-(p-1)/2, (p-1)/2]."""
        half = (self.p - 1) // 2
        if isinstance(v, (int, np.integer)):
            v = int(v)
            return v if v <= half else v - self.p
        v = np.asarray(v, dtype=np.int64)
        return np.where(v <= half, v, v - self.p)

    def encode(self, values) -> np.ndarray:
        return np.mod(np.asarray(values, dtype=np.int64), self.p).astype(np.uint32)

    # -- transform lengths -----------------------------------------------------
    def admissible(self, L: int) -> bool:
        if L < 2 or self.order % L:
            return False
        f = _factor_small(L)
        if set(f) - set(self.radices):
            return False
        # the default field restricts itself to 2 * 3**j
        return 2 in f and f[2] == 1 if self.radices == (2, 3) else True

    def plan(self, L: int) -> list[int]:
        if not self.admissible(L):
            raise InvalidParams(f"length {L} is not admissible in field {self.name}")
        f = _factor_small(L)
        return [q for q in self.radices for _ in range(f.get(q, 0))]

    def smallest_admissible(self, at_least: int) -> int:
        best = None
        L = 2
        while L <= self.order:
            if L >= at_least and self.admissible(L):
                best = L if best is None else min(best, L)
            L = self._next_candidate(L)
            if best is not None and L > best:
                break
        if best is None:
            raise InvalidParams(f"no admissible length >= {at_least} in field {self.name}")
        return best

    def _next_candidate(self, L: int) -> int:
        return L * 3 if self.radices == (2, 3) else L * 2

    def root_of_order(self, L: int) -> int:
        if not self.admissible(L):
            raise InvalidParams(f"length {L} is not admissible in field {self.name}")
        return pow(self.root, self.order // L, self.p)

    @cached_property
    def inv_root(self) -> int:
        return self.inv(self.root)


def _find_generator(p: int) -> int:
    factors = _factor_small(p - 1)
    g = 2
    while any(pow(g, (p - 1) // q, p) == 1 for q in factors):
        g += 1
    return g


N_MAX = 2 * 3 ** 18
FIELD_5N1 = PrimeField("5n1", 5 * N_MAX + 1, N_MAX, 32, (2, 3))
_P2 = 3 * 2 ** 30 + 1
FIELD_3X2P30 = PrimeField("3x2p30", _P2, 2 ** 30, pow(_find_generator(_P2), 3, _P2), (2,))
FIELDS = {f.name: f for f in (FIELD_5N1, FIELD_3X2P30)}
DEFAULT_FIELD = FIELD_5N1


def mod_add(a, b, field=DEFAULT_FIELD):
    return field.add(a, b)


def mod_sub(a, b, field=DEFAULT_FIELD):
    return field.sub(a, b)


def mod_mul(a, b, field=DEFAULT_FIELD):
    return field.mul(a, b)


def pow_mod(a, e, field=DEFAULT_FIELD):
    return field.pow(a, e)


def inv_mod(a, field=DEFAULT_FIELD):
    return field.inv(a)


def root_of_order(L: int, field: PrimeField = DEFAULT_FIELD) -> int:
    return field.root_of_order(L)


def _power_table(w: int, n: int, p: int) -> np.ndarray:
    pp = np.uint64(p)
    tbl = np.ones(n, dtype=np.uint64)
    filled = 1
    while filled < n:
        step = min(filled, n - filled)
        tbl[filled:filled + step] = tbl[:step] * np.uint64(pow(w, filled, p)) % pp
        filled += step
    return tbl


def transform_inplace(buf: np.ndarray, root: int, field: PrimeField = DEFAULT_FIELD) -> np.ndarray:
    """Forward transform of a ``uint32`` buffer at ``root``.

    The stages run in place on ``buf``; the natural-order result is a new
    array (``buf`` is left digit-reversed and should be discarded).
    """
    L = buf.size
    radices = field.plan(L)
    if not field.has_order(root, L):
        raise ValidationError(f"root {root} does not have order {L}")
    p = field.p
    pp = np.uint64(p)
    B, span = 1, L
    for R in radices:
        M = span // R
        w = pow(root, L // span, p)
        wr = np.uint64(pow(w, M, p))
        view = buf.reshape(B, R, M)
        jstep = min(M, CHUNK)
        rows = max(1, CHUNK // (R * M))
        tbl = _power_table(w, jstep, p)
        for j0 in range(0, M, jstep):
            j1 = min(M, j0 + jstep)
            tw1 = tbl[:j1 - j0] * np.uint64(pow(w, j0, p)) % pp
            tw2 = tw1 * tw1 % pp if R == 3 else None
            for b0 in range(0, B, rows):
                b1 = min(B, b0 + rows)
                blk = view[b0:b1, :, j0:j1]
                x0 = blk[:, 0].astype(np.uint64)
                x1 = blk[:, 1].astype(np.uint64)
                if R == 2:
                    blk[:, 0] = (x0 + x1) % pp
                    blk[:, 1] = (x0 + pp - x1) % pp * tw1 % pp
                else:
                    x2 = blk[:, 2].astype(np.uint64)
                    # with c the cube root of unity, c**2 = -1 - c
                    u = (x1 + pp - x2) * wr % pp
                    blk[:, 0] = (x0 + x1 + x2) % pp
                    blk[:, 1] = (x0 + pp - x2 + u) % pp * tw1 % pp
                    blk[:, 2] = (x0 + 2 * pp - x1 - u) % pp * tw2 % pp
        B, span = B * R, M
    if len(radices) == 1:
        return buf
    axes = tuple(range(len(radices) - 1, -1, -1))
    return np.ascontiguousarray(buf.reshape(tuple(radices)).transpose(axes)).reshape(L)


def _as_residues(vec, field: PrimeField) -> np.ndarray:
    arr = np.asarray(vec)
    if arr.ndim != 1:
        raise InvalidParams("expected a 1-d residue vector")
    if arr.size and (int(arr.min()) < 0 or int(arr.max()) >= field.p):
        raise InvalidParams("residues must lie in [0, p)")
    return arr.astype(np.uint32, copy=True)


def ntt(vec, root: int | None = None, field: PrimeField = DEFAULT_FIELD) -> np.ndarray:
    """``(f(1), f(w), ..., f(w**(L-1)))`` for the coefficient vector ``vec``."""
    buf = _as_residues(vec, field)
    if root is None:
        root = field.root_of_order(buf.size)
    return transform_inplace(buf, root, field)


def scale_inplace(buf: np.ndarray, factor: int, field: PrimeField = DEFAULT_FIELD) -> np.ndarray:
    pp = np.uint64(field.p)
    f = np.uint64(factor % field.p)
    for s in range(0, buf.size, CHUNK):
        buf[s:s + CHUNK] = buf[s:s + CHUNK].astype(np.uint64) * f % pp
    return buf


def intt(vec, root: int | None = None, field: PrimeField = DEFAULT_FIELD) -> np.ndarray:
    """Inverse of :func:`ntt`: transform at ``root**-1`` scaled by ``L**-1``."""
    buf = _as_residues(vec, field)
    L = buf.size
    if root is None:
        root = field.root_of_order(L)
    out = transform_inplace(buf, field.inv(root), field)
    return scale_inplace(out, field.inv(L), field)


def pointwise_mul_inplace(a: np.ndarray, b: np.ndarray, field: PrimeField = DEFAULT_FIELD) -> np.ndarray:
    pp = np.uint64(field.p)
    for s in range(0, a.size, CHUNK):
        a[s:s + CHUNK] = a[s:s + CHUNK].astype(np.uint64) * b[s:s + CHUNK].astype(np.uint64) % pp
    return a


def cyclic_convolution(a, b, field: PrimeField = DEFAULT_FIELD) -> np.ndarray:
    """Coefficients of ``a(x) b(x) mod x**L - 1``."""
    a = _as_residues(a, field)
    b = _as_residues(b, field)
    if a.size != b.size:
        raise InvalidParams("vectors must have equal length")
    L = a.size
    w = field.root_of_order(L)
    fa = transform_inplace(a, w, field)
    fb = transform_inplace(b, w, field)
    del a, b
    prod = pointwise_mul_inplace(fa, fb, field)
    del fb
    out = transform_inplace(prod, field.inv(w), field)
    return scale_inplace(out, field.inv(L), field)
