"""Boolean phenotype functions and their exact statistics under product distributions.

Conventions
-----------
A phenotype is a Boolean function of ``arity`` genes, stored as a full truth
table.  Assignments are encoded as integers with gene 0 in the least
significant bit: ``table[k]`` is the output on the assignment whose bit ``i``
equals ``(k >> i) & 1``.

Marginals follow the allele-0 convention: coordinate ``i`` of a
:class:`ProductDistribution` is the probability that gene ``i`` carries
allele 0, so ``Pr[s_i = 1] = 1 - x_i``.

All statistics are exact multilinear sums over the truth table; the arity is
capped at ``MAX_ARITY`` because the cost is O(2^arity).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import InputError

MAX_ARITY = 20

BUILTIN_KINDS = ("XOR", "OR", "AND", "MAJORITY", "IDENTITY")


@lru_cache(maxsize=None)
def _assignment_bits(arity: int) -> np.ndarray:
    """(2^arity, arity) float matrix of assignment bits, gene 0 in the LSB."""
    idx = np.arange(1 << arity, dtype=np.uint32)
    bits = ((idx[:, None] >> np.arange(arity, dtype=np.uint32)) & 1).astype(np.float64)
    bits.setflags(write=False)
    return bits


@dataclass(frozen=True)
class BooleanFunction:
    """Truth table of a Boolean function on ``arity`` genes."""

    arity: int
    table: np.ndarray

    def __post_init__(self):
        if not isinstance(self.arity, (int, np.integer)) or isinstance(self.arity, bool):
            raise InputError(f"arity must be an integer, got {self.arity!r}")
        if not 1 <= self.arity <= MAX_ARITY:
            raise InputError(f"arity must be in [1, {MAX_ARITY}], got {self.arity}")
        table = np.asarray(self.table)
        if table.ndim != 1 or table.size != (1 << self.arity):
            raise InputError(
                f"table must have length 2^{self.arity} = {1 << self.arity}, "
                f"got shape {table.shape}"
            )
        values = np.unique(table)
        if not np.all(np.isin(values, (0, 1))):
            raise InputError("table entries must be 0 or 1")
        table = table.astype(np.float64)
        table.setflags(write=False)
        object.__setattr__(self, "arity", int(self.arity))
        object.__setattr__(self, "table", table)

    def evaluate(self, assignment) -> int:
        """Output bit for a pure assignment (sequence of 0/1 of length arity)."""
        bits = np.asarray(assignment)
        if bits.ndim != 1 or bits.size != self.arity:
            raise InputError(
                f"assignment must have length {self.arity}, got shape {bits.shape}"
            )
        if not np.all(np.isin(bits, (0, 1))):
            raise InputError("assignment entries must be 0 or 1")
        index = int(np.dot(bits, 1 << np.arange(self.arity)))
        return int(self.table[index])

    @property
    def bits(self) -> np.ndarray:
        """Shared (2^arity, arity) assignment bit matrix."""
        return _assignment_bits(self.arity)

    def __repr__(self):
        tbl = "".join(str(int(v)) for v in self.table)
        if len(tbl) > 32:
            tbl = tbl[:32] + "..."
        return f"BooleanFunction(arity={self.arity}, table={tbl})"


@dataclass(frozen=True)
class ProductDistribution:
    """Vector of allele-0 marginals, one per gene."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise InputError(f"marginals must be a nonempty vector, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InputError("marginals must be finite")
        if np.any(values < 0.0) or np.any(values > 1.0):
            raise InputError("marginals must lie in [0, 1]")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    @classmethod
    def coerce(cls, obj, arity: int | None = None) -> "ProductDistribution":
        dist = obj if isinstance(obj, cls) else cls(np.asarray(obj, dtype=np.float64))
        if arity is not None and len(dist) != arity:
            raise InputError(f"expected {arity} marginals, got {len(dist)}")
        return dist


def _marginals(x, arity: int) -> np.ndarray:
    return ProductDistribution.coerce(x, arity).values


def _stats(fn: BooleanFunction, x: np.ndarray):
    """Expectation and both clamped conditionals for every gene.

    Returns ``(f, f0, f1)`` with ``f0[i] = E f(s) | s_i = 0`` and
    ``f1[i] = E f(s) | s_i = 1``, other genes drawn from ``x``.  No input
    validation; ``x`` must be a float vector of length ``fn.arity``.
    """
    bits = fn.bits
    # factor for gene i in assignment k: x_i when the bit is 0, 1-x_i when 1
    factors = x * (1.0 - bits) + (1.0 - x) * bits
    weights = factors.prod(axis=1)
    f = float(fn.table @ weights)
    # leave-one-out products via exclusive prefix/suffix cumulative products
    prefix = np.cumprod(factors, axis=1)
    suffix = np.cumprod(factors[:, ::-1], axis=1)[:, ::-1]
    loo = np.ones_like(factors)
    loo[:, 1:] = prefix[:, :-1]
    loo[:, :-1] *= suffix[:, 1:]
    weighted = fn.table[:, None] * loo
    f1 = (weighted * bits).sum(axis=0)
    f0 = (weighted * (1.0 - bits)).sum(axis=0)
    return f, f0, f1


def _expectation(fn: BooleanFunction, x: np.ndarray) -> float:
    bits = fn.bits
    factors = x * (1.0 - bits) + (1.0 - x) * bits
    return float(fn.table @ factors.prod(axis=1))


def expectation(fn: BooleanFunction, x) -> float:
    """Expected output of ``fn`` when genes are drawn from marginals ``x``."""
    return _expectation(fn, _marginals(x, fn.arity))


def conditional_pair(fn: BooleanFunction, x, gene: int) -> tuple[float, float]:
    """Expectations of ``fn`` with ``gene`` clamped to allele 0 and to allele 1."""
    values = _marginals(x, fn.arity)
    if not 0 <= gene < fn.arity:
        raise InputError(f"gene index {gene} out of range for arity {fn.arity}")
    _, f0, f1 = _stats(fn, values)
    return float(f0[gene]), float(f1[gene])


def conditional_pairs(fn: BooleanFunction, x) -> tuple[np.ndarray, np.ndarray]:
    """Clamped conditional expectations for every gene, as two vectors."""
    _, f0, f1 = _stats(fn, _marginals(x, fn.arity))
    return f0, f1


def batch_stats(fn: BooleanFunction, xs: np.ndarray):
    """Vectorized :func:`_stats` over a batch of marginal vectors.

    ``xs`` has shape (N, arity); returns ``(f, f0, f1)`` with shapes
    (N,), (N, arity), (N, arity).
    """
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != fn.arity:
        raise InputError(f"batch must have shape (N, {fn.arity}), got {xs.shape}")
    bits = fn.bits
    factors = xs[:, None, :] * (1.0 - bits) + (1.0 - xs[:, None, :]) * bits
    weights = factors.prod(axis=2)
    f = weights @ fn.table
    prefix = np.cumprod(factors, axis=2)
    suffix = np.cumprod(factors[:, :, ::-1], axis=2)[:, :, ::-1]
    loo = np.ones_like(factors)
    loo[:, :, 1:] = prefix[:, :, :-1]
    loo[:, :, :-1] *= suffix[:, :, 1:]
    f1 = np.einsum("nki,k,ki->ni", loo, fn.table, bits)
    f0 = np.einsum("nki,k,ki->ni", loo, fn.table, 1.0 - bits)
    return f, f0, f1


def make_builtin(kind: str, arity: int) -> BooleanFunction:
    """Truth table of a named function family (XOR, OR, AND, MAJORITY, IDENTITY)."""
    name = str(kind).upper()
    if name not in BUILTIN_KINDS:
        raise InputError(f"unknown builtin {kind!r}; choose from {BUILTIN_KINDS}")
    if not isinstance(arity, (int, np.integer)) or arity < 1:
        raise InputError(f"arity must be a positive integer, got {arity!r}")
    if name == "IDENTITY" and arity != 1:
        raise InputError("IDENTITY requires arity 1")
    if name == "MAJORITY" and arity % 2 == 0:
        raise InputError("MAJORITY requires odd arity")
    if arity > MAX_ARITY:
        raise InputError(f"arity must be at most {MAX_ARITY}, got {arity}")
    ones = _assignment_bits(arity).sum(axis=1)
    if name == "XOR":
        table = (ones.astype(np.int64) & 1).astype(np.uint8)
    elif name == "OR":
        table = (ones > 0).astype(np.uint8)
    elif name == "AND":
        table = (ones == arity).astype(np.uint8)
    elif name == "MAJORITY":
        table = (2 * ones > arity).astype(np.uint8)
    else:  # IDENTITY
        table = np.array([0, 1], dtype=np.uint8)
    return BooleanFunction(int(arity), table)


def format_truth_table(fn: BooleanFunction) -> str:
    """One-line interchange format: arity, whitespace, 2^arity chars of 0/1."""
    bits = "".join(str(int(v)) for v in fn.table)
    return f"{fn.arity} {bits}\n"


def parse_truth_table(text: str) -> BooleanFunction:
    """Inverse of :func:`format_truth_table`."""
    tokens = text.split()
    if len(tokens) != 2:
        raise InputError("truth-table text must be: arity, whitespace, bit string")
    try:
        arity = int(tokens[0])
    except ValueError as exc:
        raise InputError(f"bad arity field {tokens[0]!r}") from exc
    if not 1 <= arity <= MAX_ARITY:
        raise InputError(f"arity must be in [1, {MAX_ARITY}], got {arity}")
    bits = tokens[1]
    if len(bits) != (1 << arity) or set(bits) - {"0", "1"}:
        raise InputError(
            f"bit string must be 2^{arity} = {1 << arity} characters of 0/1"
        )
    table = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    return BooleanFunction(arity, table)


def load_truth_table(path) -> BooleanFunction:
    return parse_truth_table(Path(path).read_text())


def save_truth_table(fn: BooleanFunction, path) -> None:
    Path(path).write_text(format_truth_table(fn))
