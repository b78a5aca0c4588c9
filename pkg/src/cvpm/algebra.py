"""Phase-tracked algebra of two-mode displacement operators.

Operators are products ``e^{i theta} D_x(alpha_x) D_y(alpha_y)`` with
``D(alpha) = exp(alpha a^dag - alpha^* a)``. Composition follows the Weyl law

    D(alpha) D(beta) = exp(i Im(alpha beta^*)) D(alpha + beta)

on each mode, so the whole Peres-Mermin square can be manipulated exactly
without ever leaving phase space.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


def _wrap(angle: float) -> float:
    # representative in [-pi, pi]
    return math.remainder(angle, TWO_PI)


@dataclass(frozen=True)
class DisplacementProduct:
    """``exp(i angle) * D_x(amp_x) * D_y(amp_y)``.

    The global phase is stored as an angle (modulo 2 pi); ``phase`` is the
    derived unit complex number.
    """

    angle: float = 0.0
    amp_x: complex = 0j
    amp_y: complex = 0j
    phase: complex = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "angle", _wrap(float(self.angle)))
        object.__setattr__(self, "amp_x", complex(self.amp_x))
        object.__setattr__(self, "amp_y", complex(self.amp_y))
        object.__setattr__(self, "phase", cmath.exp(1j * self.angle))

    @property
    def amps(self) -> np.ndarray:
        return np.array([self.amp_x, self.amp_y], dtype=complex)

    def __matmul__(self, other: "DisplacementProduct") -> "DisplacementProduct":
        return compose(self, other)

    def __neg__(self) -> "DisplacementProduct":
        return DisplacementProduct(self.angle + math.pi, self.amp_x, self.amp_y)

    def inverse(self) -> "DisplacementProduct":
        return DisplacementProduct(-self.angle, -self.amp_x, -self.amp_y)

    def is_identity(self, atol: float = 1e-12) -> bool:
        return (
            abs(self.phase - 1) < atol
            and abs(self.amp_x) < atol
            and abs(self.amp_y) < atol
        )

    def isclose(self, other: "DisplacementProduct", atol: float = 1e-12) -> bool:
        return (
            abs(self.phase - other.phase) < atol
            and abs(self.amp_x - other.amp_x) < atol
            and abs(self.amp_y - other.amp_y) < atol
        )


IDENTITY = DisplacementProduct()


def D_x(alpha: complex) -> DisplacementProduct:
    return DisplacementProduct(0.0, alpha, 0j)


def D_y(alpha: complex) -> DisplacementProduct:
    return DisplacementProduct(0.0, 0j, alpha)


def weyl_angle(alpha: complex, beta: complex) -> float:
    """Angle of the phase picked up by ``D(alpha) D(beta)`` on one mode."""
    return (alpha * beta.conjugate()).imag


def compose(a: DisplacementProduct, b: DisplacementProduct) -> DisplacementProduct:
    """Operator product ``a @ b`` (``b`` acts first on a ket)."""
    angle = a.angle + b.angle + weyl_angle(a.amp_x, b.amp_x) + weyl_angle(a.amp_y, b.amp_y)
    return DisplacementProduct(angle, a.amp_x + b.amp_x, a.amp_y + b.amp_y)


def compose_all(ops: Iterable[DisplacementProduct]) -> DisplacementProduct:
    return reduce(compose, ops, IDENTITY)


def exchange_angle(a: DisplacementProduct, b: DisplacementProduct) -> float:
    """Angle ``phi`` with ``a b = e^{i phi} b a``."""
    return _wrap(
        2.0 * (weyl_angle(a.amp_x, b.amp_x) + weyl_angle(a.amp_y, b.amp_y))
    )


def exchange_phase(a: DisplacementProduct, b: DisplacementProduct) -> complex:
    """Unit complex ``c`` such that ``a b = c * b a``; equals 1 iff they commute."""
    return cmath.exp(1j * exchange_angle(a, b))


def kappa_ideal(a: DisplacementProduct, b: DisplacementProduct) -> float:
    """Noncommutation fraction ``<|[a, b]|^2>/4`` of two displacement products.

    ``[a, b] = (1 - e^{-i phi}) a b`` is a multiple of a unitary, so the value
    does not depend on the state: ``sin^2(phi / 2)``.
    """
    return math.sin(exchange_angle(a, b) / 2.0) ** 2


# --- Peres-Mermin square ----------------------------------------------------


@dataclass(frozen=True)
class SquareParams:
    q0: float
    p0: float

    @classmethod
    def canonical(cls) -> "SquareParams":
        s = math.sqrt(math.pi / 2.0)
        return cls(s, s)

    @property
    def product(self) -> float:
        return self.q0 * self.p0

    def validity(self, atol: float = 1e-12) -> dict:
        """Report whether same-mode q/p displacements anticommute."""
        deviation = self.product - math.pi / 2.0
        return {
            "q0": self.q0,
            "p0": self.p0,
            "product": self.product,
            "deviation": deviation,
            "anticommuting": abs(deviation) <= atol,
        }


ROW_LABELS = ("Row 1", "Row 2", "Row 3")
COLUMN_LABELS = ("Column 1", "Column 2", "Column 3")
CONTEXT_LABELS = ROW_LABELS + COLUMN_LABELS


@dataclass(frozen=True)
class Context:
    """A row or column of the square.

    ``sign`` is the weight the context's expectation carries inside the
    inequality combination (+1 for rows, -1 for columns).
    """

    label: str
    members: tuple[tuple[int, int], ...]
    sign: int

    @property
    def is_row(self) -> bool:
        return self.sign > 0


def contexts() -> tuple[Context, ...]:
    rows = tuple(
        Context(ROW_LABELS[j], tuple((j, k) for k in range(3)), +1) for j in range(3)
    )
    cols = tuple(
        Context(COLUMN_LABELS[k], tuple((j, k) for j in range(3)), -1) for k in range(3)
    )
    return rows + cols


def context_by_label(label: str) -> Context:
    for ctx in contexts():
        if ctx.label == label:
            return ctx
    raise KeyError(f"unknown context {label!r}")


def context_pairs(ctx: Context) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Cyclic ordered pairs (1,2), (2,3), (3,1) of a context, as tabulated."""
    m = ctx.members
    return [(m[0], m[1]), (m[1], m[2]), (m[2], m[0])]


def operator_label(jk: tuple[int, int]) -> str:
    return f"O{jk[0] + 1}{jk[1] + 1}"


@dataclass(frozen=True)
class PMSquare:
    ops: tuple[tuple[DisplacementProduct, ...], ...]
    params: SquareParams

    def __getitem__(self, jk: tuple[int, int]) -> DisplacementProduct:
        j, k = jk
        return self.ops[j][k]

    def context_ops(self, ctx: Context) -> list[DisplacementProduct]:
        return [self[jk] for jk in ctx.members]

    def validity(self) -> dict:
        report = self.params.validity()
        report["max_in_context_kappa"] = max(
            kappa_ideal(self[a], self[b])
            for ctx in contexts()
            for a, b in context_pairs(ctx)
        )
        return report


def build_pm_square(params: SquareParams) -> PMSquare:
    """The continuous-variable Peres-Mermin square.

    Rows 1-2 hold single-mode displacements and the minus-signed two-mode
    products; row 3 holds the correlated q, p and (q+ip) displacements.
    """
    q0, p0 = params.q0, params.p0
    if not (math.isfinite(q0) and math.isfinite(p0)) or q0 <= 0 or p0 <= 0:
        raise ValueError("q0 and p0 must be finite and positive")
    ip0 = 1j * p0
    grid = (
        (D_x(-q0), D_y(-ip0), -(D_x(q0) @ D_y(ip0))),
        (D_y(-q0), D_x(-ip0), -(D_x(ip0) @ D_y(q0))),
        (D_x(q0) @ D_y(q0), D_x(ip0) @ D_y(ip0), D_x(-q0 - ip0) @ D_y(-q0 - ip0)),
    )
    return PMSquare(grid, params)


def context_product(square: PMSquare, ctx: Context) -> DisplacementProduct:
    return compose_all(square.context_ops(ctx))


# --- Discrete-variable counterpart ------------------------------------------

_PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class PauliString:
    """``sign * sigma^{paulis[0]} (x) sigma^{paulis[1]}`` with 0=I, 1=X, 2=Y, 3=Z."""

    paulis: tuple[int, ...]
    sign: int = 1

    def __post_init__(self):
        if len(self.paulis) > 2:
            raise ValueError("only two-qubit Pauli strings map onto two qumodes")
        if any(p not in (0, 1, 2, 3) for p in self.paulis):
            raise ValueError(f"invalid Pauli index in {self.paulis}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def matrix(self) -> np.ndarray:
        paulis = tuple(self.paulis) + (0,) * (2 - len(self.paulis))
        return self.sign * np.kron(_PAULI[paulis[0]], _PAULI[paulis[1]])


@dataclass(frozen=True)
class PauliSquare:
    strings: tuple[tuple[PauliString, ...], ...]

    @property
    def ops(self) -> tuple[tuple[np.ndarray, ...], ...]:
        return tuple(tuple(s.matrix() for s in row) for row in self.strings)

    def __getitem__(self, jk: tuple[int, int]) -> np.ndarray:
        return self.strings[jk[0]][jk[1]].matrix()


def build_pauli_square() -> PauliSquare:
    X, Y, Z = 1, 2, 3
    grid = (
        (PauliString((X, 0)), PauliString((0, Z)), PauliString((X, Z), -1)),
        (PauliString((0, X)), PauliString((Z, 0)), PauliString((Z, X), -1)),
        (PauliString((X, X)), PauliString((Z, Z)), PauliString((Y, Y))),
    )
    return PauliSquare(grid)


def pauli_context_product(square: PauliSquare, ctx: Context) -> np.ndarray:
    out = np.eye(4, dtype=complex)
    for jk in ctx.members:
        out = out @ square[jk]
    return out


def _gkp_amplitude(pauli: int, params: SquareParams) -> complex:
    # X -> q shift, Z -> p shift, Y -> both
    q0, p0 = params.q0, params.p0
    return (0j, complex(q0), complex(q0, p0), complex(0, p0))[pauli]


def pauli_to_displacement(p: PauliString, params: SquareParams) -> DisplacementProduct:
    """GKP image of a two-qubit Pauli string, before any sign balancing."""
    paulis = tuple(p.paulis) + (0,) * (2 - len(p.paulis))
    angle = 0.0 if p.sign > 0 else math.pi
    return DisplacementProduct(
        angle, _gkp_amplitude(paulis[0], params), _gkp_amplitude(paulis[1], params)
    )


def balance_signs(grid: Sequence[Sequence[DisplacementProduct]]) -> tuple:
    """Flip displacement directions so every context has zero net shift.

    Each entry may be replaced by ``D(-alpha)`` on both modes at once. The
    flips are fixed by requiring zero net displacement per mode along every
    row and column; the residual global flip is resolved by keeping the
    orientation of entry (3,1).
    """
    cells = [(j, k) for j in range(3) for k in range(3)]
    solutions = []
    for flips in itertools.product((1, -1), repeat=9):
        f = dict(zip(cells, flips))
        ok = True
        for ctx in contexts():
            net_x = sum(f[jk] * grid[jk[0]][jk[1]].amp_x for jk in ctx.members)
            net_y = sum(f[jk] * grid[jk[0]][jk[1]].amp_y for jk in ctx.members)
            if abs(net_x) > 1e-12 or abs(net_y) > 1e-12:
                ok = False
                break
        if ok:
            solutions.append(f)
    anchored = [f for f in solutions if f[(2, 0)] == 1]
    if not anchored:
        raise ValueError("no sign assignment balances every context")
    f = anchored[0]
    return tuple(
        tuple(
            DisplacementProduct(
                grid[j][k].angle, f[(j, k)] * grid[j][k].amp_x, f[(j, k)] * grid[j][k].amp_y
            )
            for k in range(3)
        )
        for j in range(3)
    )


def square_from_pauli(params: SquareParams) -> PMSquare:
    """Map the Pauli square through the GKP code and balance the signs."""
    dv = build_pauli_square()
    mapped = [[pauli_to_displacement(s, params) for s in row] for row in dv.strings]
    return PMSquare(balance_signs(mapped), params)
