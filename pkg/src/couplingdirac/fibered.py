"""Fibered patches, Ehresmann connections, curvature, and base forms.

Conventions (asserted by tests): the horizontal lift of a base
coordinate field is ``hor(d_a) = d_a - sum_u G^u_a d_u`` and the
annihilator coframe is ``eta^u = dy^u + sum_a G^u_a dx^a``, so
``eta^u(hor(d_a)) = 0`` holds identically.
"""

from __future__ import annotations

from itertools import combinations
from typing import Mapping, Sequence

from .errors import DegreeError, PatchError, PatchMismatchError
from .symexpr import Coordinate, Patch, ScalarExpr
from .tensorcalc import DiffForm, Multivector, _Alternating, lie_bracket


class FiberedPatch(Patch):
    """A patch whose coordinates are split into base and fiber roles."""

    __slots__ = ("base_indices", "fiber_indices")

    def __init__(self, coords):
        super().__init__(coords)
        self.base_indices = tuple(
            i for i, c in enumerate(self.coords) if c.role == "base")
        self.fiber_indices = tuple(
            i for i, c in enumerate(self.coords) if c.role == "fiber")
        if not self.base_indices or not self.fiber_indices:
            raise PatchError("a fibered patch needs base and fiber coordinates")

    @classmethod
    def build(cls, base, fiber, angles: Sequence[str] = ()) -> "FiberedPatch":
        if isinstance(base, str):
            base = base.split()
        if isinstance(fiber, str):
            fiber = fiber.split()
        coords = [Coordinate(n, role="base", angle=(n in angles)) for n in base]
        coords += [Coordinate(n, role="fiber", angle=(n in angles)) for n in fiber]
        return cls(coords)

    @property
    def base_names(self):
        return tuple(self.coords[i].name for i in self.base_indices)

    @property
    def fiber_names(self):
        return tuple(self.coords[i].name for i in self.fiber_indices)

    def fiber_patch(self) -> Patch:
        """The fiber alone, as a plain patch."""
        return Patch(self.coords[i] for i in self.fiber_indices)


class Connection:
    """Ehresmann connection stored by horizontal-lift coefficients G^u_a."""

    __slots__ = ("patch", "table")

    def __init__(self, patch: FiberedPatch, table: Mapping = ()):
        if not isinstance(patch, FiberedPatch):
            raise PatchError("a connection needs a fibered patch")
        self.patch = patch
        clean = {}
        fiber = set(patch.fiber_indices)
        base = set(patch.base_indices)
        for (u, a), coeff in dict(table).items():
            u = patch.index(u) if isinstance(u, str) else u
            a = patch.index(a) if isinstance(a, str) else a
            if u not in fiber or a not in base:
                raise PatchError(
                    f"connection coefficient indexed by (fiber, base), got "
                    f"({patch.coords[u].name}, {patch.coords[a].name})")
            if isinstance(coeff, str):
                coeff = patch.parse(coeff)
            if not isinstance(coeff, ScalarExpr) or coeff.patch != patch:
                raise PatchMismatchError(
                    "connection coefficients must live on the total patch")
            if coeff:
                clean[(u, a)] = coeff
        self.table = clean

    @classmethod
    def flat(cls, patch: FiberedPatch) -> "Connection":
        return cls(patch, {})

    def coefficient(self, u, a) -> ScalarExpr:
        u = self.patch.index(u) if isinstance(u, str) else u
        a = self.patch.index(a) if isinstance(a, str) else a
        return self.table.get((u, a), self.patch.zero())

    def __eq__(self, other):
        return (isinstance(other, Connection) and self.patch == other.patch
                and self.table == other.table)

    def __repr__(self):
        entries = ", ".join(
            f"G^{self.patch.coords[u].name}_{self.patch.coords[a].name}={c}"
            for (u, a), c in sorted(self.table.items()))
        return f"Connection({entries or 'flat'})"

    # -- lifts ---------------------------------------------------------------
    def hor(self, a) -> Multivector:
        """Horizontal lift of the base coordinate field d_a."""
        a = self.patch.index(a) if isinstance(a, str) else a
        comps = {(a,): self.patch.one()}
        for (u, b), coeff in self.table.items():
            if b == a:
                comps[(u,)] = -coeff
        return Multivector(self.patch, 1, comps)

    def horizontal_derivative(self, a, f) -> ScalarExpr:
        """hor(d_a) applied to a scalar function."""
        a = self.patch.index(a) if isinstance(a, str) else a
        out = f.differentiate(self.patch.coords[a].name)
        for (u, b), coeff in self.table.items():
            if b == a:
                df = f.differentiate(self.patch.coords[u].name)
                if df:
                    out = out - coeff * df
        return out


class BaseForm(_Alternating):
    """Differential form on the base with coefficients on the total patch."""

    _basis_symbol = "dx:"

    def __init__(self, patch: FiberedPatch, degree: int, comps):
        super().__init__(patch, degree, comps)
        base = set(patch.base_indices)
        for key in self.comps:
            if not set(key) <= base:
                bad = ",".join(patch.coords[i].name for i in key)
                raise DegreeError(f"base form indexed by non-base tuple ({bad})")


def horizontal_lift(conn: Connection, X: Multivector) -> Multivector:
    """Lift a base vector field through the connection."""
    patch = conn.patch
    if X.patch != patch:
        raise PatchMismatchError("vector field lives on a different patch")
    if X.degree != 1:
        raise DegreeError("horizontal_lift needs a vector field")
    fiber = set(patch.fiber_indices)
    out = Multivector.zero(patch, 1)
    for (i,), c in X.items():
        if i in fiber:
            raise ValueError(
                f"cannot lift a field with fiber component "
                f"{patch.coords[i].name}")
        out = out + c * conn.hor(i)
    return out


def vertical_projection(conn: Connection, Y: Multivector) -> Multivector:
    """Project a total-space vector field onto the fiber directions along Hor."""
    patch = conn.patch
    if Y.degree != 1:
        raise DegreeError("vertical_projection needs a vector field")
    comps = {}
    for (i,), c in Y.items():
        if i in patch.fiber_indices:
            comps[(i,)] = comps.get((i,), patch.zero()) + c
    proj = Multivector(patch, 1, comps)
    for (u, a), coeff in conn.table.items():
        c = Y.comps.get((a,))
        if c is not None:
            proj = proj + Multivector(patch, 1, {(u,): c * coeff})
    return proj


def curvature(conn: Connection, X: Multivector, Y: Multivector) -> Multivector:
    """Curv(X, Y) = hor([X, Y]) - [hor(X), hor(Y)]; always vertical."""
    bracket = lie_bracket(X, Y)
    return horizontal_lift(conn, bracket) - lie_bracket(
        horizontal_lift(conn, X), horizontal_lift(conn, Y))


def coordinate_curvature(conn: Connection, a, b) -> Multivector:
    """Curvature on the coordinate fields (d_a, d_b)."""
    patch = conn.patch
    return curvature(conn, Multivector.basis(patch, a) if isinstance(a, str)
                     else Multivector(patch, 1, {(a,): patch.one()}),
                     Multivector.basis(patch, b) if isinstance(b, str)
                     else Multivector(patch, 1, {(b,): patch.one()}))


def d_gamma(conn: Connection, alpha: BaseForm) -> BaseForm:
    """Koszul differential twisted by horizontal lifts.

    On coordinate base fields the bracket terms vanish, leaving
    ``(d_gamma a)_{a0..ak} = sum_i (-1)^i hor(d_{ai}) a_{a0..^ai..ak}``.
    """
    patch = conn.patch
    if alpha.patch != patch:
        raise PatchMismatchError("base form lives on a different patch")
    table: dict = {}
    for key in combinations(patch.base_indices, alpha.degree + 1):
        total = patch.zero()
        for pos, a in enumerate(key):
            rest = key[:pos] + key[pos + 1:]
            c = alpha.comps.get(rest)
            if c is None:
                continue
            d = conn.horizontal_derivative(a, c)
            total = total + (d if pos % 2 == 0 else -d)
        if total:
            table[key] = total
    return BaseForm(patch, alpha.degree + 1, table)


def promote(conn: Connection, F: BaseForm) -> DiffForm:
    """Extend a base 2-form to the horizontal 2-form on the total patch.

    The extension vanishes on vertical vectors and restricts to F on
    horizontal lifts; in coordinates it is literally the same component
    table read as a total-patch form (the lift coframe dual to hor(d_a)
    is dx^a).
    """
    if F.degree != 2:
        raise DegreeError("promote expects a base 2-form")
    if F.patch != conn.patch:
        raise PatchMismatchError("base form lives on a different patch")
    return DiffForm(conn.patch, 2, dict(F.comps))


def ann_hor_basis(conn: Connection) -> list:
    """The coframe eta^u = dy^u + G^u_a dx^a spanning Ann(Hor)."""
    patch = conn.patch
    out = []
    for u in patch.fiber_indices:
        comps = {(u,): patch.one()}
        for (v, a), coeff in conn.table.items():
            if v == u:
                comps[(a,)] = coeff
        out.append(DiffForm(patch, 1, comps))
    return out
