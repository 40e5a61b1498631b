"""Geometric data on a fibered patch and its coupling Dirac presentation.

A triple (vertical bivector, connection, horizontal 2-form) determines an
almost-Dirac subbundle of TE + T*E spanned by one generator per coordinate:

    e_a = (hor(d_a), i_{hor(d_a)} Fbar)      for each base coordinate,
    e_u = (-V#(eta^u), eta^u)                for each fiber coordinate,

where eta^u runs over the annihilator coframe of the horizontal
distribution.  ``check_integrability`` decides the four closure conditions
directly on the data; ``verify_closure`` decides them again on the span,
by pairing Courant brackets of generators against all generators.  The two
verdicts agree, and each nonzero pairing is classified by the condition
responsible for it, so a single broken condition is pinpointed from the
bracket table alone.

Sign conventions are fixed once here: with curvature
``hor([X,Y]) - [hor X, hor Y]`` and ``sharp`` contracting the first slot,
the vertical generators need the minus sign above, the graph compatibility
law reads ``sharp(Pi, form) + vf = 0`` per generator, and the nondegenerate
dictionary is ``W = -[F]^{-1}`` (bivector from data) and ``F = -[M]^{-1}``
(data from bivector, M the base-base block).
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    DegenerateInputError,
    DegreeError,
    MalformedDataError,
    NonCasimirError,
    PatchError,
    PatchMismatchError,
)
from .fibered import (
    BaseForm,
    Connection,
    FiberedPatch,
    ann_hor_basis,
    coordinate_curvature,
    d_gamma,
    horizontal_lift,
    promote,
)
from .fractionfield import (
    RatExpr,
    null_space,
    rat_inverse,
    to_ratexpr,
)
from .symexpr import ScalarExpr
from .tensorcalc import (
    CourantSection,
    Multivector,
    contract,
    courant_bracket,
    d_scalar,
    lie_derivative,
    pairing_plus,
    schouten,
    sharp,
)

JACOBI = "jacobi"
POISSON_CONNECTION = "poisson_connection"
CURVATURE_IDENTITY = "curvature_identity"
HORIZONTALLY_CLOSED = "horizontally_closed"
CONDITION_ORDER = (JACOBI, POISSON_CONNECTION, CURVATURE_IDENTITY,
                   HORIZONTALLY_CLOSED)

# which integrability condition a nonzero pairing <[e_i, e_j], e_k>
# instantiates, keyed by the generator kinds (H = horizontal, V = vertical)
_RELATION_CLASS = {
    ("H", "H", "H"): HORIZONTALLY_CLOSED,
    ("H", "H", "V"): CURVATURE_IDENTITY,
    ("H", "V", "H"): CURVATURE_IDENTITY,
    ("V", "H", "H"): CURVATURE_IDENTITY,
    ("H", "V", "V"): POISSON_CONNECTION,
    ("V", "H", "V"): POISSON_CONNECTION,
    ("V", "V", "H"): POISSON_CONNECTION,
    ("V", "V", "V"): JACOBI,
}


class Witness:
    """A nonzero expression together with the index tuple producing it."""

    __slots__ = ("indices", "expression")

    def __init__(self, indices: Sequence[str], expression):
        self.indices = tuple(indices)
        self.expression = expression

    def as_document(self) -> dict:
        return {"indices": list(self.indices),
                "expression": str(self.expression)}

    def __eq__(self, other):
        return (isinstance(other, Witness) and self.indices == other.indices
                and str(self.expression) == str(other.expression))

    def __repr__(self):
        return f"Witness({','.join(self.indices)}: {self.expression})"


class ConditionReport:
    """Verdict for a single named condition, with failure witnesses."""

    __slots__ = ("name", "witnesses")

    def __init__(self, name: str, witnesses: Iterable[Witness] = ()):
        self.name = name
        self.witnesses = tuple(sorted(witnesses, key=lambda w: w.indices))

    @property
    def passed(self) -> bool:
        return not self.witnesses

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def as_document(self) -> dict:
        return {"name": self.name, "status": self.status,
                "witnesses": [w.as_document() for w in self.witnesses]}

    def __repr__(self):
        return f"ConditionReport({self.name}: {self.status})"


class CheckReport:
    """A bundle of condition verdicts; passes iff every condition does."""

    __slots__ = ("conditions",)

    def __init__(self, conditions: Iterable[ConditionReport]):
        self.conditions = tuple(conditions)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def condition(self, name: str) -> ConditionReport:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def failing(self) -> tuple:
        return tuple(c.name for c in self.conditions if not c.passed)

    def as_document(self, pivot_denominators: Sequence = ()) -> dict:
        return {"verdict": self.verdict,
                "conditions": [c.as_document() for c in self.conditions],
                "pivot_denominators": [str(p) for p in pivot_denominators]}

    def __repr__(self):
        body = ", ".join(f"{c.name}={c.status}" for c in self.conditions)
        return f"CheckReport({self.verdict}: {body})"


class GeometricData:
    """Vertical bivector + connection + horizontal 2-form on a fibered patch."""

    __slots__ = ("patch", "vertical_bivector", "connection", "horizontal_form")

    def __init__(self, patch: FiberedPatch, vertical_bivector: Multivector,
                 connection: Connection | None = None,
                 horizontal_form: BaseForm | None = None):
        if not isinstance(patch, FiberedPatch):
            raise PatchError("geometric data needs a fibered patch")
        if connection is None:
            connection = Connection.flat(patch)
        if horizontal_form is None:
            horizontal_form = BaseForm.zero(patch, 2)
        V = vertical_bivector
        if V.patch != patch or connection.patch != patch \
                or horizontal_form.patch != patch:
            raise PatchMismatchError("data pieces live on different patches")
        if V.degree != 2:
            raise DegreeError("the vertical part must be a bivector")
        if not isinstance(horizontal_form, BaseForm) \
                or horizontal_form.degree != 2:
            raise MalformedDataError("the horizontal part must be a base 2-form")
        fiber = set(patch.fiber_indices)
        for key, c in V.items():
            if not set(key) <= fiber:
                bad = ",".join(patch.coords[i].name for i in key)
                raise MalformedDataError(
                    f"bivector component ({bad}) involves base directions")
            if not isinstance(c, ScalarExpr):
                raise MalformedDataError(
                    "bivector coefficients must be plain expressions")
        for c in horizontal_form.comps.values():
            if not isinstance(c, ScalarExpr):
                raise MalformedDataError(
                    "2-form coefficients must be plain expressions")
        self.patch = patch
        self.vertical_bivector = V
        self.connection = connection
        self.horizontal_form = horizontal_form

    def __eq__(self, other):
        return (isinstance(other, GeometricData)
                and self.patch == other.patch
                and self.vertical_bivector == other.vertical_bivector
                and self.connection == other.connection
                and self.horizontal_form == other.horizontal_form)

    def __repr__(self):
        return (f"GeometricData(V={self.vertical_bivector}, "
                f"conn={self.connection}, F={self.horizontal_form})")


class DiracPresentation:
    """Labelled Courant sections split into horizontal/vertical generators."""

    __slots__ = ("patch", "horizontal", "vertical")

    def __init__(self, patch, horizontal=(), vertical=()):
        self.patch = patch
        self.horizontal = tuple((str(n), s) for n, s in horizontal)
        self.vertical = tuple((str(n), s) for n, s in vertical)
        seen = set()
        for name, section in self.horizontal + self.vertical:
            if not isinstance(section, CourantSection):
                raise TypeError("generators must be Courant sections")
            if section.patch != patch:
                raise PatchMismatchError(
                    f"generator {name} lives on a different patch")
            if name in seen:
                raise ValueError(f"duplicate generator label {name}")
            seen.add(name)

    def labeled(self) -> Iterator[tuple]:
        for name, section in self.horizontal:
            yield "H", name, section
        for name, section in self.vertical:
            yield "V", name, section

    @property
    def sections(self) -> tuple:
        return tuple(s for _, _, s in self.labeled())

    def __len__(self):
        return len(self.horizontal) + len(self.vertical)

    def __repr__(self):
        names = ", ".join(n for _, n, _ in self.labeled())
        return f"DiracPresentation({names})"


def _tensor_witnesses(T, prefix: tuple = ()) -> list:
    patch = T.patch
    return [Witness(prefix + tuple(patch.coords[i].name for i in key),
                    T.comps[key])
            for key in sorted(T.comps)]


def check_integrability(data: GeometricData) -> CheckReport:
    """Decide the four closure conditions directly on the data.

    jacobi: the vertical bivector self-commutes under the Schouten
    bracket.  poisson_connection: it is preserved along every horizontal
    coordinate lift.  curvature_identity: the connection's curvature on
    (d_a, d_b) equals the bivector's bundle map applied to d of the
    2-form component F_ab.  horizontally_closed: the twisted Koszul
    differential of the 2-form vanishes.
    """
    patch = data.patch
    V = data.vertical_bivector
    conn = data.connection
    F = data.horizontal_form

    jac = _tensor_witnesses(schouten(V, V))

    pres = []
    for a in patch.base_indices:
        moved = lie_derivative(conn.hor(a), V)
        pres += _tensor_witnesses(moved, prefix=(patch.coords[a].name,))

    curv = []
    for a, b in combinations(patch.base_indices, 2):
        f_ab = F.coefficient(a, b)
        delta = coordinate_curvature(conn, a, b) \
            - sharp(V, d_scalar(patch, f_ab))
        curv += _tensor_witnesses(
            delta, prefix=(patch.coords[a].name, patch.coords[b].name))

    closed = _tensor_witnesses(d_gamma(conn, F))

    return CheckReport([
        ConditionReport(JACOBI, jac),
        ConditionReport(POISSON_CONNECTION, pres),
        ConditionReport(CURVATURE_IDENTITY, curv),
        ConditionReport(HORIZONTALLY_CLOSED, closed),
    ])


def build_dirac(data: GeometricData) -> DiracPresentation:
    """Span the almost-Dirac subbundle attached to the data.

    One horizontal generator per base coordinate (its lift, paired with
    the lift's contraction into the promoted 2-form) and one vertical
    generator per fiber coordinate (minus the bivector image of the
    annihilator coframe element, paired with that element).
    """
    patch = data.patch
    conn = data.connection
    Fbar = promote(conn, data.horizontal_form)
    horizontal = []
    for a in patch.base_indices:
        X = conn.hor(a)
        horizontal.append(
            (patch.coords[a].name, CourantSection(X, contract(X, Fbar))))
    vertical = []
    for u, eta in zip(patch.fiber_indices, ann_hor_basis(conn)):
        vf = -sharp(data.vertical_bivector, eta)
        vertical.append((patch.coords[u].name, CourantSection(vf, eta)))
    return DiracPresentation(patch, horizontal, vertical)


def verify_isotropy(L: DiracPresentation) -> CheckReport:
    """Check all pairwise symmetric pairings vanish and the span is maximal.

    Maximality is certified structurally rather than by a rank
    computation: the labels must claim every patch coordinate exactly
    once (horizontal generators claim the vector slot of their label,
    vertical ones the form slot), each generator must be the unit on its
    own slot, and the claimed square block must be triangular (horizontal
    generators carry no other claimed vector slots; vertical generators
    carry no claimed vector slots and no other claimed form slots).
    """
    gens = list(L.labeled())
    iso = []
    for i, (_, n1, s1) in enumerate(gens):
        for _, n2, s2 in gens[i:]:
            val = pairing_plus(s1, s2)
            if val:
                iso.append(Witness((n1, n2), val))

    maxi = []
    patch = L.patch
    one = patch.one()
    names = [c.name for c in patch.coords]
    h_claim = [n for k, n, _ in gens if k == "H"]
    v_claim = [n for k, n, _ in gens if k == "V"]
    claimed = h_claim + v_claim
    for name in names:
        if claimed.count(name) == 0:
            maxi.append(Witness(("unclaimed", name), one))
    for name in claimed:
        if claimed.count(name) > 1 or name not in names:
            maxi.append(Witness(("bad_claim", name), one))
    if not maxi:
        for kind, name, section in gens:
            if kind == "H":
                for slot in h_claim:
                    want = one if slot == name else patch.zero()
                    got = section.vf.coefficient(slot)
                    if got != want:
                        maxi.append(Witness((name, slot), got - want))
            else:
                for slot in v_claim:
                    want = one if slot == name else patch.zero()
                    got = section.form.coefficient(slot)
                    if got != want:
                        maxi.append(Witness((name, slot), got - want))
                for slot in h_claim:
                    got = section.vf.coefficient(slot)
                    if got:
                        maxi.append(Witness((name, slot), got))

    return CheckReport([ConditionReport("isotropy", iso),
                        ConditionReport("maximality", maxi)])


def verify_closure(L: DiracPresentation) -> CheckReport:
    """Pair every Courant bracket of generators against every generator.

    The span is bracket-closed iff all such pairings vanish (the span is
    maximal isotropic, so membership equals orthogonality).  Each nonzero
    pairing is filed under the integrability condition its generator-kind
    pattern instantiates, which localizes a single broken condition.
    """
    gens = list(L.labeled())
    buckets = {name: [] for name in CONDITION_ORDER}
    for k1, n1, s1 in gens:
        for k2, n2, s2 in gens:
            br = courant_bracket(s1, s2)
            for k3, n3, s3 in gens:
                val = pairing_plus(br, s3)
                if val:
                    cls = _RELATION_CLASS[(k1, k2, k3)]
                    buckets[cls].append(Witness((n1, n2, n3), val))
    return CheckReport([ConditionReport(name, buckets[name])
                        for name in CONDITION_ORDER])


def _tidy(value):
    """Collapse a fraction to a plain expression when the division is exact."""
    if isinstance(value, RatExpr):
        value = value.reduce()
        if value.den == 1:
            return value.num
    return value


def _scalarize(value, what: str) -> ScalarExpr:
    if isinstance(value, ScalarExpr):
        return value
    try:
        return value.as_scalar()
    except DegenerateInputError as exc:
        raise DegenerateInputError(f"recovered {what} is not polynomial: "
                                   f"{exc}") from exc


def extract_poisson(data: GeometricData) -> Multivector:
    """The bivector whose graph is the span of ``build_dirac(data)``.

    Pi = V + sum_{a<b} W^{ab} hor(d_a) ^ hor(d_b) with [W] the negated
    inverse of the 2-form matrix [F_ab]; coefficients that stay rational
    functions remain so (they are exact wherever the determinant does not
    vanish).  Graph compatibility: sharp(Pi, form) + vf = 0 for every
    generator.
    """
    patch = data.patch
    base = patch.base_indices
    rows = [[data.horizontal_form.coefficient(i, j) for j in base]
            for i in base]
    try:
        inv, _det = rat_inverse(rows, patch)
    except DegenerateInputError as exc:
        n = len(base)
        raise DegenerateInputError(
            f"degenerate horizontal 2-form: the {n}x{n} determinant "
            f"det[F_ab] vanishes identically") from exc
    hor = [data.connection.hor(a) for a in base]
    Pi = data.vertical_bivector
    for pa in range(len(base)):
        for pb in range(pa + 1, len(base)):
            w = _tidy(-inv[pa][pb])
            if w:
                Pi = Pi + hor[pa].wedge(hor[pb]) * w
    return Pi


class DecompositionResult:
    """Recovered geometric data plus the pivot denominators used."""

    __slots__ = ("data", "pivot_denominators")

    def __init__(self, data: GeometricData, pivot_denominators: Sequence = ()):
        self.data = data
        self.pivot_denominators = tuple(pivot_denominators)

    def __repr__(self):
        pivots = ", ".join(str(p) for p in self.pivot_denominators)
        return f"DecompositionResult({self.data!r}, pivots=[{pivots}])"


def decompose_coupling(Pi: Multivector, patch: FiberedPatch) -> DecompositionResult:
    """Split a bivector into geometric data through its base-base block.

    Writing M for the base-base component matrix: the recovered 2-form is
    -[M]^{-1}, the connection solves hor(d_a) = the bivector image of the
    2-form-dual coframe (componentwise G^u_a = -sum_b (M^{-1})_{ab}
    Pi^{bu}), and the vertical bivector is what remains after removing
    the horizontal part.  Inverse of :func:`extract_poisson` on
    nondegenerate data.
    """
    if not isinstance(patch, FiberedPatch):
        raise PatchError("decomposition needs a fibered patch")
    if Pi.patch != patch:
        raise PatchMismatchError("bivector lives on a different patch")
    if Pi.degree != 2:
        raise DegreeError("decomposition needs a bivector")
    base = patch.base_indices
    fiber = set(patch.fiber_indices)
    n = len(base)

    def comp(i, j):
        return to_ratexpr(Pi.coefficient(i, j), patch)

    M = [[comp(a, b) for b in base] for a in base]
    try:
        Minv, det = rat_inverse(M, patch)
    except DegenerateInputError as exc:
        raise DegenerateInputError(
            "bivector is not transverse to the fibers: the base-base "
            "block is degenerate") from exc

    table = {}
    for u in sorted(fiber):
        for pa, a in enumerate(base):
            g = -sum((Minv[pa][pb] * comp(b, u)
                      for pb, b in enumerate(base)),
                     start=to_ratexpr(0, patch))
            if g:
                table[(u, a)] = _scalarize(g, "connection coefficient")
    conn = Connection(patch, table)

    ftable = {}
    for pa in range(n):
        for pb in range(pa + 1, n):
            f = -Minv[pa][pb]
            if f:
                ftable[(base[pa], base[pb])] = _scalarize(f, "2-form entry")
    F = BaseForm(patch, 2, ftable)

    hor = [conn.hor(a) for a in base]
    rest = Pi
    for pa in range(n):
        for pb in range(pa + 1, n):
            w = _tidy(M[pa][pb])
            if w:
                rest = rest - hor[pa].wedge(hor[pb]) * w
    vtable = {}
    for key, c in rest.items():
        if not set(key) <= fiber:
            bad = ",".join(patch.coords[i].name for i in key)
            raise ArithmeticError(
                f"internal error: non-vertical remainder on ({bad}): {c}")
        vtable[key] = _scalarize(c, "vertical bivector entry")
    V = Multivector(patch, 2, vtable)

    pivots = []
    seen = set()
    red = det.reduce()
    for candidate in (red.num, red.den):
        if candidate.as_rational() is None and str(candidate) not in seen:
            seen.add(str(candidate))
            pivots.append(candidate)
    return DecompositionResult(GeometricData(patch, V, conn, F), pivots)


def equivalent_data(data: GeometricData, potential: BaseForm) -> GeometricData:
    """Shift the 2-form by the twisted differential of a Casimir-valued
    potential 1-form; integrability (and the span's closure verdict) is
    unchanged.
    """
    patch = data.patch
    if not isinstance(potential, BaseForm) or potential.degree != 1:
        raise DegreeError("the potential must be a base 1-form")
    if potential.patch != patch:
        raise PatchMismatchError("potential lives on a different patch")
    V = data.vertical_bivector
    for (a,), c in sorted(potential.items()):
        ham = sharp(V, d_scalar(patch, c))
        if ham:
            name = patch.coords[a].name
            raise NonCasimirError(
                f"potential coefficient on dx:{name} is not a Casimir; "
                f"its Hamiltonian field is {ham}", witness=ham)
    new_form = data.horizontal_form + d_gamma(data.connection, potential)
    return GeometricData(patch, V, data.connection, new_form)


def check_casimir_complex(data: GeometricData, casimirs) -> CheckReport:
    """Verify the twisted differential squares to zero on Casimir-valued
    forms (degree 0 and the coordinate 1-forms), given integrable data.
    """
    patch = data.patch
    conn = data.connection
    V = data.vertical_bivector
    deg0, deg1 = [], []
    for pos, C in enumerate(casimirs):
        if isinstance(C, str):
            C = patch.parse(C)
        ham = sharp(V, d_scalar(patch, C))
        if ham:
            raise NonCasimirError(
                f"listed function {C} is not a Casimir; its Hamiltonian "
                f"field is {ham}", witness=ham)
        label = f"C{pos + 1}"
        square = d_gamma(conn, d_gamma(conn, BaseForm.from_scalar(patch, C)))
        deg0 += _tensor_witnesses(square, prefix=(label,))
        for a in patch.base_indices:
            alpha = BaseForm(patch, 1, {(a,): C})
            square = d_gamma(conn, d_gamma(conn, alpha))
            deg1 += _tensor_witnesses(
                square, prefix=(label, patch.coords[a].name))
    return CheckReport([ConditionReport("casimir_complex_deg0", deg0),
                        ConditionReport("casimir_complex_deg1", deg1)])


def characteristic_kernel(data: GeometricData) -> list:
    """Horizontal lifts spanning the null directions of the 2-form.

    Solves the kernel of the component matrix [F_ab] over the fraction
    field and lifts each (denominator-cleared) solution; the empty list
    means the 2-form is nondegenerate.
    """
    patch = data.patch
    base = patch.base_indices
    rows = [[data.horizontal_form.coefficient(i, j) for j in base]
            for i in base]
    vectors, _pivots = null_space(rows, patch)
    out = []
    for vec in vectors:
        comps = {(base[pos],): c for pos, c in enumerate(vec) if c}
        out.append(horizontal_lift(conn=data.connection,
                                   X=Multivector(patch, 1, comps)))
    return out


def restrict_to_fiber(data: GeometricData, x0: Mapping) -> Multivector:
    """Evaluate the vertical bivector at a base point, on the fiber patch."""
    patch = data.patch
    fiber = patch.fiber_patch()
    table = {}
    for (u, v), c in data.vertical_bivector.items():
        key = (fiber.index(patch.coords[u].name),
               fiber.index(patch.coords[v].name))
        table[key] = c.substitute(dict(x0), target=fiber)
    return Multivector(fiber, 2, table)
