"""The prime-exclusion engine.

Evaluates the explicit hypothesis-certification criteria for a supplied
field, weight, level norm and unit list, and aggregates a deterministic
report: which primes are excluded by which criterion, which bound makes
all larger primes safe, and which hypotheses remain assumption-only.

Subset statuses are data, never exceptions: a single indeterminate or
degenerate subset must not abort the rest of the report.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .nfield import (
    DEFAULT_PRECISION_CAP,
    DyadicInterval,
    Field,
    FieldElem,
    Indeterminate,
    Zero,
    embed,
    embed_sign,
    is_totally_positive,
    norm,
    symmetrized_difference_norm,
    symmetrized_norm,
)
from .primes import FactorizationIncomplete, factor
from .weights import (
    BoundsReport,
    Weight,
    mask_indices,
    mw_check,
    non_induced_check,
    p_of,
    prime_bounds,
    subset_label,
)


class FormDisagreement(Exception):
    """The two printed expression forms differ by more than a sign: a bug."""


class MixedSignature(Exception):
    pass


@dataclass(frozen=True)
class SubsetStatus:
    kind: str  # "excludes" | "degenerate" | "indeterminate"
    primes: tuple[int, ...] = ()
    value: int | None = None
    unit_index: int | None = None
    note: str = ""
    incomplete: bool = False  # an unfactored cofactor may hide primes

    def to_json_dict(self):
        out = {"kind": self.kind}
        if self.kind == "excludes":
            out["primes"] = list(self.primes)
            out["value"] = self.value
            out["unit_index"] = self.unit_index
        if self.incomplete:
            out["incomplete"] = True
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class CriterionReport:
    criterion_id: str
    per_subset: tuple[tuple[int, SubsetStatus], ...]
    aggregate: tuple[int, ...]
    notes: tuple[str, ...] = ()

    @property
    def has_indeterminate(self) -> bool:
        return any(s.kind == "indeterminate" for _, s in self.per_subset)

    @property
    def has_degenerate(self) -> bool:
        return any(s.kind == "degenerate" for _, s in self.per_subset)

    @property
    def fully_certified(self) -> bool:
        return all(s.kind == "excludes" and not s.incomplete
                   for _, s in self.per_subset)

    def to_json_dict(self):
        return {
            "criterion": self.criterion_id,
            "per_subset": {
                subset_label(mask): st.to_json_dict() for mask, st in self.per_subset
            },
            "excluded_primes": list(self.aggregate),
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class QuadExtDescription:
    """K = F(sqrt(delta)) with a unit list given as (a, b) pairs: a + b sqrt(delta)."""

    delta: FieldElem
    units: tuple[tuple[FieldElem, FieldElem], ...]
    label: str = "K"

    def signature(self) -> str:
        signs = {embed_sign(self.delta, i) for i in range(self.delta.field.degree)}
        if signs == {1}:
            return "totally_positive"
        if signs == {-1}:
            return "totally_negative"
        raise MixedSignature("delta must be totally positive or totally negative")

    @property
    def is_cm(self) -> bool:
        return self.signature() == "totally_negative"

    def validate_units(self):
        fld = self.delta.field
        for a, b in self.units:
            rel_norm = a * a - self.delta * b * b
            if abs(norm(rel_norm)) != 1:
                raise ValueError(
                    f"{self.label}: {a} + {b} sqrt(delta) is not a unit"
                )


@dataclass(frozen=True)
class CertificationInputs:
    field: Field
    weight: Weight
    delta: int  # norm of level times different, caller-supplied
    units: tuple[FieldElem, ...]
    quadratic_extensions: tuple[QuadExtDescription, ...] = ()
    fiber_partitions: tuple[tuple[tuple[int, ...], ...], ...] = ()
    h_f: int | None = None
    precision_cap: int = DEFAULT_PRECISION_CAP

    def __post_init__(self):
        if self.field.degree != self.weight.d:
            raise ValueError("field degree and weight length differ")
        if self.delta < 1:
            raise ValueError("delta must be a positive integer")
        for u in self.units:
            if abs(norm(u)) != 1:
                raise ValueError(f"unit {u} does not have norm +-1")
            if not is_totally_positive(u):
                raise ValueError(f"unit {u} is not totally positive")
        for kd in self.quadratic_extensions:
            kd.signature()  # raises on mixed signature
            kd.validate_units()


UNIT_CONGRUENCE_NOTE = (
    "unit congruence epsilon = 1 mod n is asserted by the caller, not verified"
)


def _factor_primes(value: int):
    """(sorted primes, note, incomplete) with a marker on factor failure.

    An unfactored cofactor means divisors may be missing from the excluded
    set, so the status is flagged incomplete and degrades the report.
    """
    try:
        return tuple(sorted(factor(value))), "", False
    except FactorizationIncomplete as exc:
        primes = tuple(sorted(exc.partial))
        note = f"unfactored composite cofactor {exc.cofactor} (excluded-unknown)"
        return primes, note, True


def irr_excluded_primes(inputs: CertificationInputs) -> CriterionReport:
    """Per-subset unit-norm criterion for residual irreducibility.

    For each subset J, the first unit whose symmetrized norm is nonzero
    contributes the primes dividing it.  Both the single-product exponent
    form and the two-product difference form are computed and asserted
    equal up to sign.  Parallel weights only see the proper subsets and
    the result is labeled partial.
    """
    w = inputs.weight
    fld = inputs.field
    notes = [UNIT_CONGRUENCE_NOTE]
    masks = list(range(1 << w.d))
    if w.is_parallel:
        masks = [m for m in masks if m not in (0, (1 << w.d) - 1)]
        notes.append("partial (parallel weight): only proper nonempty subsets evaluated")
    per = []
    agg: set[int] = set()
    for mask in masks:
        pj, _ = p_of(w, mask)
        e_on = tuple(w.k0 - w.m[t] - 1 for t in range(w.d))
        e_off = tuple(-w.m[t] for t in range(w.d))
        status = SubsetStatus(kind="degenerate",
                              note="every supplied unit gives an exact zero"
                              if inputs.units else "no units supplied")
        for i, eps in enumerate(inputs.units):
            try:
                v1 = symmetrized_norm(eps, pj, fld, inputs.precision_cap)
            except Indeterminate as exc:
                status = SubsetStatus(kind="indeterminate",
                                      note=f"escalation cap {exc.max_bits} bits")
                continue
            if isinstance(v1, Zero):
                continue
            try:
                v2 = symmetrized_difference_norm(
                    eps, e_on, e_off, mask_indices(mask), fld, inputs.precision_cap
                )
            except Indeterminate as exc:
                status = SubsetStatus(kind="indeterminate",
                                      note=f"difference form hit cap {exc.max_bits}")
                continue
            if isinstance(v2, Zero) or abs(v1.value) != abs(v2.value):
                raise FormDisagreement(
                    f"J={subset_label(mask)}: forms give {v1} vs {v2}"
                )
            primes, note, incomplete = _factor_primes(v1.value)
            status = SubsetStatus(kind="excludes", primes=primes,
                                  value=v1.value, unit_index=i, note=note,
                                  incomplete=incomplete)
            break
        per.append((mask, status))
        if status.kind == "excludes":
            agg.update(status.primes)
    return CriterionReport(
        criterion_id="irr",
        per_subset=tuple(per),
        aggregate=tuple(sorted(agg)),
        notes=tuple(notes),
    )


def irr_fast_path_quadratic(inputs: CertificationInputs):
    """Closed form for d = 2: primes dividing Nm((e^m1 - 1)(e^(k0-m1-1) - 1)).

    Returns {unit_index: primes} unioned, for cross-checking the generic
    engine; requires a non-parallel weight.
    """
    w = inputs.weight
    if w.d != 2 or w.is_parallel:
        raise ValueError("fast path requires d = 2 and non-parallel weight")
    m1 = max(w.m)
    agg: set[int] = set()
    one = inputs.field.one
    for eps in inputs.units:
        val = norm((eps**m1 - one) * (eps ** (w.k0 - m1 - 1) - one))
        assert val.denominator == 1
        if val != 0:
            agg.update(factor(int(val)))
    return tuple(sorted(agg))


def irr_fast_path_cubic(inputs: CertificationInputs,
                        precision_cap: int | None = None):
    """Four-factor closed form for a cyclic cubic field, certified by intervals."""
    w = inputs.weight
    fld = inputs.field
    if w.d != 3 or fld.galois is None or len(fld.galois) != 3:
        raise ValueError("fast path requires a cyclic cubic field")
    cap = precision_cap or inputs.precision_cap
    msorted = sorted(w.m)
    if msorted[0] != 0 or msorted[2] == 0:
        raise ValueError("weight must be non-parallel with m = (0, m1, m2)")
    m1, m2 = msorted[1], msorted[2]
    k0 = w.k0
    cyc = next(g for g in fld.galois if g != (0, 1, 2))
    exponent_pairs = ((m1, -m2), (m1, m2 + 1 - k0),
                      (m1 + 1 - k0, m2), (k0 - m1 - 1, m2 + 1 - k0))
    agg: set[int] = set()
    for eps in inputs.units:
        bits = 64
        value = None
        while bits <= cap:
            try:
                embs = [embed(eps, j, bits) for j in range(3)]
                total = DyadicInterval(Fraction(1), Fraction(1))
                for j in range(3):
                    tau_j = cyc[j]
                    for ea, eb in exponent_pairs:
                        f = embs[tau_j].power(ea, bits) - embs[j].power(eb, bits)
                        total = (total * f).round(bits)
            except ZeroDivisionError:
                bits *= 2
                continue
            if total.width < Fraction(1, 2) and not total.straddles_zero():
                lo = math.ceil(total.lo)
                if lo <= total.hi:
                    value = lo
                    break
            bits *= 2
        if value is None:
            raise Indeterminate(cap)
        agg.update(factor(value))
    return tuple(sorted(agg))


# ---------------------------------------------------------------------------
# dihedral (non-CM) criterion


def _k_norm_exact_base_q(kd: QuadExtDescription, unit_pair, w: Weight):
    """Exact norm for d = 1: the criterion element lives inside K itself."""
    fld = kd.delta.field
    delta = kd.delta
    a, b = unit_pair

    def kmul(x, y):
        return (x[0] * y[0] + x[1] * y[1] * delta, x[0] * y[1] + x[1] * y[0])

    def kpow(x, e):
        out = (fld.one, fld.zero)
        for _ in range(e):
            out = kmul(out, x)
        return out

    eps = (a, b)
    ceps = (a, -b)
    m0 = w.m[0]
    x = kmul(kpow(eps, m0), kpow(ceps, w.k0 - m0 - 1))
    x = (x[0] - fld.one, x[1])
    nk_f = x[0] * x[0] - delta * x[1] * x[1]  # norm from K to F
    return norm(nk_f)


def dihedral_noncm_excluded(inputs: CertificationInputs, k_index: int) -> CriterionReport:
    """Unit-norm criterion along a totally real quadratic extension.

    For F = Q the value per embedding assignment is computed exactly in K.
    For higher degree the certified integer is the full product over all
    sign assignments and base permutations (a sound integer multiple of the
    norm), shared by every assignment.
    """
    kd = inputs.quadratic_extensions[k_index]
    w = inputs.weight
    fld = inputs.field
    d = fld.degree
    if kd.is_cm:
        status = SubsetStatus(
            kind="indeterminate",
            note="Unverifiable: requires theta-series congruence data (CM extension)",
        )
        return CriterionReport(
            criterion_id=f"dihedral[{kd.label}]",
            per_subset=((0, status),),
            aggregate=(),
            notes=("CM-type extension reported, never evaluated",),
        )
    notes = [UNIT_CONGRUENCE_NOTE]
    per = []
    agg: set[int] = set()
    if d == 1:
        for amask in range(2):
            status = SubsetStatus(kind="degenerate",
                                  note="every supplied unit gives an exact zero"
                                  if kd.units else "no units supplied")
            for i, pair in enumerate(kd.units):
                val = _k_norm_exact_base_q(kd, pair, w)
                assert val.denominator == 1
                val = int(val)
                if val == 0:
                    continue
                primes, note, incomplete = _factor_primes(val)
                status = SubsetStatus(kind="excludes", primes=primes, value=val,
                                      unit_index=i, note=note,
                                      incomplete=incomplete)
                break
            per.append((amask, status))
            if status.kind == "excludes":
                agg.update(status.primes)
    else:
        value = None
        status_note = ""
        unit_idx = None
        for i, pair in enumerate(kd.units):
            outcome = _wreath_product_value(kd, pair, w, inputs.precision_cap)
            if outcome == "zero":
                continue
            if outcome == "indeterminate":
                status_note = "interval certification hit the precision cap"
                continue
            value = outcome
            unit_idx = i
            break
        notes.append(
            "certified value is the full sign-assignment product "
            "(integer multiple of each assignment norm)"
        )
        for amask in range(1 << d):
            if value is not None:
                primes, note, incomplete = _factor_primes(value)
                status = SubsetStatus(kind="excludes", primes=primes, value=value,
                                      unit_index=unit_idx, note=note,
                                      incomplete=incomplete)
            elif status_note:
                status = SubsetStatus(kind="indeterminate", note=status_note)
            else:
                status = SubsetStatus(kind="degenerate",
                                      note="every supplied unit gives an exact zero"
                                      if kd.units else "no units supplied")
            per.append((amask, status))
            if status.kind == "excludes":
                agg.update(status.primes)
    return CriterionReport(
        criterion_id=f"dihedral[{kd.label}]",
        per_subset=tuple(per),
        aggregate=tuple(sorted(agg)),
        notes=tuple(notes),
    )


def _wreath_product_value(kd: QuadExtDescription, pair, w: Weight, cap: int):
    """Certified product over all assignments and group elements, or a tag."""
    fld = kd.delta.field
    d = fld.degree
    a, b = pair
    if b.is_zero():
        # element of F: every embedding pair collapses; exact value
        n = norm(a)
        base = n ** (w.k0 - 1) - 1
        if base == 0:
            return "zero"
        group = fld.galois or tuple(itertools.permutations(range(d)))
        total = base ** ((1 << d) * len(group))
        assert total.denominator == 1
        return int(total)
    group = fld.galois or tuple(itertools.permutations(range(d)))
    bits = 64
    while bits <= cap:
        emb_a = [embed(a, j, bits) for j in range(d)]
        emb_b = [embed(b, j, bits) for j in range(d)]
        emb_sd = [embed(kd.delta, j, bits).sqrt(bits) for j in range(d)]
        emb = {}
        for j in range(d):
            root = (emb_b[j] * emb_sd[j]).round(bits)
            emb[(j, 1)] = emb_a[j] + root
            emb[(j, -1)] = emb_a[j] - root
        one = DyadicInterval(Fraction(1), Fraction(1))
        total = one
        ok = True
        for signs in itertools.product((1, -1), repeat=d):
            for g in group:
                f = one
                for t in range(d):
                    j = g[t]
                    try:
                        up = emb[(j, signs[t])].power(w.m[t], bits)
                        dn = emb[(j, -signs[t])].power(w.k0 - w.m[t] - 1, bits)
                    except ZeroDivisionError:
                        ok = False
                        break
                    f = (f * up * dn).round(bits)
                if not ok:
                    break
                total = (total * (f - one)).round(bits)
            if not ok:
                break
        if ok and total.width < Fraction(1, 2) and not total.straddles_zero():
            lo = math.ceil(total.lo)
            if lo <= total.hi:
                return lo
        bits *= 2
    return "indeterminate"


# ---------------------------------------------------------------------------
# full certification


@dataclass(frozen=True)
class CertificationReport:
    field_poly: tuple[int, ...]
    weight: Weight
    delta: int
    delta_primes: tuple[int, ...]
    bounds: BoundsReport
    mw_ok: bool
    mw_witness: int | None
    irr: CriterionReport
    dihedral: tuple[CriterionReport, ...]
    non_induced: tuple[tuple[str, bool], ...]
    excluded_set: tuple[int, ...]
    bound: int
    statement: str
    assumption_only: tuple[str, ...]
    notes: tuple[str, ...]

    @property
    def worst_status(self) -> str:
        reports = (self.irr, *self.dihedral)
        if any(r.has_indeterminate or r.has_degenerate for r in reports):
            return "partial"
        if any(s.incomplete for r in reports for _, s in r.per_subset):
            return "partial"
        return "certified"

    def to_json_dict(self):
        return {
            "field": {"min_poly": list(self.field_poly)},
            "weight": {
                "k": list(self.weight.k),
                "k0": self.weight.k0,
                "n": list(self.weight.n),
                "m": list(self.weight.m),
            },
            "level": {"delta": self.delta, "primes": list(self.delta_primes)},
            "bounds": {
                "sum_k_minus_1": self.bounds.sum_k_minus_1,
                "min_prime_II": self.bounds.min_prime_ii,
                "min_prime_exceptional": self.bounds.min_prime_exceptional,
                "min_prime_combined": self.bounds.min_prime_combined,
                "min_prime_quadratic_alt": self.bounds.min_prime_quadratic_alt,
                "special_2k_minus_1": sorted(self.bounds.special_double),
                "special_cross": sorted(self.bounds.special_cross),
                "small_excluded": sorted(self.bounds.small_excluded),
            },
            "middle_weight": {
                "ok": self.mw_ok,
                "witness": subset_label(self.mw_witness)
                if self.mw_witness is not None
                else None,
            },
            "irr": self.irr.to_json_dict(),
            "dihedral": [r.to_json_dict() for r in self.dihedral],
            "non_induced": [
                {"partition": label, "non_induced": ok}
                for label, ok in self.non_induced
            ],
            "excluded_set": list(self.excluded_set),
            "bound": self.bound,
            "statement": self.statement,
            "assumption_only": list(self.assumption_only),
            "notes": list(self.notes),
            "status": self.worst_status,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)


def certify(inputs: CertificationInputs) -> CertificationReport:
    """Aggregate every machine-checkable hypothesis into one report.

    Sub-criterion failures become per-subset statuses; the report is always
    produced.  The excluded set collects level divisors, the small primes,
    both special weight sets, and every prime any unit-norm criterion
    excludes; the bound is the largest of the smallest admissible primes.
    """
    w = inputs.weight
    bounds = prime_bounds(w)
    delta_primes = tuple(sorted(factor(inputs.delta)))
    mw = mw_check(w)
    irr = irr_excluded_primes(inputs)
    dihedral = tuple(
        dihedral_noncm_excluded(inputs, i)
        for i in range(len(inputs.quadratic_extensions))
    )
    ni = tuple(
        (
            ";".join(",".join(str(i) for i in sorted(block)) for block in part),
            non_induced_check(w, part),
        )
        for part in inputs.fiber_partitions
    )
    excluded: set[int] = set(delta_primes)
    excluded |= bounds.small_excluded
    excluded |= bounds.special_double
    excluded |= bounds.special_cross
    excluded |= set(irr.aggregate)
    for r in dihedral:
        excluded |= set(r.aggregate)
    bound = max(
        bounds.min_prime_ii,
        bounds.min_prime_exceptional,
        bounds.min_prime_combined,
    )
    notes = [UNIT_CONGRUENCE_NOTE]
    if not mw.ok:
        notes.append(
            "hypothesis (MW) fails: middle weight attained at J="
            + subset_label(mw.witness)
        )
    assumption_only = [
        "large-image hypothesis (group-theoretic content) is assumed, not certified",
    ]
    if any(kd.is_cm for kd in inputs.quadratic_extensions):
        assumption_only.append(
            "CM-type dihedral condition requires theta-series congruence data"
        )
    statement = (
        f"every prime p >= {bound} outside {{{', '.join(map(str, sorted(excluded)))}}} "
        "passes all machine-checkable hypotheses"
    )
    return CertificationReport(
        field_poly=inputs.field.min_poly,
        weight=w,
        delta=inputs.delta,
        delta_primes=delta_primes,
        bounds=bounds,
        mw_ok=mw.ok,
        mw_witness=mw.witness,
        irr=irr,
        dihedral=dihedral,
        non_induced=ni,
        excluded_set=tuple(sorted(excluded)),
        bound=bound,
        statement=statement,
        assumption_only=tuple(assumption_only),
        notes=tuple(notes),
    )
