"""Block-LMI compilation of the weighted matrix geometric mean.

For rational t = p/q the hypograph { (A,B,T) : A #_t B >= T } (t in
[0,1]) and epigraph { A #_t B <= T } (t in [-1,0] u [1,2]) are compiled
into small systems of 2n x 2n and n x n LMIs.  The recursion:

- base case t = 1/2: the Schur-complement LMI [[A, T], [T, B]] >= 0;
- dyadic t = p/2^l (p odd): a chain of l LMIs indexed by the binary
  expansion of p;
- t = 2^l/q in [1/2, 1]: reduce to the dyadic exponent (2^{l+1}-q)/2^l
  on the pair (A, W), plus [[Z, W], [W, B]] and W >= T;
- general t in (0, 1/2): split t = (p/2^l) * (2^l/q) with
  l = floor(log2 q) and chain the two constructions;
- general t in (1/2, 1): swap the pair and use 1 - t;
- epigraphs: t in [-1, 0] uses the hypograph at -t plus one extra
  Schur-complement LMI; t in [1, 2] swaps the pair onto 1 - t.

Every auxiliary variable carries a witness recipe (its value along the
geodesic between the construction's slot values), so proof-derived
witnesses come out of the same recursion that emits the LMIs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import WrongExponent
from .kernel import (
    RationalExponent,
    binary_expansion,
    floor_log2,
    geometric_mean,
    hermitize,
    is_power_of_two,
)
from .model import (
    AffineBlock,
    LinearFunctional,
    ModelBuilder,
    SdpModel,
    VarId,
    WitnessAssignment,
)


def _as_fraction(t) -> Fraction:
    if isinstance(t, RationalExponent):
        return t.fraction
    return Fraction(t)


# ---------------------------------------------------------------------------
# construction result


@dataclass
class Construction:
    """A compiled model together with its witness recipes."""

    model: SdpModel
    target: VarId | None
    recipes: list
    mode: str  # "hyp" | "epi"
    t: Fraction
    dim: int
    aux: dict = field(default_factory=dict)  # named extra vars (tau, X, ...)
    report_divisor: float = 1.0  # objective is divided by this on report

    def make_witness(self, base: dict | None = None) -> WitnessAssignment:
        """Resolve the recorded recipes into an explicit assignment.

        ``base`` supplies values for free variables (when present) and
        may pre-assign any variable, short-circuiting its recipe.
        """
        asgn = WitnessAssignment(base or {})
        for var, kind, payload in self.recipes:
            if var in asgn:
                continue
            if kind == "geomean":
                t, Ab, Bb = payload
                A = hermitize(Ab.evaluate(asgn))
                B = hermitize(Bb.evaluate(asgn))
                asgn[var] = geometric_mean(A, B, float(t))
            elif kind == "scalar_tight":
                functional = payload
                coeff = 0.0
                rest = functional.constant
                for v, M in functional.terms:
                    if v == var:
                        coeff += M[0, 0].real
                    else:
                        rest += np.trace(M @ asgn.matrix(v)).real
                asgn[var] = np.array([[-rest / coeff]])
            else:  # pragma: no cover
                raise ValueError(f"unknown recipe kind {kind}")
        return asgn


# ---------------------------------------------------------------------------
# recursive emitters; slots are AffineBlocks (constants or variables)


def _fresh_target(b: ModelBuilder, letter: str, dim: int, t: Fraction, A, B):
    var = b.fresh_var(letter, dim)
    b.add_recipe(var, "geomean", (t, A, B))
    return var, AffineBlock.of_var(var)


def _emit_hyp(b: ModelBuilder, A: AffineBlock, B: AffineBlock, T, t: Fraction):
    """Emit LMIs forcing (A, B, T) into hyp_t; returns the target block.

    ``T`` may be None (a fresh variable is created, with its witness
    recipe) or an existing block.
    """
    n = A.dim
    if not 0 <= t <= 1:
        raise WrongExponent(f"hypograph requires t in [0,1], got {t}")
    if t == 0 or t == 1:
        if T is None:
            _, T = _fresh_target(b, "T", n, t, A, B)
        corner = A if t == 0 else B
        b.add_lmi([[corner - T]], label=f"hyp endpoint t={t}")
        return T
    p, q = t.numerator, t.denominator
    if is_power_of_two(q):
        return _emit_dyadic(b, A, B, T, t)
    if t >= Fraction(1, 2) and is_power_of_two(p):
        return _emit_pow2_numerator(b, A, B, T, t)
    if t < Fraction(1, 2):
        ell = floor_log2(q)
        s_in = Fraction(2**ell, q)
        s_out = Fraction(p, 2**ell)
        Z = _emit_hyp(b, A, B, None, s_in)
        return _emit_hyp(b, A, Z, T, s_out)
    return _emit_hyp(b, B, A, T, 1 - t)


def _emit_dyadic(b: ModelBuilder, A: AffineBlock, B: AffineBlock, T, t: Fraction):
    n = A.dim
    p, q = t.numerator, t.denominator
    ell = floor_log2(q)
    bits = binary_expansion(p, ell)
    chain = []
    for i in range(1, ell):
        ti = Fraction(p % (1 << i), 1 << i)
        _, blk = _fresh_target(b, "Z", n, ti, A, B)
        chain.append(blk)
    if T is None:
        _, T = _fresh_target(b, "Z" if ell > 1 else "T", n, t, A, B)
    chain.append(T)
    b.add_lmi2(A, chain[0], B, label=f"dyadic base {t}")
    for i in range(2, ell + 1):
        corner = B if bits[i - 1] else A
        b.add_lmi2(corner, chain[i - 1], chain[i - 2], label=f"dyadic step {i} of {t}")
    return T


def _emit_pow2_numerator(b: ModelBuilder, A, B, T, t: Fraction):
    n = A.dim
    p, q = t.numerator, t.denominator
    ell = floor_log2(p)
    s = Fraction(2 ** (ell + 1) - q, 2**ell)
    Wvar = b.fresh_var("W", n)
    b.add_recipe(Wvar, "geomean", (t, A, B))
    W = AffineBlock.of_var(Wvar)
    Z = _emit_dyadic(b, A, W, None, s)
    b.add_lmi2(Z, W, B, label=f"pow2 glue {t}")
    if T is None:
        _, T = _fresh_target(b, "T", n, t, A, B)
    b.add_lmi([[W - T]], label=f"pow2 cap {t}")
    return T


def _emit_epi(b: ModelBuilder, A: AffineBlock, B: AffineBlock, T, t: Fraction):
    n = A.dim
    if not (-1 <= t <= 0 or 1 <= t <= 2):
        raise WrongExponent(f"epigraph requires t in [-1,0] u [1,2], got {t}")
    if t == 0 or t == 1:
        if T is None:
            _, T = _fresh_target(b, "T", n, t, A, B)
        corner = A if t == 0 else B
        b.add_lmi([[T - corner]], label=f"epi endpoint t={t}")
        return T
    if t < 0:
        Svar = b.fresh_var("S", n)
        b.add_recipe(Svar, "geomean", (-t, A, B))
        S = AffineBlock.of_var(Svar)
        _emit_hyp(b, A, B, S, -t)
        if T is None:
            _, T = _fresh_target(b, "T", n, t, A, B)
        b.add_lmi([[T, A], [A.adjoint(), S]], label=f"epi flip {t}")
        return T
    return _emit_epi(b, B, A, T, 1 - t)


# ---------------------------------------------------------------------------
# task-level API


@dataclass
class GeoMeanTask:
    """What to compile: exponent, dimension, mode and slot roles.

    ``A``/``B`` are matrices (data) or None (free variables).  ``T`` is
    None for a free target (with a trace objective) or a fixed matrix.
    """

    t: RationalExponent
    n: int
    mode: str = "auto"  # "hyp" | "epi" | "auto"
    A: np.ndarray | None = None
    B: np.ndarray | None = None
    T: np.ndarray | None = None

    def resolved_mode(self) -> str:
        if self.mode != "auto":
            if self.mode == "hyp" and not self.t.concave_range:
                raise WrongExponent(f"t={self.t} is not in [0,1]")
            if self.mode == "epi" and not self.t.convex_range:
                raise WrongExponent(f"t={self.t} is not in [-1,0] u [1,2]")
            return self.mode
        if self.t.concave_range:
            return "hyp"
        return "epi"


def _task_slots(b: ModelBuilder, task: GeoMeanTask):
    def slot(role, name):
        if role is None:
            return AffineBlock.of_var(b.fresh_var(name, task.n))
        M = hermitize(role)
        b.add_data(name, M)
        return AffineBlock.constant(M)

    return slot(task.A, "A"), slot(task.B, "B")


def _finish(b: ModelBuilder, task: GeoMeanTask, Tvar, mode: str) -> Construction:
    if Tvar is not None:
        sense = "maximize" if mode == "hyp" else "minimize"
        b.set_objective(sense, LinearFunctional(0.0, [(Tvar, np.eye(task.n))]))
    return Construction(
        model=b.freeze(),
        target=Tvar,
        recipes=list(b.recipes),
        mode=mode,
        t=task.t.fraction,
        dim=task.n,
    )


def _build(task: GeoMeanTask, emitter) -> Construction:
    b = ModelBuilder()
    A, B = _task_slots(b, task)
    mode = task.resolved_mode()
    if task.T is None:
        T = emitter(b, A, B, None, task.t.fraction)
        Tvar = T.terms[0].var
    else:
        b.add_data("T", hermitize(task.T))
        emitter(b, A, B, AffineBlock.constant(hermitize(task.T)), task.t.fraction)
        Tvar = None
    return _finish(b, task, Tvar, mode)


def build_base_half(task: GeoMeanTask) -> Construction:
    """Single Schur-complement LMI for t = 1/2."""
    if task.t.fraction != Fraction(1, 2):
        raise WrongExponent(f"base case requires t = 1/2, got {task.t}")
    return _build(task, _emit_dyadic)


def build_dyadic(task: GeoMeanTask) -> Construction:
    """Binary-expansion chain for t = p/2^l, p odd, t in (0,1)."""
    t = task.t.fraction
    if not (0 < t < 1 and is_power_of_two(t.denominator)):
        raise WrongExponent(f"dyadic case requires t = p/2^l in (0,1), got {t}")
    return _build(task, _emit_dyadic)


def build_pow2_numerator(task: GeoMeanTask) -> Construction:
    """Reduction for t = 2^l/q in [1/2, 1]."""
    t = task.t.fraction
    if not (Fraction(1, 2) <= t < 1 and is_power_of_two(t.numerator)):
        raise WrongExponent(f"requires t = 2^l/q in [1/2,1), got {t}")
    return _build(task, _emit_pow2_numerator)


def build_hyp(task: GeoMeanTask) -> Construction:
    """Hypograph construction for any rational t in [0, 1]."""
    if not task.t.concave_range:
        raise WrongExponent(f"t={task.t} is not in [0,1]")
    return _build(task, _emit_hyp)


def build_epi(task: GeoMeanTask) -> Construction:
    """Epigraph construction for rational t in [-1,0] u [1,2]."""
    if not task.t.convex_range:
        raise WrongExponent(f"t={task.t} is not in [-1,0] u [1,2]")
    return _build(task, _emit_epi)


def build_geomean(task: GeoMeanTask) -> Construction:
    """Dispatch on the task's mode."""
    return build_hyp(task) if task.resolved_mode() == "hyp" else build_epi(task)


def witness(A, B, construction: Construction, base: dict | None = None) -> WitnessAssignment:
    """Proof-derived witness for a construction built from data (A, B).

    When the construction has free A/B slots their values must be in
    ``base`` keyed by the corresponding variables.
    """
    del A, B  # data is baked into the construction's recipe blocks
    return construction.make_witness(base)


# ---------------------------------------------------------------------------
# census auditing


@dataclass
class CensusReport:
    t: Fraction
    n: int
    mode: str
    census: list  # (size, count)
    bound_big: int  # allowed number of 2n x 2n LMIs
    bound_small: int  # allowed number of n x n LMIs
    ok: bool

    def __str__(self):
        parts = ", ".join(f"{c} x (size {s})" for s, c in self.census)
        flag = "ok" if self.ok else "EXCEEDS BOUND"
        return (
            f"t={self.t} ({self.mode}, n={self.n}): {parts}; "
            f"bound {self.bound_big} x 2n + {self.bound_small} x n [{flag}]"
        )


def lmi_census_audit(t: RationalExponent, n: int = 2, mode: str = "auto") -> CensusReport:
    """Compare the construction's LMI census with the size theorem."""
    task = GeoMeanTask(t=t, n=n, mode=mode, A=np.eye(n), B=np.eye(n))
    mode = task.resolved_mode()
    con = build_geomean(task)
    census = con.model.lmi_census()
    ell = floor_log2(t.q)
    bound_big = 2 * ell + 1 + (1 if mode == "epi" else 0)
    big = sum(c for s, c in census if s == 2 * n)
    small = sum(c for s, c in census if s == n)
    other = sum(c for s, c in census if s not in (n, 2 * n))
    ok = big <= bound_big and small <= 1 and other == 0
    return CensusReport(t.fraction, n, mode, census, bound_big, 1, ok)
