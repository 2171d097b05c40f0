"""Built-in scenarios: singlet, Hardy and GHSZ, plus the GHSZ classical models."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateParameters, VerificationError
from .probability import (
    PLUS_MINUS,
    TOL,
    ZERO_ONE,
    Distribution,
    MomentConstraints,
    VariableSet,
    all_moments,
    marginalize,
    max_abs_diff,
    moment,
    monomial_key,
    parse_monomial,
)
from .quantum import (
    PROJECTOR,
    SIGN,
    Context,
    PureState,
    YesNoObservable,
    embed,
    joint_distribution,
    observable_from_json,
    observable_to_json,
    pauli,
    spin_along,
    state_from_json,
    state_to_json,
    tensor,
)
from .representability import BCH_VARS, BchScenario, Interval, lp_interval

SQRT2 = math.sqrt(2.0)

# Hardy: L1 and R1 along z, L2 and R2 at this polar angle in the x-z plane.
# cos(angle) = 2 - sqrt(5) maximizes P(R1 = +1, L1 = -1) at (5 sqrt5 - 11) / 2.
HARDY_ANGLE = math.acos(2.0 - math.sqrt(5.0))
HARDY_DEFAULTS = {"left1": 0.0, "left2": HARDY_ANGLE, "right1": 0.0, "right2": HARDY_ANGLE}
HARDY_MAX_PROBABILITY = (5.0 * math.sqrt(5.0) - 11.0) / 2.0

GHSZ_VARS = ("A1", "A2", "B1", "B2", "C1", "C2")
GHSZ_PERFECT = {
    ("A1", "B1", "C1"): -1.0,
    ("A2", "B2", "C1"): -1.0,
    ("A2", "B1", "C2"): -1.0,
    ("A1", "B2", "C2"): 1.0,
}


@dataclass
class Scenario:
    """A set of variables, the contexts in which they are jointly measured
    and where the context statistics come from.

    Exactly one of ``state``/``observables`` (quantum source) or ``moments``
    (explicit moment source) is populated.
    """

    name: str
    variables: VariableSet
    contexts: list[tuple[str, ...]]
    state: PureState | None = None
    observables: dict[str, YesNoObservable] = field(default_factory=dict)
    moments: MomentConstraints | None = None

    def __post_init__(self):
        self.contexts = [tuple(c) for c in self.contexts]
        for c in self.contexts:
            for v in c:
                self.variables.index(v)
        if self.is_quantum:
            for c in self.contexts:
                self.context(c)
        elif self.moments is None:
            raise ValueError("scenario needs a quantum source or explicit moments")

    @property
    def is_quantum(self) -> bool:
        return self.state is not None

    @property
    def domain(self) -> str:
        return self.variables.domain

    def context(self, names: Sequence[str]) -> Context:
        return Context(tuple(self.observables[v] for v in names))

    def context_distribution(self, names: Sequence[str]) -> Distribution:
        if not self.is_quantum:
            raise ValueError("moment-sourced scenario has no quantum state")
        return joint_distribution(self.state, self.context(names))

    def context_moments(self, names: Sequence[str]) -> dict[frozenset, float]:
        """Every moment over subsets of one context."""
        if self.is_quantum:
            return all_moments(self.context_distribution(names))
        names = set(names)
        return {k: v for k, v in self.moments.entries.items() if k <= names}

    def measurable_moments(self, within: Sequence[str] | None = None) -> MomentConstraints:
        """All moments fixed by some context, optionally restricted to ``within``."""
        keep = set(self.variables.names if within is None else within)
        entries: dict[frozenset, float] = {}
        for c in self.contexts:
            for k, v in self.context_moments(c).items():
                if k <= keep:
                    entries[k] = v
        order = tuple(v for v in self.variables.names if v in keep)
        return MomentConstraints(VariableSet(order, self.domain), entries)

    def predictions(self) -> dict[str, dict[str, float]]:
        out = {}
        for c in self.contexts:
            ms = self.context_moments(c)
            out[",".join(c)] = {
                monomial_key(k, self.variables.names): v
                for k, v in sorted(ms.items(), key=lambda kv: (len(kv[0]), monomial_key(kv[0], self.variables.names)))
            }
        return out

    def bch(self) -> BchScenario | None:
        """The four-observable data, if this scenario has that shape."""
        if set(self.variables.names) != set(BCH_VARS) or self.domain != ZERO_ONE:
            return None
        m = self.measurable_moments()
        needed = [frozenset([v]) for v in BCH_VARS] + [
            frozenset(p) for p in itertools.product(("A1", "A2"), ("B1", "B2"))
        ]
        if any(k not in m.entries for k in needed):
            return None
        return BchScenario(MomentConstraints(VariableSet(BCH_VARS), {k: m.entries[k] for k in needed}))

    def to_json(self) -> dict:
        if self.is_quantum:
            source = {
                "type": "quantum",
                "state": state_to_json(self.state),
                "observables": {k: observable_to_json(o) for k, o in self.observables.items()},
            }
        else:
            source = {"type": "moments", "entries": self.moments.to_json()["entries"]}
        return {
            "name": self.name,
            "domain": self.domain,
            "variables": list(self.variables.names),
            "contexts": [list(c) for c in self.contexts],
            "source": source,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "Scenario":
        domain = obj.get("domain", ZERO_ONE)
        variables = VariableSet(tuple(obj["variables"]), domain)
        source = obj["source"]
        kind = source.get("type")
        if kind == "quantum":
            observables = {k: observable_from_json(k, v) for k, v in source["observables"].items()}
            missing = set(variables.names) - set(observables)
            if missing:
                raise ValueError(f"no observable given for {sorted(missing)}")
            return cls(obj["name"], variables, obj["contexts"], state_from_json(source["state"]), observables)
        if kind == "moments":
            return cls(obj["name"], variables, obj["contexts"], moments=MomentConstraints(variables, source["entries"]))
        raise ValueError(f"unknown source type {kind!r}")

    @classmethod
    def load(cls, path: str | Path) -> "Scenario":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _qubit(bits: str) -> np.ndarray:
    """Computational basis ket; '+' is the +1 eigenvector of sigma_z."""
    up, down = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    return tensor(*[up if b == "+" else down for b in bits])


def build_singlet_scenario() -> Scenario:
    """Two spins in the singlet; A_i act on the first, B_j on the second."""
    sx, sz = pauli("X"), pauli("Z")
    eye = np.eye(2)
    psi = PureState((_qubit("+-") - _qubit("-+")) / SQRT2)
    first = lambda op: np.kron(op, eye)
    second = lambda op: np.kron(eye, op)
    obs = {
        "A1": YesNoObservable("A1", first((eye + sx) / 2)),
        "A2": YesNoObservable("A2", first((eye + sz) / 2)),
        "B1": YesNoObservable("B1", second(eye / 2 - (sx + sz) / (2 * SQRT2))),
        "B2": YesNoObservable("B2", second(eye / 2 - (sx - sz) / (2 * SQRT2))),
    }
    contexts = [(a, b) for a in ("A1", "A2") for b in ("B1", "B2")]
    return Scenario("singlet", VariableSet(BCH_VARS), contexts, psi, obs)


def _direction(angle: float) -> tuple[float, float, float]:
    return (math.sin(angle), 0.0, math.cos(angle))


def _eigvec(angle: float, sign: int) -> np.ndarray:
    if sign > 0:
        return np.array([math.cos(angle / 2), math.sin(angle / 2)], dtype=complex)
    return np.array([-math.sin(angle / 2), math.cos(angle / 2)], dtype=complex)


def hardy_constraints(s: BchScenario) -> dict[str, float]:
    """The three vanishing combinations and the positive margin."""
    return {
        "1-<A2>-<B1>+<A2B1>": 1 - s.single("A2") - s.single("B1") + s.pair("A2", "B1"),
        "<A2>-<A2B2>": s.single("A2") - s.pair("A2", "B2"),
        "<A1B2>": s.pair("A1", "B2"),
        "<A1>-<A1B1>": s.single("A1") - s.pair("A1", "B1"),
    }


def build_hardy_scenario(left1: float = HARDY_DEFAULTS["left1"], left2: float = HARDY_DEFAULTS["left2"],
                         right1: float = HARDY_DEFAULTS["right1"], right2: float = HARDY_DEFAULTS["right2"],
                         tol: float = TOL) -> Scenario:
    """Hardy's two-spin state for spin observables in the x-z plane.

    Each argument is the polar angle of a spin direction; L1, L2 act on the
    left particle (first qubit) and R1, R2 on the right one. The state is
    |L1+, R1-> minus its component along |L2-, R2+>. A_i is the event
    R_i = +1 and B_i the event L_i = +1.
    """
    a = np.kron(_eigvec(left1, 1), _eigvec(right1, -1))
    b = np.kron(_eigvec(left2, -1), _eigvec(right2, 1))
    vec = a - b * np.vdot(b, a)
    if np.linalg.norm(vec) <= tol:
        raise DegenerateParameters("Hardy state vanishes for these directions")
    psi = PureState.normalized(vec)
    eye = np.eye(2)
    proj = lambda angle: (eye + spin_along(_direction(angle))) / 2
    obs = {
        "A1": YesNoObservable("A1", np.kron(eye, proj(right1))),
        "A2": YesNoObservable("A2", np.kron(eye, proj(right2))),
        "B1": YesNoObservable("B1", np.kron(proj(left1), eye)),
        "B2": YesNoObservable("B2", np.kron(proj(left2), eye)),
    }
    contexts = [(x, y) for x in ("A1", "A2") for y in ("B1", "B2")]
    scenario = Scenario("hardy", VariableSet(BCH_VARS), contexts, psi, obs)
    checks = hardy_constraints(scenario.bch())
    margin = checks.pop("<A1>-<A1B1>")
    bad = {k: v for k, v in checks.items() if abs(v) > tol}
    if bad:
        raise DegenerateParameters(f"Hardy zero conditions fail: {bad}")
    if margin <= tol:
        raise DegenerateParameters(f"<A1> - <A1B1> = {margin:.3g} is not positive")
    return scenario


def build_ghsz_scenario() -> Scenario:
    """Three spins in (|+++> - |--->)/sqrt2 with the six sign observables."""
    psi = PureState((_qubit("+++") - _qubit("---")) / SQRT2)
    sx, sy = pauli("X"), pauli("Y")
    ops = {
        "A1": embed(-sx, 0, 3),
        "A2": embed(-sy, 0, 3),
        "B1": embed(sy, 1, 3),
        "B2": embed(sx, 1, 3),
        "C1": embed(sy, 2, 3),
        "C2": embed(sx, 2, 3),
    }
    obs = {k: YesNoObservable(k, m, SIGN) for k, m in ops.items()}
    contexts = [(f"A{i}", f"B{j}", f"C{k}") for i, j, k in itertools.product((1, 2), repeat=3)]
    return Scenario("ghsz", VariableSet(GHSZ_VARS, PLUS_MINUS), contexts, psi, obs)


def build_ghsz_model(which: int) -> Distribution:
    """Classical model reproducing the GHSZ predictions of the contexts with C_which.

    Model 1: A1, A2, C1 fair and independent, B_i = -A_i C1.
    Model 2: A1, A2, C2 fair and independent, B1 = -A2 C2, B2 = A1 C2.
    """
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    c = f"C{which}"
    vars = VariableSet(("A1", "A2", "B1", "B2", c), PLUS_MINUS)
    w = np.zeros(32)
    for a1, a2, cv in itertools.product((-1, 1), repeat=3):
        if which == 1:
            b1, b2 = -a1 * cv, -a2 * cv
        else:
            b1, b2 = -a2 * cv, a1 * cv
        w[vars.atom_index((a1, a2, b1, b2, cv))] += 1 / 8
    return Distribution(vars, w)


def ghsz_sign_solutions() -> list[tuple[int, ...]]:
    """Assignments of +/-1 to the six observables satisfying all four perfect correlations."""
    out = []
    for values in itertools.product((-1, 1), repeat=6):
        a = dict(zip(GHSZ_VARS, values))
        if all(math.prod(a[v] for v in key) == sign for key, sign in GHSZ_PERFECT.items()):
            out.append(values)
    return out


@dataclass
class GhszAnalysis:
    model1: Distribution
    model2: Distribution
    shared_moments_agree: bool
    four_correlation: tuple[float, float]
    parity_obstruction: bool
    parity_solutions: int
    uniqueness: tuple[Interval, Interval]
    max_context_error: float
    atomwise: bool

    def to_json(self) -> dict:
        return {
            "shared_moments_agree": self.shared_moments_agree,
            "four_correlation": list(self.four_correlation),
            "parity_obstruction": self.parity_obstruction,
            "parity_solutions": self.parity_solutions,
            "uniqueness": [[iv.lo, iv.hi] for iv in self.uniqueness],
            "max_context_error": self.max_context_error,
            "atomwise": self.atomwise,
            "model1": self.model1.to_json(),
            "model2": self.model2.to_json(),
        }


def perfect_constraints(which: int) -> MomentConstraints:
    """Only the two perfect correlations that involve C_which."""
    c = f"C{which}"
    entries = {frozenset(k): v for k, v in GHSZ_PERFECT.items() if c in k}
    return MomentConstraints(VariableSet(("A1", "A2", "B1", "B2", c), PLUS_MINUS), entries)


def analyze_ghsz(scenario: Scenario | None = None, tol: float = TOL) -> GhszAnalysis:
    """Check both classical models against the quantum predictions.

    Raises :class:`VerificationError` naming the first moment a model fails
    to reproduce.
    """
    scenario = scenario or build_ghsz_scenario()
    models = {1: build_ghsz_model(1), 2: build_ghsz_model(2)}
    worst = 0.0
    atomwise = True
    for which, model in models.items():
        c = f"C{which}"
        for ctx in scenario.contexts:
            if c not in ctx:
                continue
            q = scenario.context_distribution(ctx)
            err = max_abs_diff(q, marginalize(model, ctx))
            if err > tol:
                atomwise = False
                qm = all_moments(q)
                for key, value in qm.items():
                    got = moment(model, key)
                    if abs(got - value) > tol:
                        raise VerificationError(
                            f"model {which} gives <{monomial_key(key, GHSZ_VARS)}> = {got}, quantum {value}"
                        )
            worst = max(worst, err)

    ab = ("A1", "A2", "B1", "B2")
    four = frozenset(ab)
    agree = True
    for r in range(1, 5):
        for key in itertools.combinations(ab, r):
            m1, m2 = moment(models[1], key), moment(models[2], key)
            if frozenset(key) == four:
                continue
            if abs(m1 - m2) > tol:
                agree = False
    fc = (moment(models[1], four), moment(models[2], four))
    solutions = ghsz_sign_solutions()
    uniq = (lp_interval(four, perfect_constraints(1), tol=tol), lp_interval(four, perfect_constraints(2), tol=tol))
    return GhszAnalysis(
        model1=models[1],
        model2=models[2],
        shared_moments_agree=agree,
        four_correlation=fc,
        parity_obstruction=len(solutions) == 0,
        parity_solutions=len(solutions),
        uniqueness=uniq,
        max_context_error=worst,
        atomwise=atomwise,
    )


BUILTINS = {
    "singlet": build_singlet_scenario,
    "hardy": build_hardy_scenario,
    "ghsz": build_ghsz_scenario,
}


def builtin(name: str) -> Scenario:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise ValueError(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}") from None
