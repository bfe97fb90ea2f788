"""Tripartite two-setting Bell inequalities.

An inequality is a real tensor c[x, y, z] over the correlators
⟨A_x B_y C_z⟩, x, y, z ∈ {0, 1, 2}, where slot 0 is the identity (marginals)
and 1, 2 are the two dichotomic settings of the party.
"""

from __future__ import annotations

import itertools
import json
import pathlib
import re
import typing
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..utils.envs import FY_RESTARTS, FY_SEED
from ..utils.logger import logger
from ..utils.optimize import multistart
from .QuditAlgebra import DenseOperator, DenseState, haar_unitary
from .TriangleNetwork import TriangleProtocol
from .Utilities import DimensionMismatchError, DomainError, TranscriptionError

ZERO_EIGENVALUE = 1.0e-12

SEESAW_TOLERANCE = 1.0e-10

PARTIES = "ABC"

G1 = (
    "2<C1> + 2<B1> + 2<B1C2> + <A1> + <A1C1> + <A1B1> - 2<A1B1C1> - <A1B1C2> + <A1B2C1> - <A1B2C2>"
    " + <A2> + <A2C1> + <A2B1> - 2<A2B1C1> - <A2B1C2> - <A2B2C1> + <A2B2C2>"
)

G2 = (
    "2<C1> + <B1> + <B1C1> + <B2> + <B2C1> + <A1> + <A1C1> + <A1B1> - 2<A1B1C1> + <A1B1C2> - <A1B2C1>"
    " - <A1B2C2> + <A2> + <A2C1> - <A2B1C1> - <A2B1C2> + <A2B2> - 2<A2B2C1> + <A2B2C2>"
)

LIFTED_CHSH = (
    "<A1B1> + <A1B2> + <A2B1> - <A2B2> + <A1B1C1> + <A1B2C1> + <A2B1C1> - <A2B2C1> - 2<C1>"
)
"""CHSH between A and B counted only when C1 = +1; row 4 of the reference table"""

REFERENCE_TABLE = {
    "4": {"C": 2.0, "Q": 3.65685, 2: 2.00211, 3: 1.99962, 4: 1.98873},
    "5": {"C": 3.0, "Q": 4.88854, 2: 3.00905, 3: 3.02612, 4: 3.01511},
    "6": {"C": 3.0, "Q": 4.65685, 2: 3.00411, 3: 3.00752, 4: 2.99420},
    "21": {"C": 4.0, "Q": 5.95546, 2: 4.00545, 3: 4.01432, 4: 4.00016},
    "40": {"C": 6.0, "Q": 8.12979, 2: 6.00715, 3: 6.01344, 4: 5.98919},
    "g1": {"C": 6.0, "Q": 6.82507, 2: 6.00001, 3: 5.97618, 4: 5.93736},
    "g2": {"C": 6.0, "Q": 6.56259, 2: 6.00058, 3: 5.97618, 4: 5.93736},
}
"""classical bound, quantum optimum and the values reached on Protocol I outputs per source dimension"""

TABLE_ORDER = ["4", "5", "6", "21", "40", "g1", "g2"]

_TERM = re.compile(r"([+-])?\s*(\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*<\s*((?:[ABC]\s*[12]\s*)*)>")


def parse_expression(expression: str) -> np.ndarray:
    """Coefficient tensor of a correlator expression such as ``2<C1> + <A1B1> - 2<A1B1C1>``."""
    coeffs = np.zeros((3, 3, 3))
    position = 0
    text = expression.strip()
    for match in _TERM.finditer(text):
        if text[position : match.start()].strip():
            raise DomainError(f"Cannot parse '{text[position:match.start()]}' in Bell expression")
        if position > 0 and match.group(1) is None:
            raise DomainError(f"Missing sign before term '{match.group(0)}'")
        position = match.end()
        sign = -1.0 if match.group(1) == "-" else 1.0
        weight = float(match.group(2)) if match.group(2) else 1.0
        slots = [0, 0, 0]
        for party, setting in re.findall(r"([ABC])\s*([12])", match.group(3)):
            k = PARTIES.index(party)
            if slots[k] != 0:
                raise DomainError(f"Party {party} appears twice in '{match.group(0)}'")
            slots[k] = int(setting)
        coeffs[tuple(slots)] += sign * weight
    if text[position:].strip() or position == 0:
        raise DomainError(f"Cannot parse Bell expression '{expression}'")
    return coeffs


def _strategies() -> np.ndarray:
    """The four deterministic ±1 assignments of one party as rows (1, s_1, s_2)."""
    return np.array([[1.0, s1, s2] for s1, s2 in itertools.product((1.0, -1.0), repeat=2)])


def classical_bound(ineq: typing.Union[BellInequality, np.ndarray]) -> float:
    """Maximum over the 4³ deterministic local strategies."""
    coeffs = ineq.coeffs if isinstance(ineq, BellInequality) else np.asarray(ineq, dtype=float)
    S = _strategies()
    return float(np.einsum("xyz,ix,jy,kz->ijk", coeffs, S, S, S).max())


@dataclass(frozen=True, eq=False)
class BellInequality:
    name: str
    coeffs: np.ndarray
    classical_bound: float = None
    quantum_bound: typing.Optional[float] = None
    """reference quantum optimum"""

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.shape != (3, 3, 3) or not np.all(np.isfinite(coeffs)):
            raise DomainError(f"Inequality {self.name}: coefficients must be a finite 3x3x3 tensor")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        bound = classical_bound(coeffs)
        if self.classical_bound is not None and abs(bound - self.classical_bound) > 1.0e-9:
            raise TranscriptionError(
                f"Inequality {self.name}: enumerated classical bound {bound} differs from {self.classical_bound}"
            )
        object.__setattr__(self, "classical_bound", bound)

    @classmethod
    def from_expression(cls, name: str, expression: str, **kwargs) -> BellInequality:
        return cls(name, parse_expression(expression), **kwargs)

    @property
    def algebraic_max(self) -> float:
        return float(np.abs(self.coeffs).sum())

    def scaled(self, factor: float) -> BellInequality:
        return BellInequality(f"{factor}*{self.name}", factor * self.coeffs)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "coeffs": self.coeffs.tolist(),
            "classical_bound": self.classical_bound,
            "quantum_bound": self.quantum_bound,
        }


def _reference(name: str) -> dict:
    return {"classical_bound": REFERENCE_TABLE[name]["C"], "quantum_bound": REFERENCE_TABLE[name]["Q"]}


def load_inequalities(path: typing.Union[str, pathlib.Path]) -> typing.List[BellInequality]:
    """Read inequalities from JSON: a list of {"name", "expression"} or {"name", "coeffs"} objects.

    Names found in :data:`REFERENCE_TABLE` are checked against its classical bound.
    """
    path = pathlib.Path(path)
    try:
        entries = json.loads(path.read_text())
    except json.JSONDecodeError as error:
        raise DomainError(f"Malformed inequality file {path}: {error}") from error

    result = []
    for entry in entries:
        name = str(entry["name"])
        kwargs = _reference(name) if name in REFERENCE_TABLE else {}
        if "expression" in entry:
            result.append(BellInequality.from_expression(name, entry["expression"], **kwargs))
        elif "coeffs" in entry:
            result.append(BellInequality(name, np.asarray(entry["coeffs"], dtype=float), **kwargs))
        else:
            raise DomainError(f"Inequality {name} has neither 'expression' nor 'coeffs'")
    logger.info(f"Load {len(result)} inequalities from {path}")
    return result


def builtin_inequalities(path: typing.Union[str, pathlib.Path] = None) -> typing.List[BellInequality]:
    """Row 4, g1 and g2, merged with the inequalities of ``path`` in table order."""
    extra = load_inequalities(path) if path is not None else []
    known = {ineq.name for ineq in extra}
    builtin = [
        BellInequality.from_expression(name, expr, **_reference(name))
        for name, expr in (("4", LIFTED_CHSH), ("g1", G1), ("g2", G2))
        if name not in known
    ]
    order = {name: k for k, name in enumerate(TABLE_ORDER)}
    return sorted(extra + builtin, key=lambda ineq: order.get(ineq.name, len(order)))


def _check_dichotomic(o: np.ndarray, atol: float = 1.0e-9) -> np.ndarray:
    o = np.asarray(o, dtype=complex)
    if o.ndim != 2 or o.shape[0] != o.shape[1]:
        raise DomainError(f"Observable must be a square matrix, got shape {o.shape}")
    if not np.allclose(o, o.conj().T, atol=atol) or not np.allclose(o @ o, np.eye(o.shape[0]), atol=atol):
        raise DomainError("Observable is not a Hermitian involution (O² ≠ 1)")
    return o


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    observables: typing.Tuple[typing.Tuple[np.ndarray, np.ndarray], ...]
    """(A_1, A_2), (B_1, B_2), (C_1, C_2)"""

    def __post_init__(self):
        if len(self.observables) != 3 or any(len(pair) != 2 for pair in self.observables):
            raise DomainError("Need two observables for each of three parties")
        obs = tuple(tuple(_check_dichotomic(o) for o in pair) for pair in self.observables)
        for pair in obs:
            if pair[0].shape != pair[1].shape:
                raise DimensionMismatchError("The two settings of a party act on different spaces")
        object.__setattr__(self, "observables", obs)

    @property
    def dims(self) -> typing.Tuple[int, int, int]:
        return tuple(pair[0].shape[0] for pair in self.observables)

    def stacks(self) -> typing.List[np.ndarray]:
        """Per party (identity, setting 1, setting 2) stacked along axis 0."""
        return [np.stack([np.eye(pair[0].shape[0]), pair[0], pair[1]]) for pair in self.observables]

    @classmethod
    def from_stacks(cls, stacks: typing.Sequence[np.ndarray]) -> MeasurementSet:
        return cls(tuple((s[1], s[2]) for s in stacks))

    @classmethod
    def random(cls, rng: np.random.Generator, dims: typing.Sequence[int] = (2, 2, 2)) -> MeasurementSet:
        return cls(tuple((random_observable(rng, d), random_observable(rng, d)) for d in dims))

    def to_dict(self) -> dict:
        return {
            party: [np.stack([o.real, o.imag], axis=-1).tolist() for o in pair]
            for party, pair in zip(PARTIES, self.observables)
        }


def random_observable(rng: np.random.Generator, dim: int) -> np.ndarray:
    u = haar_unitary(rng, dim)
    signs = rng.choice([-1.0, 1.0], size=dim)
    return (u * signs) @ u.conj().T


def _as_tensor(rho, dims: typing.Sequence[int] = None) -> np.ndarray:
    if isinstance(rho, DenseState):
        rho = rho.density()
    if isinstance(rho, DenseOperator):
        dims = rho.dims
        matrix = rho.matrix
    else:
        matrix = np.asarray(rho, dtype=complex)
        dims = tuple(dims) if dims is not None else (2, 2, 2)
    if len(dims) != 3:
        raise DimensionMismatchError(f"Expected a three-party state, got dims {dims}")
    return matrix.reshape(tuple(dims) * 2)


def correlators(rho_tensor: np.ndarray, stacks: typing.Sequence[np.ndarray]) -> np.ndarray:
    """E[x, y, z] = Tr ρ (A_x ⊗ B_y ⊗ C_z)"""
    A, B, C = stacks
    if rho_tensor.shape[:3] != (A.shape[1], B.shape[1], C.shape[1]):
        raise DimensionMismatchError(f"State dims {rho_tensor.shape[:3]} do not match observables")
    return np.einsum("xba,ydc,zfe,acebdf->xyz", A, B, C, rho_tensor)


def _value(coeffs: np.ndarray, rho_tensor: np.ndarray, stacks) -> float:
    return float(np.einsum("xyz,xyz->", coeffs, correlators(rho_tensor, stacks)).real)


def bell_value(ineq: BellInequality, rho, meas: MeasurementSet) -> float:
    return _value(ineq.coeffs, _as_tensor(rho, meas.dims), meas.stacks())


def bell_operator(ineq: BellInequality, meas: MeasurementSet) -> np.ndarray:
    A, B, C = meas.stacks()
    op = np.einsum("xyz,xab,ycd,zef->acebdf", ineq.coeffs, A, B, C)
    dim = int(np.prod(meas.dims))
    return op.reshape(dim, dim)


def _sign(F: np.ndarray) -> np.ndarray:
    mu, v = np.linalg.eigh((F + F.conj().T) / 2)
    signs = np.where(mu < -ZERO_EIGENVALUE, -1.0, 1.0)
    return (v * signs) @ v.conj().T


_PARTIAL = (
    ("acebdf,ydc,zfe->yzab", "yz,yzab->ab"),
    ("acebdf,xba,zfe->xzcd", "xz,xzcd->cd"),
    ("acebdf,xba,ydc->xyef", "xy,xyef->ef"),
)


def _best_response(coeffs: np.ndarray, rho_tensor: np.ndarray, stacks: typing.List[np.ndarray], party: int):
    """Replace both settings of ``party`` by sign(F), F being the operator their value is linear in."""
    others = [stacks[k] for k in range(3) if k != party]
    contraction, reduction = _PARTIAL[party]
    M = np.einsum(contraction, rho_tensor, *others)
    stack = stacks[party].copy()
    for s in (1, 2):
        c = np.take(coeffs, s, axis=party)
        stack[s] = _sign(np.einsum(reduction, c, M))
    stacks[party] = stack


def _seesaw_from(coeffs, rho_tensor, stacks, tolerance: float, max_sweeps: int):
    value = _value(coeffs, rho_tensor, stacks)
    for sweep in range(max_sweeps):
        start = value
        for party in range(3):
            _best_response(coeffs, rho_tensor, stacks, party)
            new = _value(coeffs, rho_tensor, stacks)
            if new < value - 1.0e-9:
                raise RuntimeError(f"See-saw decreased the objective ({value} -> {new})")
            value = new
        if value - start < tolerance:
            break
    else:
        logger.warning(f"See-saw stopped after {max_sweeps} sweeps at {value:.12g}")
    return value, stacks


def seesaw(
    ineq: BellInequality,
    rho,
    dims: typing.Sequence[int] = None,
    restarts: int = FY_RESTARTS,
    seed: int = FY_SEED,
    tolerance: float = SEESAW_TOLERANCE,
    max_sweeps: int = 1000,
) -> typing.Tuple[float, MeasurementSet]:
    """Best Bell value on a fixed state over dichotomic observables, by alternating maximization."""
    rho_tensor = _as_tensor(rho, dims)
    local_dims = rho_tensor.shape[:3]

    def run_one(rng: np.random.Generator, idx: int):
        stacks = MeasurementSet.random(rng, local_dims).stacks()
        return _seesaw_from(ineq.coeffs, rho_tensor, stacks, tolerance, max_sweeps)

    best = multistart(run_one, seed, restarts, label=f"seesaw[{ineq.name}]")
    return best.value, MeasurementSet.from_stacks(best.x)


def quantum_max(
    ineq: BellInequality,
    local_dims: typing.Sequence[int] = (2, 2, 2),
    restarts: int = FY_RESTARTS,
    seed: int = FY_SEED,
    tolerance: float = SEESAW_TOLERANCE,
    max_sweeps: int = 1000,
) -> float:
    """Lower estimate of the quantum optimum: alternate the top eigenvector of the Bell operator with the observables."""
    if any(d < 2 for d in local_dims):
        raise DomainError(f"Local dimensions must be >= 2, got {tuple(local_dims)}")
    dims = tuple(int(d) for d in local_dims)

    def run_one(rng: np.random.Generator, idx: int):
        meas = MeasurementSet.random(rng, dims)
        value = -np.inf
        for sweep in range(max_sweeps):
            w, v = np.linalg.eigh(bell_operator(ineq, meas))
            psi = v[:, -1]
            rho_tensor = np.outer(psi, psi.conj()).reshape(dims * 2)
            stacks = meas.stacks()
            for party in range(3):
                _best_response(ineq.coeffs, rho_tensor, stacks, party)
            meas = MeasurementSet.from_stacks(stacks)
            new = _value(ineq.coeffs, rho_tensor, stacks)
            if new - value < tolerance:
                value = max(value, new)
                break
            value = new
        return value, meas

    return multistart(run_one, seed, restarts, label=f"quantum_max[{ineq.name}]").value


def table1_report(
    source_dims: typing.Sequence[int] = (2, 3, 4),
    restarts: int = 200,
    seed: int = FY_SEED,
    inequalities: typing.Sequence[BellInequality] = None,
    protocol_restarts: int = FY_RESTARTS,
) -> pd.DataFrame:
    """Bell values of Protocol I outputs, one row per inequality, one column per source dimension."""
    inequalities = builtin_inequalities() if inequalities is None else inequalities

    for t in source_dims:
        if t not in (2, 3, 4):
            raise DomainError(f"Source dimensions are limited to 2, 3, 4, got {t}")

    protocol = TriangleProtocol.create("p1", restarts=protocol_restarts, seed=seed)
    states = {t: protocol.run(t=t).rho_out for t in source_dims}

    rows = []
    for ineq in inequalities:
        row = {"#": ineq.name, "C": ineq.classical_bound, "Q": ineq.quantum_bound}
        for t, rho in states.items():
            value, _ = seesaw(ineq, rho, restarts=restarts, seed=seed)
            row[f"d={t}"] = value
            logger.info(f"Inequality {ineq.name}, source dimension {t}: {value:.6f}")
        rows.append(row)

    return pd.DataFrame(rows, columns=["#", "C", "Q"] + [f"d={t}" for t in source_dims])
