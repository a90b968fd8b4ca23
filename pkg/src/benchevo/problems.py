"""Problem registry: pseudo-boolean and continuous test functions with seeded instances.

Two suites are built in. ``pbo`` holds maximization problems over bit strings,
``bbob`` holds minimization problems over the box [-5, 5]^dim. Every (suite,
function, instance, dim) combination maps deterministically to a concrete
:class:`ProblemInstance`; instance 1 is the untransformed base function, higher
instances apply a seeded transformation (an XOR mask for bit strings, an
optimum shift plus value offset for continuous functions) derived only from the
problem id, so the same id always yields the same instance in any process.

Additional functions can be registered through :func:`register`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

SUITES = ("pbo", "bbob")

REAL_LB = -5.0
REAL_UB = 5.0

# Continuous instance transforms draw the optimum shift from this sub-box so a
# shifted optimum never sits on the domain boundary.
SHIFT_LB = -4.0
SHIFT_UB = 4.0
VALUE_OFFSET_RANGE = 100.0


class UnknownFunction(LookupError):
    """No function registered under the requested (suite, function) pair."""


class UnsupportedDim(ValueError):
    """The function is registered but rejects the requested dimension."""


class DomainViolation(ValueError):
    """A solution fell outside the instance's search domain."""


@dataclass(frozen=True)
class ProblemId:
    """Identifies one concrete problem instance."""

    suite: str
    function: int
    instance: int
    dim: int

    def label(self) -> str:
        return f"{self.suite}-f{self.function}-i{self.instance}-d{self.dim}"

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "function": self.function,
            "instance": self.instance,
            "dim": self.dim,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemId":
        return cls(
            suite=str(data["suite"]),
            function=int(data["function"]),
            instance=int(data["instance"]),
            dim=int(data["dim"]),
        )


@dataclass(frozen=True)
class TargetSet:
    """Ordered performance targets, easiest first.

    ``values`` is strictly monotone in the improving direction of the problem:
    increasing for maximization, decreasing for minimization.
    """

    values: tuple[float, ...]
    orientation: str

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class FunctionSpec:
    """Registry entry for one base function.

    ``kernel`` evaluates the untransformed function: on raw bits for pbo, on
    the shifted variable z = x - x_opt (kernel minimum 0 at z = 0) for bbob.
    ``opt_point`` returns the kernel's optimum point for a given dim.
    ``pbo_targets`` builds the target values for a pbo function (unused for
    bbob, whose targets are function-independent precision levels).
    """

    suite: str
    function: int
    name: str
    min_dim: int
    default_dim: int
    kernel: Callable[[np.ndarray], float]
    opt_point: Callable[[int], np.ndarray]
    pbo_targets: Callable[[int, float], tuple[float, ...]] | None = None
    dim_check: Callable[[int], bool] | None = None


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """One evaluatable problem: base function plus instance transformation."""

    id: ProblemId
    name: str
    orientation: str  # "max" | "min"
    domain: str  # "bool" | "real"
    lb: float
    ub: float
    y_opt: float
    x_opt: np.ndarray
    mask: np.ndarray | None
    shift: np.ndarray | None
    f_offset: float
    kernel: Callable[[np.ndarray], float]


_REGISTRY: dict[tuple[str, int], FunctionSpec] = {}


def register(spec: FunctionSpec) -> None:
    """Add a function to the registry. Rejects duplicate (suite, function) keys."""
    if spec.suite not in SUITES:
        raise ValueError(f"unknown suite {spec.suite!r}")
    key = (spec.suite, spec.function)
    if key in _REGISTRY:
        raise ValueError(f"function already registered: {key}")
    _REGISTRY[key] = spec


def registered_functions() -> list[FunctionSpec]:
    return [_REGISTRY[key] for key in sorted(_REGISTRY)]


def _spec_for(suite: str, function: int) -> FunctionSpec:
    try:
        return _REGISTRY[(suite, function)]
    except KeyError:
        raise UnknownFunction(f"no function {function} in suite {suite!r}") from None


def _instance_rng(pid: ProblemId) -> np.random.Generator:
    suite_code = SUITES.index(pid.suite)
    seq = np.random.SeedSequence([suite_code, pid.function, pid.instance, pid.dim])
    return np.random.default_rng(seq)


def make_instance(pid: ProblemId) -> ProblemInstance:
    """Build the deterministic instance for ``pid``.

    Raises UnknownFunction, UnsupportedDim, or ValueError for a bad instance
    number.
    """
    spec = _spec_for(pid.suite, pid.function)
    if pid.instance < 1:
        raise ValueError(f"instance must be >= 1, got {pid.instance}")
    if pid.dim < spec.min_dim or (spec.dim_check and not spec.dim_check(pid.dim)):
        raise UnsupportedDim(
            f"{spec.name} does not support dim {pid.dim} (min_dim {spec.min_dim})"
        )

    if pid.suite == "pbo":
        if pid.instance == 1:
            mask = np.zeros(pid.dim, dtype=np.int64)
        else:
            mask = _instance_rng(pid).integers(0, 2, size=pid.dim, dtype=np.int64)
        x_opt = np.bitwise_xor(spec.opt_point(pid.dim).astype(np.int64), mask)
        y_opt = float(spec.kernel(spec.opt_point(pid.dim).astype(np.int64)))
        return ProblemInstance(
            id=pid,
            name=spec.name,
            orientation="max",
            domain="bool",
            lb=0.0,
            ub=1.0,
            y_opt=y_opt,
            x_opt=x_opt,
            mask=mask,
            shift=None,
            f_offset=0.0,
            kernel=spec.kernel,
        )

    if pid.instance == 1:
        shift = np.zeros(pid.dim, dtype=float)
        f_offset = 0.0
    else:
        rng = _instance_rng(pid)
        shift = rng.uniform(SHIFT_LB, SHIFT_UB, size=pid.dim)
        f_offset = float(rng.uniform(-VALUE_OFFSET_RANGE, VALUE_OFFSET_RANGE))
    return ProblemInstance(
        id=pid,
        name=spec.name,
        orientation="min",
        domain="real",
        lb=REAL_LB,
        ub=REAL_UB,
        y_opt=f_offset,
        x_opt=shift.copy(),
        mask=None,
        shift=shift,
        f_offset=f_offset,
        kernel=spec.kernel,
    )


def evaluate(instance: ProblemInstance, x) -> float:
    """Evaluate one solution. Raises DomainViolation for malformed input."""
    arr = np.asarray(x)
    if arr.shape != (instance.id.dim,):
        raise DomainViolation(
            f"expected shape ({instance.id.dim},), got {arr.shape}"
        )
    if instance.domain == "bool":
        if not np.isin(arr, (0, 1)).all():
            raise DomainViolation("boolean solutions must contain only 0 and 1")
        bits = arr.astype(np.int64)
        return float(instance.kernel(np.bitwise_xor(bits, instance.mask)))
    vals = arr.astype(float)
    if not np.isfinite(vals).all():
        raise DomainViolation("solution contains non-finite values")
    if (vals < instance.lb).any() or (vals > instance.ub).any():
        raise DomainViolation(
            f"solution outside [{instance.lb}, {instance.ub}]"
        )
    return float(instance.kernel(vals - instance.shift)) + instance.f_offset


def target_set(problem: ProblemId | ProblemInstance) -> TargetSet:
    """Targets for anytime performance on this problem.

    pbo functions carry their own integer target lists. bbob functions share
    101 precision levels, log-spaced over [1e-8, 1e2] in steps of a tenth of
    a decade, taken as absolute values y_opt + precision.
    """
    instance = problem if isinstance(problem, ProblemInstance) else make_instance(problem)
    if instance.domain == "bool":
        spec = _spec_for(instance.id.suite, instance.id.function)
        values = spec.pbo_targets(instance.id.dim, instance.y_opt)
        return TargetSet(values=values, orientation="max")
    precisions = tuple(10.0 ** ((20 - k) / 10) for k in range(101))
    return TargetSet(
        values=tuple(instance.y_opt + p for p in precisions),
        orientation="min",
    )


def catalog() -> list[dict]:
    """Machine-readable listing of every registered function."""
    rows = []
    for spec in registered_functions():
        rows.append(
            {
                "suite": spec.suite,
                "function": spec.function,
                "name": spec.name,
                "orientation": "max" if spec.suite == "pbo" else "min",
                "domain": "bool" if spec.suite == "pbo" else "real",
                "min_dim": spec.min_dim,
                "default_dim": spec.default_dim,
                "targets": _target_description(spec),
            }
        )
    return rows


def _target_description(spec: FunctionSpec) -> str:
    if spec.suite == "bbob":
        return "101 precision levels, log-spaced in [1e-8, 1e2]"
    values = spec.pbo_targets(spec.default_dim, _default_y_opt(spec))
    return f"{len(values)} integer targets in [{values[0]:g}, {values[-1]:g}] at dim {spec.default_dim}"


def _default_y_opt(spec: FunctionSpec) -> float:
    return float(spec.kernel(spec.opt_point(spec.default_dim)))


# --- pbo kernels -----------------------------------------------------------


def _ones(dim: int) -> np.ndarray:
    return np.ones(dim, dtype=np.int64)


def _onemax(x: np.ndarray) -> float:
    return float(x.sum())


def _leading_ones(x: np.ndarray) -> float:
    zeros = np.flatnonzero(x == 0)
    return float(zeros[0]) if zeros.size else float(x.size)


def _harmonic(x: np.ndarray) -> float:
    return float(np.dot(np.arange(1, x.size + 1), x))


def _onemax_targets(dim: int, y_opt: float) -> tuple[float, ...]:
    return tuple(float(v) for v in range(math.ceil(dim / 2), dim + 1))


def _leading_ones_targets(dim: int, y_opt: float) -> tuple[float, ...]:
    return tuple(float(v) for v in range(0, dim + 1))


def _harmonic_targets(dim: int, y_opt: float) -> tuple[float, ...]:
    top = int(y_opt)
    if dim == 100:
        return tuple(float(2525 + 5 * i) for i in range(506))
    return tuple(float(v) for v in range(math.ceil(top / 2), top + 1))


# --- bbob kernels (minimum 0 at z = 0) --------------------------------------


def _zeros(dim: int) -> np.ndarray:
    return np.zeros(dim, dtype=float)


def _sphere(z: np.ndarray) -> float:
    return float(np.dot(z, z))


def _rastrigin(z: np.ndarray) -> float:
    return float(10.0 * z.size + np.sum(z * z - 10.0 * np.cos(2.0 * np.pi * z)))


def _rosenbrock(z: np.ndarray) -> float:
    w = z + 1.0
    return float(np.sum(100.0 * (w[:-1] ** 2 - w[1:]) ** 2 + (w[:-1] - 1.0) ** 2))


def _different_powers(z: np.ndarray) -> float:
    exponents = 2.0 + 4.0 * np.arange(z.size) / (z.size - 1)
    return float(np.sqrt(np.sum(np.abs(z) ** exponents)))


# The classic sine-surface optimum sits far outside [-5, 5], so the kernel
# embeds a scaled window around it: the reachable slice stays inside one hump
# of u*sin(sqrt(u)), keeping the in-box minimum exactly at z = 0.
_SCHWEFEL_SCALE = 6.0
_SCHWEFEL_U = 420.9687462275036
_SCHWEFEL_C = _SCHWEFEL_U * math.sin(math.sqrt(_SCHWEFEL_U))


def _schwefel(z: np.ndarray) -> float:
    u = _SCHWEFEL_SCALE * z + _SCHWEFEL_U
    return float(np.sum(_SCHWEFEL_C - u * np.sin(np.sqrt(np.abs(u)))))


def _register_builtins() -> None:
    register(
        FunctionSpec(
            suite="pbo",
            function=1,
            name="OneMax",
            min_dim=1,
            default_dim=100,
            kernel=_onemax,
            opt_point=_ones,
            pbo_targets=_onemax_targets,
        )
    )
    register(
        FunctionSpec(
            suite="pbo",
            function=2,
            name="LeadingOnes",
            min_dim=1,
            default_dim=100,
            kernel=_leading_ones,
            opt_point=_ones,
            pbo_targets=_leading_ones_targets,
        )
    )
    register(
        FunctionSpec(
            suite="pbo",
            function=3,
            name="Harmonic",
            min_dim=1,
            default_dim=100,
            kernel=_harmonic,
            opt_point=_ones,
            pbo_targets=_harmonic_targets,
        )
    )
    register(
        FunctionSpec(
            suite="bbob",
            function=1,
            name="Sphere",
            min_dim=1,
            default_dim=5,
            kernel=_sphere,
            opt_point=_zeros,
        )
    )
    register(
        FunctionSpec(
            suite="bbob",
            function=3,
            name="Rastrigin",
            min_dim=1,
            default_dim=5,
            kernel=_rastrigin,
            opt_point=_zeros,
        )
    )
    register(
        FunctionSpec(
            suite="bbob",
            function=8,
            name="Rosenbrock",
            min_dim=2,
            default_dim=5,
            kernel=_rosenbrock,
            opt_point=_zeros,
        )
    )
    register(
        FunctionSpec(
            suite="bbob",
            function=14,
            name="DifferentPowers",
            min_dim=2,
            default_dim=5,
            kernel=_different_powers,
            opt_point=_zeros,
        )
    )
    register(
        FunctionSpec(
            suite="bbob",
            function=20,
            name="Schwefel",
            min_dim=1,
            default_dim=5,
            kernel=_schwefel,
            opt_point=_zeros,
        )
    )


_register_builtins()
