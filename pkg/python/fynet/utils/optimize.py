import typing

import numpy as np
import scipy.optimize

from .logger import logger

EPSILON = 1.0e-14

TOLERANCE = 1.0e-10


class Candidate(typing.NamedTuple):
    value: float
    x: typing.Any
    restart: int


def restart_generators(seed: int, restarts: int) -> typing.List[np.random.Generator]:
    """One independent generator per restart, derived from a single seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(int(seed)).spawn(int(restarts))]


def best_candidate(candidates: typing.Iterable[Candidate]) -> Candidate:
    """Largest value wins; ties go to the smaller restart index."""
    best = None
    for c in candidates:
        if best is None or c.value > best.value or (c.value == best.value and c.restart < best.restart):
            best = c
    if best is None:
        raise RuntimeError("No candidate to reduce")
    return best


def multistart(
    run_one: typing.Callable[[np.random.Generator, int], typing.Tuple[float, typing.Any]],
    seed: int,
    restarts: int,
    label: str = "",
) -> Candidate:
    candidates = []
    for idx, rng in enumerate(restart_generators(seed, restarts)):
        value, x = run_one(rng, idx)
        logger.debug(f"{label} restart {idx}: {value:.10f}")
        candidates.append(Candidate(float(value), x, idx))
    return best_candidate(candidates)


def project_sphere(x: np.ndarray, nonnegative: bool = True, fallback: np.ndarray = None) -> np.ndarray:
    """Row-wise projection onto unit spheres (optionally intersected with the nonnegative orthant)."""
    y = np.maximum(x, 0.0) if nonnegative else np.array(x, dtype=float)
    norm = np.linalg.norm(y, axis=-1, keepdims=True)
    degenerate = norm[..., 0] < EPSILON
    norm[degenerate] = 1.0
    y = y / norm
    if np.any(degenerate):
        y[degenerate] = fallback[degenerate] if fallback is not None else 0.0
    return y


def sphere_ascent(
    func: typing.Callable[[np.ndarray], typing.Tuple[float, np.ndarray]],
    x0: np.ndarray,
    step: float = 0.1,
    tolerance: float = TOLERANCE,
    max_iter: int = 20000,
    nonnegative: bool = True,
) -> typing.Tuple[float, np.ndarray]:
    """Projected gradient ascent on a product of unit spheres.

    ``x0`` has one row per sphere. ``func`` returns the value and its gradient
    with the shape of ``x``. A trial step that does not increase the value is
    halved; accepted steps grow the step length again. Stops once an accepted
    step improves the value by less than ``tolerance`` relative to its size.
    """

    x = project_sphere(np.asarray(x0, dtype=float), nonnegative)
    value, grad = func(x)

    for it in range(max_iter):
        while step > EPSILON:
            trial = project_sphere(x + step * grad, nonnegative, fallback=x)
            trial_value, trial_grad = func(trial)
            if trial_value > value:
                break
            step *= 0.5
        else:
            break

        gain = trial_value - value
        x, value, grad = trial, trial_value, trial_grad
        step = min(step * 1.5, 10.0)

        if gain < tolerance * max(1.0, abs(value)):
            break
    else:
        logger.warning(f"sphere_ascent stopped after {max_iter} iterations at value {value:.12g}")

    return float(value), x


def maximize(
    func: typing.Callable[[np.ndarray], float],
    x0: np.ndarray,
    method: str = "L-BFGS-B",
    bounds=None,
    tolerance: float = TOLERANCE,
    max_iter: int = 500,
) -> typing.Tuple[float, np.ndarray]:
    """Maximize ``func`` with :func:`scipy.optimize.minimize`; never worse than the start point."""

    x0 = np.asarray(x0, dtype=float)
    start = float(func(x0))

    sol = scipy.optimize.minimize(
        lambda x: -func(x), x0, method=method, bounds=bounds, tol=tolerance, options={"maxiter": max_iter}
    )

    if not sol.success:
        logger.warning(f"{sol.message} : maximize stopped at {-sol.fun:.12g}")

    if -sol.fun < start:
        return start, x0

    return float(-sol.fun), np.asarray(sol.x)


def maximize_scalar(func: typing.Callable[[float], float], bounds: typing.Tuple[float, float], xatol: float = 1.0e-10):
    sol = scipy.optimize.minimize_scalar(lambda x: -func(x), bounds=bounds, method="bounded", options={"xatol": xatol})
    if not sol.success:
        logger.warning(f"{sol.message} : maximize_scalar stopped at x={sol.x}")
    return float(-sol.fun), float(sol.x)
