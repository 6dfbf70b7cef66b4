"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteLoss


@dataclass
class GradCheckReport:
    max_rel_error: dict[str, float] = field(default_factory=dict)
    coords_checked: dict[str, int] = field(default_factory=dict)
    tolerance: float = 1e-4

    @property
    def worst(self) -> float:
        return max(self.max_rel_error.values(), default=0.0)

    @property
    def total_coords(self) -> int:
        return sum(self.coords_checked.values())

    @property
    def passed(self) -> bool:
        return self.worst < self.tolerance


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)


def grad_check(loss_fn, params: dict, epsilon: float = 1e-5, tolerance: float = 1e-4,
               coords_per_param: int | None = 16, seed: int = 0) -> GradCheckReport:
    """Compare analytic gradients against central differences.

    ``loss_fn(params)`` must return ``(loss, grads)`` where ``grads`` maps the
    same names as ``params`` to arrays of matching shape. Parameters are
    perturbed in place and restored. ``coords_per_param=None`` checks every
    coordinate.
    """
    if not 1e-6 <= epsilon <= 1e-4:
        raise ValueError(f"epsilon {epsilon} outside [1e-6, 1e-4]")
    for name, arr in params.items():
        if arr.dtype != np.float64:
            raise TypeError(f"grad_check needs float64 parameters, {name} is {arr.dtype}")
    loss, grads = loss_fn(params)
    if not np.isfinite(loss):
        raise NonFiniteLoss(f"loss is {loss}")
    rng = np.random.default_rng(seed)
    report = GradCheckReport(tolerance=tolerance)
    for name in params:
        arr = params[name]
        flat = arr.reshape(-1)
        analytic = np.asarray(grads[name], dtype=float).reshape(-1)
        if coords_per_param is None or coords_per_param >= flat.size:
            coords = np.arange(flat.size)
        else:
            coords = np.sort(rng.choice(flat.size, size=coords_per_param, replace=False))
        worst = 0.0
        for j in coords:
            old = flat[j]
            flat[j] = old + epsilon
            up, _ = loss_fn(params)
            flat[j] = old - epsilon
            down, _ = loss_fn(params)
            flat[j] = old
            if not (np.isfinite(up) and np.isfinite(down)):
                raise NonFiniteLoss(f"non-finite loss perturbing {name}[{j}]")
            numeric = (up - down) / (2 * epsilon)
            worst = max(worst, relative_error(analytic[j], numeric))
        report.max_rel_error[name] = worst
        report.coords_checked[name] = len(coords)
    return report
