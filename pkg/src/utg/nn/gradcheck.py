"""Central finite-difference checking of analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import Tensor


@dataclass
class GradCheckReport:
    passed: bool
    tolerance: float
    max_rel_error: float
    worst_param: str
    per_param: dict = field(default_factory=dict)

    def __str__(self):
        verdict = "pass" if self.passed else "FAIL"
        lines = [f"grad check: {verdict} (max rel error {self.max_rel_error:.3e} vs tol {self.tolerance:.1e})"]
        for name, err in sorted(self.per_param.items(), key=lambda kv: -kv[1]):
            marker = " <-- worst" if name == self.worst_param else ""
            lines.append(f"  {name}: {err:.3e}{marker}")
        return "\n".join(lines)


def grad_check(fn, inputs: dict, tolerance: float = 1e-4, h: float = 1e-3) -> GradCheckReport:
    """Compare analytic gradients of a scalar-valued fragment to central differences.

    ``fn`` maps a dict of named Tensors to a scalar Tensor; ``inputs`` holds
    the evaluation point as arrays. Both passes run in float64 so the
    comparison measures the backward implementation, not storage rounding.
    Relative error per element is |a - n| / max(|a|, |n|, 1e-6).
    """
    points = {name: np.asarray(values, dtype=np.float64) for name, values in inputs.items()}

    tensors = {name: Tensor(values.copy(), requires_grad=True) for name, values in points.items()}
    out = fn(tensors)
    out.backward()
    analytic = {
        name: (t.grad if t.grad is not None else np.zeros_like(t.data)) for name, t in tensors.items()
    }

    per_param = {}
    worst = ("", 0.0)
    for name, base in points.items():
        numeric = np.zeros_like(base)
        flat = base.reshape(-1)
        num_flat = numeric.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + h
            hi = fn({n: Tensor(v) for n, v in points.items()}).item()
            flat[i] = original - h
            lo = fn({n: Tensor(v) for n, v in points.items()}).item()
            flat[i] = original
            num_flat[i] = (hi - lo) / (2.0 * h)
        a = np.asarray(analytic[name], dtype=np.float64)
        scale = np.maximum(np.maximum(np.abs(a), np.abs(numeric)), 1e-6)
        err = float((np.abs(a - numeric) / scale).max()) if a.size else 0.0
        per_param[name] = err
        if err >= worst[1]:
            worst = (name, err)

    return GradCheckReport(
        passed=worst[1] <= tolerance,
        tolerance=tolerance,
        max_rel_error=worst[1],
        worst_param=worst[0],
        per_param=per_param,
    )
