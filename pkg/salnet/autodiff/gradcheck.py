"""Central finite-difference verification of backward rules."""

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike

from salnet.autodiff.graph import DiffGraph
from salnet.config.constants import GRADCHECK_FLOOR, GRADCHECK_STEP, GRADCHECK_TOLERANCE
from salnet.shared.exceptions import ParameterRangeError


@dataclass
class ParameterCheck:
    name: str
    max_relative_error: float
    entries_checked: int
    passed: bool


@dataclass
class GradCheckReport:
    tolerance: float
    checks: Dict[str, ParameterCheck] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    @property
    def failed(self) -> List[str]:
        return [name for name, c in self.checks.items() if not c.passed]

    @property
    def max_relative_error(self) -> float:
        return max((c.max_relative_error for c in self.checks.values()), default=0.0)


def relative_error(analytic: float, numeric: float, floor: float = GRADCHECK_FLOOR) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def grad_check(
    graph: DiffGraph,
    inputs: Mapping[str, ArrayLike],
    output: str,
    params: Optional[Sequence[str]] = None,
    wrt_inputs: Sequence[str] = (),
    step: float = GRADCHECK_STEP,
    tolerance: float = GRADCHECK_TOLERANCE,
    seed_adjoint: Optional[ArrayLike] = None,
    max_entries: Optional[int] = None,
    sample_seed: int = 0,
) -> GradCheckReport:
    """
    Compare backward adjoints against central finite differences.

    The scalar checked is ``sum(seed_adjoint * output)``; the seed defaults to
    ones. Each listed parameter (all parameters when ``params`` is None) and
    each input named in ``wrt_inputs`` is perturbed entry by entry, or on a
    fixed random subset of ``max_entries`` entries.

    Raises:
        ParameterRangeError: step is not positive
    """
    if step <= 0:
        raise ParameterRangeError("grad_check step must be positive", details={"step": step})

    base_inputs = {k: np.array(v, dtype=np.float64) for k, v in inputs.items()}
    outputs = graph.forward(base_inputs)
    seed = (
        np.ones_like(outputs[output].data)
        if seed_adjoint is None
        else np.asarray(seed_adjoint, dtype=np.float64)
    )

    graph.zero_grad()
    analytic_params = {k: v.copy() for k, v in graph.backward(output, seed).items()}
    analytic_inputs = {k: graph.input_adjoint(k).copy() for k in wrt_inputs}
    graph.zero_grad()

    def objective(current_inputs: Dict[str, np.ndarray]) -> float:
        out = graph.forward(current_inputs)[output].data
        return float(np.sum(seed * out))

    sampler = np.random.default_rng(sample_seed)

    def indices(shape: tuple[int, ...]) -> List[tuple[int, ...]]:
        all_idx = list(np.ndindex(*shape)) if shape else [()]
        if max_entries is None or len(all_idx) <= max_entries:
            return all_idx
        picks = sampler.choice(len(all_idx), size=max_entries, replace=False)
        return [all_idx[i] for i in sorted(picks)]

    def compare(label: str, data: np.ndarray, analytic: np.ndarray) -> ParameterCheck:
        # ``data`` is perturbed in place and restored after each entry.
        worst, checked = 0.0, 0
        for idx in indices(data.shape):
            original = data[idx]
            data[idx] = original + step
            plus = objective(base_inputs)
            data[idx] = original - step
            minus = objective(base_inputs)
            data[idx] = original
            numeric = (plus - minus) / (2.0 * step)
            worst = max(worst, relative_error(float(analytic[idx]), numeric))
            checked += 1
        return ParameterCheck(label, worst, checked, worst <= tolerance)

    report = GradCheckReport(tolerance=tolerance)
    names = list(graph.parameters) if params is None else list(params)
    for name in names:
        report.checks[name] = compare(name, graph.parameters[name].data, analytic_params[name])
    for name in wrt_inputs:
        label = f"input:{name}"
        report.checks[label] = compare(label, base_inputs[name], analytic_inputs[name])

    graph.forward(base_inputs)
    return report
