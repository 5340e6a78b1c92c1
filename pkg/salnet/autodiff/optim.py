"""Adam optimizer over named ``DiffValue`` parameters."""

from dataclasses import dataclass, field
from typing import Dict, Mapping

import numpy as np

from salnet.autodiff.value import Array, DiffValue
from salnet.config.constants import ADAM_BETAS, ADAM_EPS, ADAM_LR
from salnet.shared.exceptions import NonFiniteError


@dataclass
class AdamState:
    """First/second moment buffers and the step counter."""

    step: int = 0
    m: Dict[str, Array] = field(default_factory=dict)
    v: Dict[str, Array] = field(default_factory=dict)


def adam_step(
    params: Mapping[str, DiffValue],
    state: AdamState,
    lr: float = ADAM_LR,
    betas: tuple[float, float] = ADAM_BETAS,
    eps: float = ADAM_EPS,
) -> Mapping[str, DiffValue]:
    """
    Apply one bias-corrected Adam update in place and zero the adjoints.

    Raises:
        NonFiniteError: any adjoint holds NaN/Inf (parameters are left untouched)
    """
    for name in sorted(params):
        if not np.all(np.isfinite(params[name].adjoint)):
            raise NonFiniteError("Non-finite gradient", details={"parameter": name})

    b1, b2 = betas
    state.step += 1
    correction1 = 1.0 - b1**state.step
    correction2 = 1.0 - b2**state.step
    for name in sorted(params):
        param = params[name]
        grad = param.adjoint
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None or v is None:
            m = np.zeros_like(param.data)
            v = np.zeros_like(param.data)
        m = b1 * m + (1.0 - b1) * grad
        v = b2 * v + (1.0 - b2) * grad * grad
        state.m[name], state.v[name] = m, v
        m_hat = m / correction1
        v_hat = v / correction2
        param.data -= lr * m_hat / (np.sqrt(v_hat) + eps)
        param.zero_adjoint()
    return params


class Adam:
    """Stateful wrapper used by the trainer."""

    def __init__(
        self,
        params: Mapping[str, DiffValue],
        lr: float = ADAM_LR,
        betas: tuple[float, float] = ADAM_BETAS,
        eps: float = ADAM_EPS,
    ):
        self.params = params
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.state = AdamState()

    def step(self) -> None:
        adam_step(self.params, self.state, self.lr, self.betas, self.eps)

    def zero_grad(self) -> None:
        for param in self.params.values():
            param.zero_adjoint()
