"""
Reverse-mode differentiation graph.

Operations run eagerly and are appended to a tape in execution order, which is
a topological order by construction. ``backward`` walks the tape in exact
reverse order. A graph can hold a ``program`` (a callable building the outputs
from named inputs) so ``forward`` can be replayed, e.g. by the gradient checker.

Example:
    graph = DiffGraph(parameters={"w": DiffValue(np.eye(2), name="w")})

    def program(g, inputs):
        return {"y": g.sum(g.tanh(g.matmul(g.param("w"), inputs["x"])))}

    graph.program = program
    graph.forward({"x": np.ones((2, 1))})
    grads = graph.backward("y")
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike

from salnet.autodiff import ops
from salnet.autodiff.value import Array, DiffValue
from salnet.shared.exceptions import (
    BackwardBeforeForwardError,
    GraphError,
    NonFiniteError,
    ShapeMismatchError,
)

Program = Callable[["DiffGraph", Dict[str, DiffValue]], Mapping[str, DiffValue]]
ValueLike = Union[DiffValue, ArrayLike]


@dataclass
class Node:
    """One executed operation."""

    index: int
    op: str
    name: str
    inputs: tuple[DiffValue, ...]
    output: DiffValue
    attrs: Dict[str, Any] = field(default_factory=dict)
    cache: Any = None
    grad_mask: tuple[bool, ...] = ()


class DiffGraph:
    """
    Parameter registry plus an operation tape.

    Args:
        parameters: Named trainable values (shared, not copied)
        program: Optional callable used by ``forward``
        rng_seed: Seed exposed to programs that need randomness
        record: When False, operations are evaluated without a tape (inference)
    """

    def __init__(
        self,
        parameters: Optional[Mapping[str, DiffValue]] = None,
        program: Optional[Program] = None,
        rng_seed: int = 0,
        record: bool = True,
    ):
        self.parameters: Dict[str, DiffValue] = dict(parameters or {})
        self.program = program
        self.rng_seed = int(rng_seed)
        self.record = record
        self.nodes: List[Node] = []
        self.inputs: Dict[str, DiffValue] = {}
        self.outputs: Dict[str, DiffValue] = {}
        self._requires_grad: set[int] = set()
        self._forwarded = False

    # ------------------------------------------------------------------
    # values
    # ------------------------------------------------------------------

    def param(self, name: str) -> DiffValue:
        """Look up a registered parameter and mark it trainable on the tape."""
        try:
            value = self.parameters[name]
        except KeyError as e:
            raise GraphError(f"Unknown parameter '{name}'", original_error=e) from e
        if self.record:
            self._requires_grad.add(id(value))
        return value

    def constant(self, data: ValueLike, name: Optional[str] = None) -> DiffValue:
        """Wrap data that takes no gradient."""
        if isinstance(data, DiffValue):
            return data
        return DiffValue(data, name=name)

    def input(self, data: ValueLike, name: str) -> DiffValue:
        """Register a named input whose adjoint is tracked."""
        value = data if isinstance(data, DiffValue) else DiffValue(data, name=name)
        self.inputs[name] = value
        if self.record:
            self._requires_grad.add(id(value))
        return value

    @property
    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.rng_seed)

    # ------------------------------------------------------------------
    # tape
    # ------------------------------------------------------------------

    def reset(self) -> None:
        """Drop the tape and cached outputs; parameters are untouched."""
        self.nodes.clear()
        self.inputs.clear()
        self.outputs.clear()
        self._requires_grad = set()
        self._forwarded = False
        if self.record:
            # Parameters stay trainable across replays.
            self._requires_grad.update(id(p) for p in self.parameters.values())

    def apply(self, op: str, inputs: Sequence[DiffValue], name: Optional[str] = None, **attrs: Any) -> DiffValue:
        """Run one operation and record it."""
        node_name = name or f"{op}#{len(self.nodes)}"
        rule = ops.FORWARD[op]
        try:
            data, cache = rule([v.data for v in inputs], **attrs)
        except ShapeMismatchError as e:
            raise ShapeMismatchError(e.message, node=node_name, details=e.details, original_error=e) from e
        if not np.all(np.isfinite(data)):
            raise NonFiniteError("Non-finite value in node output", details={"node": node_name, "op": op})

        output = DiffValue(data, name=node_name)
        if self.record:
            grad_mask = tuple(id(v) in self._requires_grad for v in inputs)
            if any(grad_mask):
                self._requires_grad.add(id(output))
                self.nodes.append(
                    Node(
                        index=len(self.nodes),
                        op=op,
                        name=node_name,
                        inputs=tuple(inputs),
                        output=output,
                        attrs=attrs,
                        cache=cache,
                        grad_mask=grad_mask,
                    )
                )
        return output

    def forward(
        self,
        inputs: Mapping[str, ValueLike],
        program: Optional[Program] = None,
    ) -> Dict[str, DiffValue]:
        """
        Run the program on named inputs, caching every node for backward.

        Raises:
            GraphError: No program is set
            ShapeMismatchError: An operation rejected its operands (node named)
            NonFiniteError: A node produced NaN/Inf
        """
        program = program or self.program
        if program is None:
            raise GraphError("DiffGraph.forward needs a program")
        self.reset()
        named = {key: self.input(value, key) for key, value in inputs.items()}
        outputs = dict(program(self, named))
        for key, value in outputs.items():
            if not np.all(np.isfinite(value.data)):
                raise NonFiniteError("Non-finite graph output", details={"output": key})
        self.outputs = outputs
        self._forwarded = True
        return outputs

    def mark_forwarded(self, outputs: Mapping[str, DiffValue]) -> None:
        """Register outputs built by calling operations directly on the graph."""
        self.outputs = dict(outputs)
        self._forwarded = True

    def backward(self, output: str, seed_adjoint: Optional[ValueLike] = None) -> Dict[str, Array]:
        """
        Propagate ``seed_adjoint`` from a named output to every parameter.

        Parameter adjoints accumulate across calls until zeroed (the optimizer
        does this after each step). Intermediate and input adjoints are reset at
        the start of each call.

        Returns:
            Mapping parameter name -> adjoint array
        """
        return self.backward_many({output: seed_adjoint})

    def backward_many(self, seeds: Mapping[str, Optional[ValueLike]]) -> Dict[str, Array]:
        """
        Seed several named outputs at once and run a single reverse sweep.

        Seeds are applied in key order; ``None`` seeds with ones.
        """
        if not self._forwarded or not self.record:
            raise BackwardBeforeForwardError("backward called before a recorded forward pass")

        seeded: List[tuple[DiffValue, Array]] = []
        for output, seed_adjoint in seeds.items():
            try:
                target = self.outputs[output]
            except KeyError as e:
                raise GraphError(f"Unknown output '{output}'", original_error=e) from e
            seed = np.ones_like(target.data) if seed_adjoint is None else np.asarray(
                seed_adjoint.data if isinstance(seed_adjoint, DiffValue) else seed_adjoint,
                dtype=np.float64,
            )
            if seed.shape != target.shape:
                raise ShapeMismatchError(
                    "seed adjoint shape differs from output shape",
                    node=output,
                    details={"seed": seed.shape, "output": target.shape},
                )
            seeded.append((target, seed))

        parameter_ids = {id(p) for p in self.parameters.values()}
        for node in self.nodes:
            node.output.zero_adjoint()
        for value in self.inputs.values():
            if id(value) not in parameter_ids:
                value.zero_adjoint()

        live = [(target, seed) for target, seed in seeded if id(target) in self._requires_grad]
        if not live:
            return {name: p.adjoint for name, p in self.parameters.items()}

        for target, seed in live:
            target.accumulate(seed)
        for node in reversed(self.nodes):
            if not node.output.has_adjoint():
                continue
            grads = ops.BACKWARD[node.op](
                node.output.adjoint,
                [v.data for v in node.inputs],
                node.output.data,
                node.cache,
                **node.attrs,
            )
            for value, grad, needed in zip(node.inputs, grads, node.grad_mask):
                if needed and grad is not None:
                    value.accumulate(grad)

        return {name: p.adjoint for name, p in self.parameters.items()}

    def input_adjoint(self, name: str) -> Array:
        """Adjoint of a named forward input after ``backward``."""
        return self.inputs[name].adjoint

    def zero_grad(self) -> None:
        for value in self.parameters.values():
            value.zero_adjoint()

    # ------------------------------------------------------------------
    # operations
    # ------------------------------------------------------------------

    def conv2d(
        self,
        x: DiffValue,
        weight: DiffValue,
        bias: Optional[DiffValue] = None,
        stride: int = 1,
        padding: Any = "same",
        name: Optional[str] = None,
    ) -> DiffValue:
        inputs = (x, weight) if bias is None else (x, weight, bias)
        return self.apply("conv2d", inputs, name=name, stride=stride, padding=padding)

    def max_pool2x2(self, x: DiffValue, name: Optional[str] = None) -> DiffValue:
        return self.apply("max_pool2x2", (x,), name=name)

    def relu(self, x: DiffValue, name: Optional[str] = None) -> DiffValue:
        return self.apply("relu", (x,), name=name)

    def tanh(self, x: DiffValue, name: Optional[str] = None) -> DiffValue:
        return self.apply("tanh", (x,), name=name)

    def sigmoid(self, x: DiffValue, name: Optional[str] = None) -> DiffValue:
        return self.apply("sigmoid", (x,), name=name)

    def add(self, a: DiffValue, b: DiffValue, name: Optional[str] = None) -> DiffValue:
        return self.apply("add", (a, b), name=name)

    def sub(self, a: DiffValue, b: DiffValue, name: Optional[str] = None) -> DiffValue:
        return self.add(a, self.scale(b, -1.0), name=name)

    def scale(self, x: DiffValue, factor: Any, name: Optional[str] = None) -> DiffValue:
        if not np.isscalar(factor):
            factor = np.asarray(factor, dtype=np.float64)
        return self.apply("scale", (x,), name=name, factor=factor)

    def matmul(self, a: DiffValue, b: DiffValue, name: Optional[str] = None) -> DiffValue:
        return self.apply("matmul", (a, b), name=name)

    def outer(self, x: DiffValue, name: Optional[str] = None) -> DiffValue:
        return self.apply("outer", (x,), name=name)

    def reshape(self, x: DiffValue, shape: Sequence[int], name: Optional[str] = None) -> DiffValue:
        return self.apply("reshape", (x,), name=name, shape=tuple(int(s) for s in shape))

    def flatten(self, x: DiffValue, start_axis: int = 1, name: Optional[str] = None) -> DiffValue:
        shape = x.shape[:start_axis] + (int(np.prod(x.shape[start_axis:], dtype=np.int64)),)
        return self.reshape(x, shape, name=name)

    def concatenate(self, values: Sequence[DiffValue], axis: int = 0, name: Optional[str] = None) -> DiffValue:
        return self.apply("concatenate", tuple(values), name=name, axis=axis)

    def sum(self, x: DiffValue, name: Optional[str] = None) -> DiffValue:
        return self.apply("sum", (x,), name=name)

    def mean_square(self, x: DiffValue, name: Optional[str] = None) -> DiffValue:
        return self.apply("mean_square", (x,), name=name)
