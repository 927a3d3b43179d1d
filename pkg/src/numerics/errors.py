from typing import Optional, Tuple


class ValidationError(ValueError):
    """A parameter failed validation. `field` names the offending parameter."""

    def __init__(self, field: str, message: str):
        super().__init__(f"invalid {field}: {message}")
        self.field = field


class NonFiniteFieldError(ArithmeticError):
    """A grid function holding NaN/Inf reached an operation that needs finite input."""

    def __init__(self, message: str, node: Optional[Tuple[int, int]] = None):
        if node is not None:
            message = f"{message} (first non-finite node {node})"
        super().__init__(message)
        self.node = node


class BoundaryDataError(ValueError):
    """A Dirichlet sampler produced a non-finite value."""

    def __init__(self, node: Tuple[int, int], t: float, value: float):
        super().__init__(
            f"non-finite boundary value {value!r} at node {node} for t={t!r}"
        )
        self.node = node
        self.t = t


class UnsupportedOperationError(RuntimeError):
    def __init__(self, *args):
        super().__init__(*args)
