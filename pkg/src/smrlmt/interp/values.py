"""Runtime values that only exist while a relation is evaluated."""

from __future__ import annotations

from dataclasses import dataclass

from ..distance import page_equal
from ..model import Action, InputSequence, OutputSequence, Page


class EvalError(RuntimeError):
    pass


class ProviderError(LookupError):
    pass


@dataclass(frozen=True)
class ActionRef:
    """An action together with the sequence it belongs to and its 1-based position."""

    sequence: InputSequence
    position: int

    @property
    def action(self) -> Action:
        return self.sequence.actions[self.position - 1]

    def preceding(self) -> tuple[Action, ...]:
        return self.sequence.actions[: self.position - 1]


@dataclass(frozen=True)
class ParamRef:
    name: str
    value: str
    position: int


def as_action(v) -> Action:
    if isinstance(v, ActionRef):
        return v.action
    if isinstance(v, Action):
        return v
    raise EvalError(f"expected an action, got {type(v).__name__}")


def action_refs(seq: InputSequence) -> list[ActionRef]:
    return [ActionRef(seq, i) for i in range(1, len(seq) + 1)]


def param_refs(action: Action) -> list[ParamRef]:
    return [ParamRef(n, v, i) for i, (n, v) in enumerate(action.parameters, start=1)]


def values_equal(a, b, threshold: float) -> bool:
    """Equality as seen by EQUAL and ``==``: pages compare by edit distance."""
    if isinstance(a, Page) and isinstance(b, Page):
        return page_equal(a.body, b.body, threshold)
    if isinstance(a, OutputSequence) and isinstance(b, OutputSequence):
        return len(a) == len(b) and all(page_equal(p.body, q.body, threshold) for p, q in zip(a.pages, b.pages))
    if isinstance(a, ActionRef):
        a = a.action
    if isinstance(b, ActionRef):
        b = b.action
    if isinstance(a, bool) or isinstance(b, bool):
        return type(a) is type(b) and a == b
    return a == b
