from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .terms import Ref, Term, context_label, term_to_json
from .trace import Event


class VerdictKind(enum.Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    context: Optional[Ref] = None
    step: Optional[int] = None
    event: Optional[Event] = None
    bindings: dict = field(default_factory=dict)
    # 0-based index of the deciding event in the monitored stream
    position: Optional[int] = None

    @property
    def terminal(self) -> bool:
        return self.kind is not VerdictKind.INCONCLUSIVE

    def to_json(self) -> dict:
        out: dict = {"verdict": self.kind.value}
        if self.context is not None:
            out["context"] = context_label(self.context)
        if self.step is not None:
            out["step"] = self.step
        if self.event is not None:
            out["event"] = self.event.to_json()
        if self.bindings:
            out["bindings"] = {k: term_to_json(v) for k, v in self.bindings.items()}
        if self.position is not None:
            out["position"] = self.position
        return out


SATISFIED = Verdict(VerdictKind.SATISFIED)
INCONCLUSIVE = Verdict(VerdictKind.INCONCLUSIVE)


def bindings_snapshot(b: dict) -> dict[str, Term]:
    return dict(sorted(b.items()))
