"""Instruction lists over integer wires in the mixed-state circuit model."""

from __future__ import annotations

from typing import Dict, FrozenSet, Iterable, List, Literal, Optional, Sequence, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from channel_lab.errors import CircuitValidationError

GateKind = Literal[
    "X", "Z", "H", "T", "CNOT", "CZ", "SWAP", "CU",
    "ANCILLA", "TRACEOUT", "MEASURE", "DEPOL", "CDEPOL", "MIXU",
]

ONE_QUBIT_GATES = ("X", "Z", "H", "T")
TWO_QUBIT_GATES = ("CNOT", "CZ", "SWAP")
UNITARY_KINDS = frozenset(ONE_QUBIT_GATES + TWO_QUBIT_GATES + ("CU",))

ARITY: Dict[str, int] = {
    "X": 1,
    "Z": 1,
    "H": 1,
    "T": 1,
    "CNOT": 2,
    "CZ": 2,
    "SWAP": 2,
    "CU": 1,
    "ANCILLA": 1,
    "TRACEOUT": 1,
    "MEASURE": 1,
    "DEPOL": 1,
    "CDEPOL": 2,
    "MIXU": 0,
}


class Instruction(BaseModel):
    """One circuit step. ``CU`` and ``MIXU`` carry a unitary-only body."""

    model_config = ConfigDict(frozen=True)

    kind: GateKind
    wires: Tuple[int, ...] = ()
    body: Tuple["Instruction", ...] = ()

    @model_validator(mode="after")
    def _check_shape(self) -> "Instruction":
        expected = ARITY[self.kind]
        if len(self.wires) != expected:
            raise ValueError(f"{self.kind} takes {expected} wire(s), got {len(self.wires)}")
        if any(wire < 0 for wire in self.wires):
            raise ValueError(f"{self.kind} references a negative wire")
        if len(set(self.wires)) != len(self.wires):
            raise ValueError(f"{self.kind} repeats a wire in {self.wires}")
        if self.kind in ("CU", "MIXU"):
            if not self.body:
                raise ValueError(f"{self.kind} needs a nonempty body")
            if any(not inner.is_unitary for inner in self.body):
                raise ValueError(f"{self.kind} body must contain unitary gates only")
            if self.kind == "CU" and self.wires[0] in touched_wires(self.body):
                raise ValueError(f"control wire {self.wires[0]} is also a target")
        elif self.body:
            raise ValueError(f"{self.kind} does not take a body")
        return self

    @property
    def is_unitary(self) -> bool:
        return self.kind in UNITARY_KINDS


Instruction.model_rebuild()


def touched_wires(instructions: Iterable[Instruction] | Instruction) -> FrozenSet[int]:
    """Every wire an instruction (or list) acts on, bodies included."""

    if isinstance(instructions, Instruction):
        instructions = (instructions,)
    wires: Set[int] = set()
    stack: List[Instruction] = list(instructions)
    while stack:
        current = stack.pop()
        wires.update(current.wires)
        stack.extend(current.body)
    return frozenset(wires)


class WireSummary(BaseModel):
    """Wire bookkeeping gathered while walking an instruction list."""

    model_config = ConfigDict(frozen=True)

    live: Tuple[int, ...]
    ancillas: Tuple[int, ...]
    traced: Tuple[int, ...]
    peak: int
    wire_count: int


class WireTracker:
    """Enforces live-wire discipline instruction by instruction."""

    def __init__(self, n_inputs: int) -> None:
        self._live: Set[int] = set(range(n_inputs))
        self._seen: Set[int] = set(range(n_inputs))
        self._ancillas: List[int] = []
        self._traced: List[int] = []
        self._peak = n_inputs

    def visit(self, instruction: Instruction, index: Optional[int] = None) -> None:
        kind = instruction.kind
        if kind == "ANCILLA":
            wire = instruction.wires[0]
            if wire in self._seen:
                raise CircuitValidationError(f"ancilla wire {wire} is not fresh", index=index)
            self._seen.add(wire)
            self._live.add(wire)
            self._ancillas.append(wire)
            self._peak = max(self._peak, len(self._live))
            return
        for wire in touched_wires(instruction):
            if wire not in self._live:
                state = "traced out" if wire in self._seen else "undeclared"
                raise CircuitValidationError(f"wire {wire} is {state}", index=index)
        if kind == "TRACEOUT":
            wire = instruction.wires[0]
            self._live.discard(wire)
            self._traced.append(wire)

    def visit_all(self, instructions: Sequence[Instruction]) -> "WireTracker":
        for index, instruction in enumerate(instructions):
            self.visit(instruction, index)
        return self

    def summary(self) -> WireSummary:
        return WireSummary(
            live=tuple(sorted(self._live)),
            ancillas=tuple(self._ancillas),
            traced=tuple(self._traced),
            peak=self._peak,
            wire_count=len(self._seen),
        )


class Circuit(BaseModel):
    """Validated circuit: inputs are wires ``0..n_inputs-1``, outputs the live wires in ascending order."""

    model_config = ConfigDict(frozen=True)

    n_inputs: int = Field(ge=0)
    instructions: Tuple[Instruction, ...] = ()

    @model_validator(mode="after")
    def _check_wires(self) -> "Circuit":
        WireTracker(self.n_inputs).visit_all(self.instructions)
        return self

    def summary(self) -> WireSummary:
        return WireTracker(self.n_inputs).visit_all(self.instructions).summary()

    @property
    def input_wires(self) -> Tuple[int, ...]:
        return tuple(range(self.n_inputs))

    @property
    def output_wires(self) -> Tuple[int, ...]:
        return self.summary().live

    @property
    def is_unitary(self) -> bool:
        return all(instruction.is_unitary for instruction in self.instructions)
