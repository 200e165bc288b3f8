"""Circuit text format, metrics and structural transformations."""

from __future__ import annotations

import hashlib
import logging
import re
from typing import Dict, Iterable, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from channel_lab.errors import CircuitParseError, CircuitValidationError
from channel_lab.models.circuit import (
    ARITY,
    ONE_QUBIT_GATES,
    TWO_QUBIT_GATES,
    Circuit,
    Instruction,
    WireTracker,
    touched_wires,
)

LOGGER = logging.getLogger(__name__)

_TOKEN = re.compile(r"[{}]|[^\s{}]+")
_INTEGER = re.compile(r"\d+")

_STATEMENT_KINDS: Dict[str, str] = {
    "ancilla": "ANCILLA",
    "traceout": "TRACEOUT",
    "measure": "MEASURE",
    "depolarize": "DEPOL",
    "cdepol": "CDEPOL",
}
_KEYWORDS: Dict[str, str] = {kind: keyword for keyword, kind in _STATEMENT_KINDS.items()}


# ----- Instruction builders -----

def gate(kind: str, *wires: int) -> Instruction:
    return Instruction(kind=kind, wires=tuple(wires))


def controlled_block(control: int, body: Iterable[Instruction]) -> Instruction:
    return Instruction(kind="CU", wires=(control,), body=tuple(body))


def mixu_block(body: Iterable[Instruction]) -> Instruction:
    return Instruction(kind="MIXU", body=tuple(body))


def ancilla(wire: int) -> Instruction:
    return Instruction(kind="ANCILLA", wires=(wire,))


def traceout(wire: int) -> Instruction:
    return Instruction(kind="TRACEOUT", wires=(wire,))


class WireAllocator:
    """Hands out wire ids that no instruction has used yet."""

    def __init__(self, start: int) -> None:
        self._next = start

    @classmethod
    def after(cls, circuit: Circuit) -> "WireAllocator":
        used = touched_wires(circuit.instructions) | set(circuit.input_wires)
        return cls(max(used, default=-1) + 1)

    def fresh(self) -> int:
        wire = self._next
        self._next += 1
        return wire

    def take(self, count: int) -> List[int]:
        wires = list(range(self._next, self._next + count))
        self._next += count
        return wires


# ----- Text format -----

class _Token(NamedTuple):
    text: str
    line: int
    column: int


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0]
        for match in _TOKEN.finditer(content):
            tokens.append(_Token(match.group(0), number, match.start() + 1))
        tokens.append(_Token("\n", number, len(content) + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: List[_Token]) -> None:
        self._tokens = tokens
        self._pos = 0

    # ----- Token helpers -----

    def _peek(self) -> Optional[_Token]:
        return self._tokens[self._pos] if self._pos < len(self._tokens) else None

    def _next(self, expected: str) -> _Token:
        token = self._peek()
        if token is None:
            last = self._tokens[-1] if self._tokens else _Token("", 1, 1)
            raise CircuitParseError(f"unexpected end of input, expected {expected}", line=last.line, column=last.column)
        self._pos += 1
        return token

    def _skip_newlines(self) -> None:
        while (token := self._peek()) is not None and token.text == "\n":
            self._pos += 1

    def _integer(self, what: str) -> int:
        token = self._next(what)
        if not _INTEGER.fullmatch(token.text):
            shown = "end of line" if token.text == "\n" else repr(token.text)
            raise CircuitParseError(f"expected {what}, got {shown}", line=token.line, column=token.column)
        return int(token.text)

    def _end_statement(self) -> None:
        token = self._peek()
        if token is None or token.text == "}":
            return
        if token.text != "\n":
            raise CircuitParseError(f"unexpected token {token.text!r}", line=token.line, column=token.column)
        self._pos += 1

    @staticmethod
    def _build(token: _Token, **fields: object) -> Instruction:
        try:
            return Instruction(**fields)
        except ValidationError as exc:
            message = exc.errors()[0]["msg"].removeprefix("Value error, ")
            raise CircuitParseError(message, line=token.line, column=token.column) from exc

    # ----- Grammar -----

    def program(self) -> Circuit:
        self._skip_newlines()
        header = self._next("'qubits'")
        if header.text != "qubits":
            raise CircuitParseError("the first statement must be 'qubits <n>'", line=header.line, column=header.column)
        n_inputs = self._integer("an input count")
        self._end_statement()
        tracker = WireTracker(n_inputs)
        instructions: List[Instruction] = []
        while True:
            self._skip_newlines()
            token = self._peek()
            if token is None:
                break
            if token.text == "}":
                raise CircuitParseError("unmatched '}'", line=token.line, column=token.column)
            instruction = self._statement(in_block=False)
            try:
                tracker.visit(instruction, len(instructions))
            except CircuitValidationError as exc:
                raise CircuitParseError(exc.detail, line=token.line, column=token.column) from exc
            instructions.append(instruction)
        return Circuit(n_inputs=n_inputs, instructions=tuple(instructions))

    def _statement(self, *, in_block: bool) -> Instruction:
        token = self._next("a statement")
        keyword = token.text
        if keyword == "gate":
            name = self._next("a gate name")
            if name.text not in ONE_QUBIT_GATES + TWO_QUBIT_GATES:
                raise CircuitParseError(f"unknown gate {name.text!r}", line=name.line, column=name.column)
            wires = [self._integer("a wire index") for _ in range(ARITY[name.text])]
            instruction = self._build(token, kind=name.text, wires=tuple(wires))
        elif keyword == "cu":
            control = self._integer("a control wire")
            instruction = self._build(token, kind="CU", wires=(control,), body=self._block(token))
        elif keyword == "mixu" and not in_block:
            instruction = self._build(token, kind="MIXU", body=self._block(token))
        elif keyword in _STATEMENT_KINDS and not in_block:
            kind = _STATEMENT_KINDS[keyword]
            wires = [self._integer("a wire index") for _ in range(ARITY[kind])]
            instruction = self._build(token, kind=kind, wires=tuple(wires))
        elif keyword in _STATEMENT_KINDS or keyword == "mixu":
            raise CircuitParseError(f"{keyword!r} is not allowed inside a block", line=token.line, column=token.column)
        else:
            shown = "'{'" if keyword == "{" else repr(keyword)
            raise CircuitParseError(f"unknown statement {shown}", line=token.line, column=token.column)
        self._end_statement()
        return instruction

    def _block(self, opener: _Token) -> Tuple[Instruction, ...]:
        brace = self._next("'{'")
        if brace.text != "{":
            raise CircuitParseError("expected '{'", line=brace.line, column=brace.column)
        body: List[Instruction] = []
        while True:
            self._skip_newlines()
            token = self._peek()
            if token is None:
                raise CircuitParseError("unterminated block", line=opener.line, column=opener.column)
            if token.text == "}":
                self._pos += 1
                return tuple(body)
            body.append(self._statement(in_block=True))


def parse(text: str) -> Circuit:
    """Parse ``.qc`` text into a validated circuit."""

    return _Parser(_tokenize(text)).program()


def _emit(instruction: Instruction, indent: int, lines: List[str]) -> None:
    pad = "  " * indent
    kind = instruction.kind
    wires = " ".join(str(wire) for wire in instruction.wires)
    if kind in ONE_QUBIT_GATES or kind in TWO_QUBIT_GATES:
        lines.append(f"{pad}gate {kind} {wires}")
    elif kind in ("CU", "MIXU"):
        lines.append(f"{pad}cu {wires} {{" if kind == "CU" else f"{pad}mixu {{")
        for inner in instruction.body:
            _emit(inner, indent + 1, lines)
        lines.append(f"{pad}}}")
    else:
        lines.append(f"{pad}{_KEYWORDS[kind]} {wires}")


def serialize(circuit: Circuit) -> str:
    """Canonical text: execution order, single spaces, two-space block indent, trailing newline."""

    lines = [f"qubits {circuit.n_inputs}"]
    for instruction in circuit.instructions:
        _emit(instruction, 0, lines)
    return "\n".join(lines) + "\n"


def circuit_digest(circuit: Circuit) -> str:
    """SHA-256 of the canonical text."""

    return hashlib.sha256(serialize(circuit).encode("utf-8")).hexdigest()


# ----- Metrics -----

def depth(circuit: Circuit) -> int:
    """Longest chain of instructions linked by shared wires; every kind counts one layer."""

    return max(instruction_layers(circuit.instructions), default=0)


def instruction_layers(instructions: Sequence[Instruction]) -> List[int]:
    layers: Dict[int, int] = {}
    result: List[int] = []
    for instruction in instructions:
        wires = touched_wires(instruction)
        layer = 1 + max((layers.get(wire, 0) for wire in wires), default=0)
        for wire in wires:
            layers[wire] = layer
        result.append(layer)
    return result


def size(circuit: Circuit) -> int:
    """Maximum of the instruction count and the number of wires."""

    return max(len(circuit.instructions), circuit.summary().wire_count)


# ----- Relabelling and inversion -----

def relabel(instruction: Instruction, mapping: Mapping[int, int]) -> Instruction:
    return Instruction(
        kind=instruction.kind,
        wires=tuple(mapping.get(wire, wire) for wire in instruction.wires),
        body=tuple(relabel(inner, mapping) for inner in instruction.body),
    )


def relabel_all(instructions: Iterable[Instruction], mapping: Mapping[int, int]) -> List[Instruction]:
    return [relabel(instruction, mapping) for instruction in instructions]


def inverse_instructions(instructions: Sequence[Instruction]) -> List[Instruction]:
    """Inverse of a unitary instruction list (``T^dagger = Z T T T``)."""

    inverted: List[Instruction] = []
    for instruction in reversed(instructions):
        kind = instruction.kind
        if not instruction.is_unitary:
            raise ValueError(f"{kind} is not unitary and has no inverse")
        if kind == "T":
            wire = instruction.wires[0]
            inverted.extend([gate("Z", wire), gate("T", wire), gate("T", wire), gate("T", wire)])
        elif kind == "CU":
            inverted.append(controlled_block(instruction.wires[0], inverse_instructions(instruction.body)))
        else:
            inverted.append(instruction)
    return inverted


def inverse(circuit: Circuit) -> Circuit:
    if not circuit.is_unitary:
        raise ValueError("only unitary circuits can be inverted")
    return Circuit(n_inputs=circuit.n_inputs, instructions=tuple(inverse_instructions(circuit.instructions)))


def route(order: Sequence[int], targets: Sequence[int]) -> List[Instruction]:
    """SWAP gates moving the data held on wire ``order[i]`` onto wire ``targets[i]``."""

    if len(order) != len(targets) or len(set(order)) != len(order) or len(set(targets)) != len(targets):
        raise ValueError("routing needs two duplicate-free wire lists of equal length")
    location = {wire: wire for wire in set(order) | set(targets)}
    holder = dict(location)
    swaps: List[Instruction] = []
    for data, target in zip(order, targets):
        source = location[data]
        if source == target:
            continue
        displaced = holder[target]
        swaps.append(gate("SWAP", source, target))
        holder[target], holder[source] = data, displaced
        location[data], location[displaced] = target, source
    return swaps


def route_outputs(circuit: Circuit, order: Sequence[int]) -> Circuit:
    """Append SWAPs so that output wire ``order[i]`` ends on the i-th smallest output id."""

    outputs = circuit.output_wires
    if sorted(order) != list(outputs):
        raise ValueError("routing order must be a permutation of the output wires")
    swaps = route(order, outputs)
    return Circuit(n_inputs=circuit.n_inputs, instructions=circuit.instructions + tuple(swaps))


# ----- Normal forms -----

def to_stinespring_form(circuit: Circuit) -> Circuit:
    """Equivalent circuit with every ancilla first, unitary gates only, every trace last."""

    allocator = WireAllocator.after(circuit)
    ancillas: List[int] = []
    gates: List[Instruction] = []
    traced: List[int] = []
    for instruction in circuit.instructions:
        kind = instruction.kind
        if kind == "ANCILLA":
            ancillas.append(instruction.wires[0])
        elif kind == "TRACEOUT":
            traced.append(instruction.wires[0])
        elif instruction.is_unitary:
            gates.append(instruction)
        elif kind == "MEASURE":
            wire, copy = instruction.wires[0], allocator.fresh()
            ancillas.append(copy)
            gates.append(gate("CNOT", wire, copy))
            traced.append(copy)
        elif kind == "DEPOL":
            wire = instruction.wires[0]
            flip, phase = allocator.take(2)
            ancillas += [flip, phase]
            gates += [gate("H", flip), gate("H", phase), gate("CNOT", flip, wire), gate("CZ", phase, wire)]
            traced += [flip, phase]
        elif kind == "CDEPOL":
            control, target = instruction.wires
            flip, phase = allocator.take(2)
            ancillas += [flip, phase]
            gates += [
                gate("H", flip),
                gate("H", phase),
                controlled_block(control, [gate("CNOT", flip, target), gate("CZ", phase, target)]),
            ]
            traced += [flip, phase]
        elif kind == "MIXU":
            coin = allocator.fresh()
            ancillas.append(coin)
            gates += [gate("H", coin), controlled_block(coin, instruction.body)]
            traced.append(coin)
    instructions = [ancilla(wire) for wire in ancillas] + gates + [traceout(wire) for wire in traced]
    return Circuit(n_inputs=circuit.n_inputs, instructions=tuple(instructions))


def is_stinespring_form(circuit: Circuit) -> bool:
    phase = 0
    for instruction in circuit.instructions:
        rank = 0 if instruction.kind == "ANCILLA" else 2 if instruction.kind == "TRACEOUT" else 1
        if rank < phase or (rank == 1 and not instruction.is_unitary):
            return False
        phase = rank
    return True


class AlignedForm(BaseModel):
    """Stinespring normal form on wires ``0..width-1``.

    Inputs occupy ``0..n_inputs-1`` and ancillas the rest. After ``gates`` the
    output sits on ``0..n_outputs-1`` and the environment on the remaining wires.
    """

    model_config = ConfigDict(frozen=True)

    n_inputs: int
    n_outputs: int
    width: int
    gates: Tuple[Instruction, ...]

    @property
    def n_ancillas(self) -> int:
        return self.width - self.n_inputs

    @property
    def n_env(self) -> int:
        return self.width - self.n_outputs

    def placed(self, wires: Sequence[int]) -> List[Instruction]:
        """Gates relabelled so that aligned position ``p`` becomes ``wires[p]``."""

        if len(wires) != self.width:
            raise ValueError(f"need {self.width} wires, got {len(wires)}")
        return relabel_all(self.gates, dict(enumerate(wires)))

    def circuit(self) -> Circuit:
        instructions = (
            [ancilla(wire) for wire in range(self.n_inputs, self.width)]
            + list(self.gates)
            + [traceout(wire) for wire in range(self.n_outputs, self.width)]
        )
        return Circuit(n_inputs=self.n_inputs, instructions=tuple(instructions))


def aligned_form(circuit: Circuit, width: Optional[int] = None) -> AlignedForm:
    """Normal form relabelled to contiguous positions, optionally padded with idle ancillas."""

    normal = to_stinespring_form(circuit)
    summary = normal.summary()
    n_inputs = circuit.n_inputs
    mapping = {wire: wire for wire in range(n_inputs)}
    for offset, wire in enumerate(summary.ancillas):
        mapping[wire] = n_inputs + offset
    natural = n_inputs + len(summary.ancillas)
    width = natural if width is None else width
    if width < natural:
        raise ValueError(f"circuit needs {natural} wires, cannot align to {width}")
    gates = relabel_all((i for i in normal.instructions if i.is_unitary), mapping)
    order = [mapping[wire] for wire in summary.live] + [mapping[wire] for wire in summary.traced]
    order += list(range(natural, width))
    gates += route(order, list(range(width)))
    return AlignedForm(n_inputs=n_inputs, n_outputs=len(summary.live), width=width, gates=tuple(gates))


def align_pair(first: Circuit, second: Circuit) -> Tuple[AlignedForm, AlignedForm]:
    """Aligned forms of two circuits padded to a common width."""

    if first.n_inputs != second.n_inputs or len(first.output_wires) != len(second.output_wires):
        raise ValueError("circuits must agree in input and output size; pad the smaller one first")
    one, two = aligned_form(first), aligned_form(second)
    width = max(one.width, two.width)
    return aligned_form(first, width), aligned_form(second, width)


# ----- Padding and products -----

class Padding(NamedTuple):
    inputs: int
    outputs: int


def pad_circuit(circuit: Circuit, *, n_inputs: int, n_outputs: int) -> Tuple[Circuit, Padding]:
    """Add discarded input wires and fresh ``|0>`` output wires until the sizes match."""

    extra_inputs = n_inputs - circuit.n_inputs
    extra_outputs = n_outputs - len(circuit.output_wires)
    if extra_inputs < 0 or n_outputs < len(circuit.output_wires):
        raise ValueError("padding can only grow a circuit")
    if extra_inputs == 0 and extra_outputs == 0:
        return circuit, Padding(0, 0)
    shift = {
        wire: wire + extra_inputs
        for wire in touched_wires(circuit.instructions) | set(circuit.input_wires)
        if wire >= circuit.n_inputs
    }
    instructions = relabel_all(circuit.instructions, shift)
    instructions += [traceout(wire) for wire in range(circuit.n_inputs, n_inputs)]
    allocator = WireAllocator(max(list(shift.values()) + [n_inputs - 1]) + 1)
    zeros = allocator.take(extra_outputs)
    instructions += [ancilla(wire) for wire in zeros]
    padded = Circuit(n_inputs=n_inputs, instructions=tuple(instructions))
    return padded, Padding(extra_inputs, extra_outputs)


def pad_pair(first: Circuit, second: Circuit) -> Tuple[Circuit, Circuit, Dict[str, int]]:
    """Pad two circuits to common input and output sizes."""

    n_inputs = max(first.n_inputs, second.n_inputs)
    n_outputs = max(len(first.output_wires), len(second.output_wires))
    one, pad_one = pad_circuit(first, n_inputs=n_inputs, n_outputs=n_outputs)
    two, pad_two = pad_circuit(second, n_inputs=n_inputs, n_outputs=n_outputs)
    padding = {
        "q1_inputs": pad_one.inputs,
        "q1_outputs": pad_one.outputs,
        "q2_inputs": pad_two.inputs,
        "q2_outputs": pad_two.outputs,
    }
    return one, two, padding


def pad_to_square(circuit: Circuit) -> Tuple[Circuit, Padding]:
    """Pad so that the circuit has as many outputs as inputs."""

    n_in, n_out = circuit.n_inputs, len(circuit.output_wires)
    size_ = max(n_in, n_out)
    return pad_circuit(circuit, n_inputs=size_, n_outputs=size_)


def tensor_power(circuit: Circuit, copies: int) -> Circuit:
    """``copies`` parallel copies; copy ``j`` reads inputs ``j*n..`` and outputs are routed copy-major."""

    if copies < 1:
        raise ValueError(f"need at least one copy, got {copies}")
    if copies == 1:
        return circuit
    n = circuit.n_inputs
    internal = sorted(touched_wires(circuit.instructions) - set(range(n)))
    allocator = WireAllocator(copies * n)
    instructions: List[Instruction] = []
    outputs: List[int] = []
    for index in range(copies):
        mapping = {wire: index * n + wire for wire in range(n)}
        for wire in internal:
            mapping[wire] = allocator.fresh()
        instructions += relabel_all(circuit.instructions, mapping)
        outputs += [mapping[wire] for wire in circuit.output_wires]
    instructions += route(outputs, sorted(outputs))
    return Circuit(n_inputs=copies * n, instructions=tuple(instructions))


def random_circuit(
    rng: np.random.Generator,
    n_inputs: int,
    *,
    n_ancillas: int = 0,
    n_gates: int = 8,
    n_traced: int = 0,
) -> Circuit:
    """Random Clifford+T circuit already in Stinespring normal form."""

    width = n_inputs + n_ancillas
    if width < 1 or n_traced > width:
        raise ValueError(f"cannot trace {n_traced} of {width} wires")
    kinds = ONE_QUBIT_GATES + (TWO_QUBIT_GATES if width > 1 else ())
    gates: List[Instruction] = []
    for _ in range(n_gates):
        kind = kinds[int(rng.integers(len(kinds)))]
        wires = rng.choice(width, size=ARITY[kind], replace=False)
        gates.append(gate(kind, *(int(wire) for wire in wires)))
    traced = sorted(int(wire) for wire in rng.choice(width, size=n_traced, replace=False))
    instructions = (
        [ancilla(wire) for wire in range(n_inputs, width)] + gates + [traceout(wire) for wire in traced]
    )
    return Circuit(n_inputs=n_inputs, instructions=tuple(instructions))


def iter_gates(instructions: Iterable[Instruction]) -> Iterator[Instruction]:
    """Depth-first walk over instructions and their bodies."""

    for instruction in instructions:
        yield instruction
        yield from iter_gates(instruction.body)
