"""``reduce``: build a reduction's circuits, write them out and report its predicted relation."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from channel_lab.commands import Command
from channel_lab.commands.inputs import Timings, add_optimizer_flags, build_report, load_pair, optimizer_config
from channel_lab.models.circuit import Circuit
from channel_lab.models.reports import JsonReport, OptimizerConfig, ReductionReport
from channel_lab.services.amplification import direct_product, measure_amplification, polarize, xor_mix
from channel_lab.services.circuits import parse, serialize
from channel_lab.services.close_images import (
    ci_to_logdepth,
    ci_to_qcd,
    measure_ci_to_logdepth,
    measure_ci_to_qcd,
    measure_qip_to_close_images,
    qip_to_close_images,
)
from channel_lab.services.degradable import embed, embedding_circuits, measure_embedding
from channel_lab.services.mixed_unitary import (
    measure_mixed_unitary_circuit,
    mixed_unitary_circuit,
    mixed_unitary_pair,
    structured_distance_bracket,
)
from channel_lab.utils.jsonio import canonical_json

LOGGER = logging.getLogger(__name__)

KINDS = (
    "product",
    "xor",
    "polarize",
    "qip2ci",
    "ci2logdepth",
    "ci2qcd",
    "degradable",
    "antidegradable",
    "mixed-unitary",
)

Artifacts = Dict[str, Circuit]


def configure(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--circuit", required=True, help="first input circuit file")
    parser.add_argument("--circuit2", help="second input circuit file")
    parser.add_argument("--r", type=int, default=2, help="copies for product and xor")
    parser.add_argument("--n", type=int, default=1, help="target exponent for polarize")
    parser.add_argument("--a", type=float, help="yes-instance threshold for polarize")
    parser.add_argument("--b", type=float, help="no-instance threshold for polarize")
    parser.add_argument("--anc", type=int, default=0, help="extra ancilla qubits for mixed-unitary")
    parser.add_argument("--private", type=int, default=1, help="private verifier wires for qip2ci (the first holds the flag)")
    parser.add_argument("--out-dir", required=True, help="directory for circuits and the reduction report")
    parser.add_argument("--verify", action="store_true", help="fill the measured block with seeded estimates")
    add_optimizer_flags(parser)


def _pair(second: Optional[Circuit], kind: str) -> Circuit:
    if second is None:
        raise ValueError(f"--kind {kind} needs --circuit2")
    return second


def _build(args: argparse.Namespace, first: Circuit, second: Optional[Circuit], cfg: OptimizerConfig) -> Tuple[Artifacts, ReductionReport]:
    kind = args.kind
    if kind in ("product", "xor", "polarize"):
        other = _pair(second, kind)
        if kind == "product":
            c1, c2, report = direct_product(first, other, args.r)
        elif kind == "xor":
            c1, c2, report = xor_mix(first, other, args.r)
        else:
            if args.a is None or args.b is None:
                raise ValueError("--kind polarize needs --a and --b")
            c1, c2, report = polarize(first, other, args.n, args.a, args.b)
        if args.verify:
            report = measure_amplification(report, first, other, c1, c2, cfg)
        return {"c1": c1, "c2": c2}, report

    if kind == "qip2ci":
        other = _pair(second, kind)
        width = first.n_inputs
        if not 1 <= args.private <= width:
            raise ValueError(f"--private must lie in 1..{width}")
        spaces = (list(range(args.private)), list(range(args.private, width)))
        q1, q2, report = qip_to_close_images(first, other, spaces)
        if args.verify:
            report = measure_qip_to_close_images(report, q1, q2, cfg)
        return {"q1": q1, "q2": q2}, report

    if kind == "ci2logdepth":
        other = _pair(second, kind)
        c1, c2, report = ci_to_logdepth(first, other)
        if args.verify:
            report = measure_ci_to_logdepth(report, first, other, c1, c2, cfg)
        return {"c1": c1, "c2": c2}, report

    if kind == "ci2qcd":
        other = _pair(second, kind)
        c1, c2, report = ci_to_qcd(first, other)
        if args.verify:
            report = measure_ci_to_qcd(report, first, other, c1, c2, cfg)
        return {"c1": c1, "c2": c2}, report

    if kind in ("degradable", "antidegradable"):
        antidegradable = kind == "antidegradable"
        c, helper, report = embed(first, antidegradable=antidegradable)
        artifacts: Artifacts = {"c": c, "antidegrader" if antidegradable else "degrader": helper}
        if second is not None:
            artifacts["c2"], _ = embedding_circuits(second, antidegradable=antidegradable)
        if args.verify:
            report = measure_embedding(report, first, second if second is not None else first, cfg)
        return artifacts, report

    if second is None:
        c, report = mixed_unitary_circuit(first, args.anc)
        if args.verify:
            report = measure_mixed_unitary_circuit(report, first, c, cfg)
        return {"c": c}, report
    c1, c2, report = mixed_unitary_pair(first, second, args.anc)
    if args.verify:
        report = structured_distance_bracket(report, first, second, c1, c2, cfg)
    return {"c1": c1, "c2": c2}, report


def _write(out_dir: Path, artifacts: Artifacts, report: ReductionReport) -> List[str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, circuit in artifacts.items():
        text = serialize(circuit)
        parse(text)
        path = out_dir / f"{name}.qc"
        path.write_text(text, encoding="utf-8")
        written.append(str(path))
    (out_dir / "report.json").write_text(canonical_json(report) + "\n", encoding="utf-8")
    return written


def handle(args: argparse.Namespace) -> Tuple[JsonReport, int]:
    first, second, inputs = load_pair(args)
    cfg = optimizer_config(args)
    timings = Timings()
    with timings.phase("build"):
        artifacts, report = _build(args, first, second, cfg)
    files = _write(Path(args.out_dir), artifacts, report)
    LOGGER.info("reduce %s: wrote %d circuits to %s", args.kind, len(files), args.out_dir)
    parameters = {"kind": args.kind, "verify": args.verify}
    result = build_report(
        "reduce",
        args,
        inputs=inputs,
        parameters=parameters,
        results={"report": report, "circuits": sorted(artifacts)},
        timings_ms=dict(timings),
    )
    return result, 0


command = Command(name="reduce", help="apply a reduction and write its circuits", configure=configure, handler=handle)
