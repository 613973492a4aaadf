"""Command-line front end: run suites, run Youden-J shot sweeps.

Suite and sweep documents are JSON.  Complex matrix entries are encoded as
[re, im] pairs; distributions are probability arrays in little-endian index
order.  Exit codes: 0 all cases passed, 1 some assertion failed, 2 parse or
validation failure, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import jsonschema
import numpy as np

from quassert.orchestrator import (
    Assertion,
    SuiteDefaults,
    SuiteValidationError,
    TestCase,
    TestSuite,
    format_report,
    report_to_dict,
    run_suite,
)
from quassert.protocols import RunConfig, protocol_for, run_protocol
from quassert.qcore import (
    ChoiMatrix,
    Circuit,
    DensityMatrix,
    GATE_NAMES,
    GateOp,
    OutcomeDistribution,
    circuit_to_choi,
)
from quassert.qmath import DegenerateInputError, NumericError
from quassert.simulator import DEFAULT_NOISE, DensityMatrixSimulator, NoiseModel, derive_seed
from quassert.stats import DegenerateTestError

DEFAULT_SHOT_GRID = (10, 30, 100, 300, 1000, 3000, 10000)
DEFAULT_TRIALS = 20
SWEEP_PASS_THRESHOLD = 0.05

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_INVALID = 2
EXIT_NUMERIC = 3

_COMPLEX_ENTRY = {
    "type": "array",
    "items": {"type": "number"},
    "minItems": 2,
    "maxItems": 2,
}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _COMPLEX_ENTRY}, "minItems": 1}
_GATE = {
    "type": "object",
    "required": ["gate", "qubits"],
    "additionalProperties": False,
    "properties": {
        "gate": {"type": "string", "enum": list(GATE_NAMES)},
        "qubits": {
            "type": "array",
            "items": {"type": "integer", "minimum": 0},
            "minItems": 1,
            "maxItems": 2,
        },
        "angle": {"type": "number"},
    },
}
_CIRCUIT = {"type": "array", "items": _GATE}
_NOISE = {
    "oneOf": [
        {"type": "null"},
        {"type": "string"},
        {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "depolarizing_1q": {"type": "number", "minimum": 0, "maximum": 1},
                "depolarizing_2q": {"type": "number", "minimum": 0, "maximum": 1},
                "amplitude_damping": {"type": "number", "minimum": 0, "maximum": 1},
                "readout_flip": {"type": "number", "minimum": 0, "maximum": 1},
            },
        },
    ]
}
_ASSERTION = {
    "type": "object",
    "required": ["type", "value"],
    "additionalProperties": False,
    "properties": {
        "type": {"enum": ["distribution", "state", "process", "process_ref"]},
        "value": {},
        "shots": {"type": "integer", "minimum": 1},
        "threshold": {"type": "number", "minimum": 0, "maximum": 1},
    },
}
_CASE = {
    "type": "object",
    "required": ["name", "circuit", "assertions"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "circuit": _CIRCUIT,
        "assertions": {"type": "array", "items": _ASSERTION, "minItems": 1},
    },
}

SUITE_SCHEMA = {
    "type": "object",
    "required": ["name", "n_qubits", "cases"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "n_qubits": {"type": "integer", "minimum": 1},
        "save_data": {"type": "boolean"},
        "defaults": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "shots": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "threshold": {"type": "number", "minimum": 0, "maximum": 1},
                "noise": _NOISE,
            },
        },
        "cases": {"type": "array", "items": _CASE, "minItems": 1},
    },
}

_SWEEP_CASE = {
    "type": "object",
    "required": ["name", "circuit", "assertion"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "circuit": _CIRCUIT,
        "assertion": _ASSERTION,
    },
}

SWEEP_SCHEMA = {
    "type": "object",
    "required": ["name", "n_qubits", "positive_case", "negative_case"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "n_qubits": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "shot_grid": {
            "type": "array",
            "items": {"type": "integer", "minimum": 1},
            "minItems": 1,
        },
        "trials_per_point": {"type": "integer", "minimum": 1},
        "noise": _NOISE,
        "positive_case": _SWEEP_CASE,
        "negative_case": _SWEEP_CASE,
    },
}


@dataclass(frozen=True)
class SweepConfig:
    """A correct/mutated subroutine pair swept over shot counts."""

    name: str
    n_qubits: int
    positive_case: TestCase
    negative_case: TestCase
    shot_grid: tuple[int, ...] = DEFAULT_SHOT_GRID
    trials_per_point: int = DEFAULT_TRIALS
    noise: NoiseModel | None = None
    seed: int = 0


def decode_noise(value, where: str = "noise") -> NoiseModel | None:
    if value is None:
        return None
    if isinstance(value, str):
        if value == "default":
            return DEFAULT_NOISE
        if value == "none":
            return None
        raise SuiteValidationError(
            f"{where}: unknown noise preset {value!r} (use 'default' or 'none')"
        )
    try:
        return NoiseModel(**value)
    except (TypeError, ValueError) as exc:
        raise SuiteValidationError(f"{where}: {exc}") from exc


def _decode_circuit(items: list, n_qubits: int, where: str) -> Circuit:
    ops = []
    for i, item in enumerate(items):
        try:
            ops.append(GateOp(item["gate"], tuple(item["qubits"]), item.get("angle")))
        except ValueError as exc:
            raise SuiteValidationError(f"{where}[{i}]: {exc}") from exc
    try:
        return Circuit(n_qubits, tuple(ops))
    except ValueError as exc:
        raise SuiteValidationError(f"{where}: {exc}") from exc


def _decode_matrix(value, where: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=np.float64)
    except ValueError as exc:
        raise SuiteValidationError(f"{where}: malformed matrix ({exc})") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise SuiteValidationError(
            f"{where}: expected a square matrix of [re, im] pairs, got shape {arr.shape}"
        )
    return arr[..., 0] + 1j * arr[..., 1]


def _decode_assertion(obj: dict, n_qubits: int, where: str) -> Assertion:
    kind = obj["type"]
    value = obj["value"]
    try:
        if kind == "distribution":
            expected = OutcomeDistribution(n_qubits, np.asarray(value, dtype=np.float64))
        elif kind == "state":
            expected = DensityMatrix(n_qubits, _decode_matrix(value, f"{where}.value"))
        elif kind == "process":
            expected = ChoiMatrix(n_qubits, _decode_matrix(value, f"{where}.value"))
        else:  # process_ref: convert the reference circuit at load time
            circ = _decode_circuit(value, n_qubits, f"{where}.value")
            expected = circuit_to_choi(circ)
    except SuiteValidationError:
        raise
    except (TypeError, ValueError) as exc:
        raise SuiteValidationError(f"{where}: {exc}") from exc
    return Assertion(expected=expected, shots=obj.get("shots"), threshold=obj.get("threshold"))


def _validated_document(path: str | Path, schema: dict) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SuiteValidationError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    try:
        jsonschema.validate(document, schema)
    except jsonschema.ValidationError as exc:
        raise SuiteValidationError(f"{path}: {exc.json_path}: {exc.message}") from exc
    return document


def load_suite(path: str | Path) -> TestSuite:
    """Parse and validate a suite document into a runnable TestSuite."""
    document = _validated_document(path, SUITE_SCHEMA)
    n_qubits = document["n_qubits"]
    raw_defaults = document.get("defaults", {})
    defaults = SuiteDefaults(
        shots=raw_defaults.get("shots", SuiteDefaults.shots),
        seed=raw_defaults.get("seed", SuiteDefaults.seed),
        threshold=raw_defaults.get("threshold", SuiteDefaults.threshold),
        noise=decode_noise(raw_defaults.get("noise"), "defaults.noise"),
    )
    cases = []
    for ci, raw_case in enumerate(document["cases"]):
        where = f"cases[{ci}]"
        subject = _decode_circuit(raw_case["circuit"], n_qubits, f"{where}.circuit")
        assertions = tuple(
            _decode_assertion(a, n_qubits, f"{where}.assertions[{ai}]")
            for ai, a in enumerate(raw_case["assertions"])
        )
        cases.append(TestCase(name=raw_case["name"], subject=subject, assertions=assertions))
    return TestSuite(
        name=document["name"],
        n_qubits=n_qubits,
        cases=tuple(cases),
        defaults=defaults,
        save_data=document.get("save_data", False),
    )


def load_sweep(path: str | Path) -> SweepConfig:
    """Parse and validate a sweep document."""
    document = _validated_document(path, SWEEP_SCHEMA)
    n_qubits = document["n_qubits"]

    def decode_case(key: str) -> TestCase:
        raw = document[key]
        subject = _decode_circuit(raw["circuit"], n_qubits, f"{key}.circuit")
        assertion = _decode_assertion(raw["assertion"], n_qubits, f"{key}.assertion")
        return TestCase(name=raw["name"], subject=subject, assertions=(assertion,))

    positive = decode_case("positive_case")
    negative = decode_case("negative_case")
    proto_pos = protocol_for(positive.assertions[0].expected)
    proto_neg = protocol_for(negative.assertions[0].expected)
    if proto_pos != proto_neg:
        raise SuiteValidationError(
            f"positive and negative cases use different assertion types "
            f"({proto_pos} vs {proto_neg})"
        )
    grid = tuple(document.get("shot_grid", DEFAULT_SHOT_GRID))
    if list(grid) != sorted(grid):
        raise SuiteValidationError("shot_grid must be ascending")
    return SweepConfig(
        name=document["name"],
        n_qubits=n_qubits,
        positive_case=positive,
        negative_case=negative,
        shot_grid=grid,
        trials_per_point=document.get("trials_per_point", DEFAULT_TRIALS),
        noise=decode_noise(document.get("noise"), "noise"),
        seed=document.get("seed", 0),
    )


def run_sweep(config: SweepConfig, rates: bool = False) -> tuple[str, str, float]:
    """Run the sweep; returns (csv text, protocol id, seconds per logical shot).

    alpha/beta are mean probabilities over trials for the positive/negative
    case; J = alpha - beta.  With ``rates``, two extra columns report the
    fraction of trials whose probability clears 0.05.
    """
    backend = DensityMatrixSimulator(noise=config.noise)
    protocol = protocol_for(config.positive_case.assertions[0].expected)

    header = "shots,alpha,beta,J"
    if rates:
        header += ",alpha_pass,beta_pass"
    lines = [header]
    wall = 0.0
    logical_shots = 0
    for shots in config.shot_grid:
        buckets: dict[str, list[float]] = {"pos": [], "neg": []}
        for trial in range(config.trials_per_point):
            for tag, case in (("pos", config.positive_case), ("neg", config.negative_case)):
                seed = derive_seed(config.seed, case.name, shots, trial)
                run_config = RunConfig(backend=backend, shots=shots, seed=seed)
                start = time.perf_counter()
                result = run_protocol(case.subject, case.assertions[0].expected, run_config)
                wall += time.perf_counter() - start
                logical_shots += shots
                buckets[tag].append(result.probability)
        alpha = float(np.mean(buckets["pos"]))
        beta = float(np.mean(buckets["neg"]))
        row = f"{shots},{alpha:.6f},{beta:.6f},{alpha - beta:.6f}"
        if rates:
            alpha_pass = float(np.mean([p >= SWEEP_PASS_THRESHOLD for p in buckets["pos"]]))
            beta_pass = float(np.mean([p >= SWEEP_PASS_THRESHOLD for p in buckets["neg"]]))
            row += f",{alpha_pass:.6f},{beta_pass:.6f}"
        lines.append(row)
    per_shot = wall / logical_shots if logical_shots else 0.0
    return "\n".join(lines) + "\n", protocol, per_shot


def cmd_run(args: argparse.Namespace) -> int:
    suite = load_suite(args.suite)
    defaults = suite.defaults
    if args.shots is not None:
        defaults = replace(defaults, shots=args.shots)
    if args.seed is not None:
        defaults = replace(defaults, seed=args.seed)
    if args.threshold is not None:
        defaults = replace(defaults, threshold=args.threshold)
    if args.noise is not None:
        defaults = replace(defaults, noise=_noise_from_flag(args.noise))
    save_data = suite.save_data or args.save_data is not None
    suite = replace(suite, defaults=defaults, save_data=save_data)

    report = run_suite(suite)
    sys.stdout.write(format_report(report, args.format))

    if args.save_data is not None:
        out_dir = Path(args.save_data)
        out_dir.mkdir(parents=True, exist_ok=True)
        payload = json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"
        (out_dir / "report.json").write_text(payload, encoding="utf-8")
    return EXIT_OK if report.all_passed else EXIT_FAILURES


def _noise_from_flag(flag: str) -> NoiseModel | None:
    if flag in ("default", "none"):
        return decode_noise(flag, "--noise")
    return decode_noise(json.loads(Path(flag).read_text(encoding="utf-8")), f"--noise {flag}")


def cmd_sweep(args: argparse.Namespace) -> int:
    config = load_sweep(args.sweep)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.trials is not None:
        config = replace(config, trials_per_point=args.trials)
    if args.noise is not None:
        config = replace(config, noise=_noise_from_flag(args.noise))

    csv_text, protocol, per_shot = run_sweep(config, rates=args.rates)
    sys.stdout.write(csv_text)
    if args.timing:
        print(
            f"timing: protocol={protocol} seconds_per_logical_shot={per_shot:.3e}",
            file=sys.stderr,
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quassert",
        description="Unit testing for quantum subroutines on an embedded density-matrix simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a test suite document")
    run_p.add_argument("suite", help="path to a suite JSON document")
    run_p.add_argument("--shots", type=int, help="override default shots")
    run_p.add_argument("--seed", type=int, help="override master seed")
    run_p.add_argument("--threshold", type=float, help="override confidence threshold")
    run_p.add_argument("--noise", help="noise preset name ('default'/'none') or JSON file")
    run_p.add_argument("--save-data", metavar="DIR", help="store the full report with artifacts")
    run_p.add_argument("--format", choices=("text", "json"), default="text")

    sweep_p = sub.add_parser("sweep", help="run a Youden-J shot sweep, CSV to stdout")
    sweep_p.add_argument("sweep", help="path to a sweep JSON document")
    sweep_p.add_argument("--seed", type=int, help="override master seed")
    sweep_p.add_argument("--trials", type=int, help="override trials per grid point")
    sweep_p.add_argument("--noise", help="noise preset name ('default'/'none') or JSON file")
    sweep_p.add_argument(
        "--rates", action="store_true", help="append pass-rate columns (threshold 0.05)"
    )
    sweep_p.add_argument(
        "--timing", action="store_true", help="report wall time per logical shot on stderr"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        return cmd_sweep(args)
    except (NumericError, DegenerateInputError, DegenerateTestError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SuiteValidationError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
