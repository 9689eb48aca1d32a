"""Command-line front end.

Every subcommand is a function from a parameter dict to either a JSON-able
dict or a CSV table, so the same handlers serve ``argparse`` and JSON
manifests (``cssqec run manifest.json``).

Exit codes: 0 ok, 1 a check or invariant failed, 2 bad arguments,
3 size limit exceeded, 4 construction failed, 5 manifest rejected.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
from dataclasses import dataclass
from typing import Callable

import jsonschema
import numpy as np

from . import bounds, channels, codec, codes, qstate, reproduce
from .exceptions import CapabilityError, ConstructionError, UsageError
from .gf2 import BinaryMatrix, BitWord

log = logging.getLogger("cssqec")

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_CAPABILITY, EXIT_CONSTRUCTION, EXIT_MANIFEST = range(6)


@dataclass
class Table:
    header: list[str]
    rows: list[list]

    def render(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.header) + "\n")
        for row in self.rows:
            buf.write(",".join(_cell(v) for v in row) + "\n")
        return buf.getvalue()


@dataclass
class Text:
    body: str
    ok: bool = True

    def render(self) -> str:
        return self.body


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    raise TypeError(type(v).__name__)


def render(result) -> str:
    if isinstance(result, (Table, Text)):
        return result.render()
    return json.dumps(result, indent=2, sort_keys=True, default=_json_default) + "\n"


# -- parameter parsing ---------------------------------------------------------------


def _code(params: dict) -> codes.LinearCode:
    if params.get("generator"):
        return codes.LinearCode(BinaryMatrix.from_strings(_words(params["generator"])), name="custom")
    if params.get("checks"):
        return codes.LinearCode.from_checks(BinaryMatrix.from_strings(_words(params["checks"])), name="custom")
    return codes.get_code(params.get("code") or "hamming7")


def _css(params: dict) -> codes.CssTriple:
    if params.get("c_plus"):
        c_plus = codes.LinearCode(BinaryMatrix.from_strings(_words(params["c_plus"])))
        return codes.build_css(c_plus, BinaryMatrix.from_strings(_words(params["extra"])), "custom")
    return codes.get_css(params.get("css") or "seven")


def _words(v) -> list[str]:
    return v.split(",") if isinstance(v, str) else list(v)


def _complexes(v) -> list[complex]:
    items = v.split(",") if isinstance(v, str) else v
    try:
        return [complex(x) if not isinstance(x, list) else complex(*x) for x in items]
    except ValueError as exc:
        raise UsageError(f"bad complex number list {v!r}") from exc


def _floats(v) -> list[float]:
    items = v.split(",") if isinstance(v, str) else v
    return [float(x) for x in items]


def _ints(v) -> list[int]:
    if v in (None, ""):
        return []
    items = v.split(",") if isinstance(v, str) else v
    return [int(x) for x in items]


def _grid(v) -> np.ndarray:
    """``start:stop:count`` (inclusive) or a comma list."""
    if isinstance(v, str) and ":" in v:
        parts = v.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid {v!r} is not start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise UsageError("grid count must be positive")
        return np.linspace(start, stop, count)
    return np.array(_floats(v))


def _seed(params: dict) -> int:
    if params.get("seed") is None:
        raise UsageError("this command is stochastic and needs --seed")
    return int(params["seed"])


# -- handlers ------------------------------------------------------------------------


def code_inspect(p):
    return _code(p).to_dict()


def code_dual(p):
    return codes.dual(_code(p)).to_dict()


def code_distance(p):
    c = _code(p)
    return {"n": c.n, "k": c.k, "d": c.d}


def code_css(p):
    return _css(p).to_dict()


def code_search(p):
    found = codes.search_weakly_self_dual(
        int(p["n"]), int(p.get("K", 1)), int(p["d_target"]), _seed(p), int(p.get("max_attempts") or 100_000)
    )
    return {"found": found is not None, "triple": found.to_dict() if found else None}


def _state_for(p) -> qstate.QuantumState:
    c = _code(p)
    offset = BitWord.from_str(p["offset"]) if p.get("offset") else None
    phases = _floats(p["phases"]) if p.get("phases") else None
    if phases is not None:
        if offset is not None:
            raise UsageError("give either phases or an offset, not both")
        return qstate.state_from_generator(qstate.PhasedGenerator(c.generator, phases))
    return qstate.code_state(c.generator, offset)


def state_dump(p):
    return Text(qstate.dump_csv(_state_for(p)))


def state_support(p):
    words = sorted(str(w) for w in qstate.support_in_basis2(_state_for(p)))
    return {"basis": 2, "count": len(words), "words": words}


def codec_encode(p):
    block = codec.encode(_css(p), _complexes(p.get("logical") or "1,0"))
    return Text(qstate.dump_csv(block.state))


def codec_correct(p):
    """Encode, flip the listed qubits in the chosen basis, correct both bases."""
    css = _css(p)
    style = p.get("style") or "in-place"
    block = codec.encode(css, _complexes(p.get("logical") or "1,0"), n_anc=codec.ancilla_count(css, style))
    mask = BitWord.from_positions(css.n, _ints(p.get("flips")))
    basis = int(p.get("basis") or 1)
    if basis == 1:
        damaged = qstate.complement_qubits(block.state, mask)
    elif basis == 2:
        damaged = qstate.complement_qubits_basis2(block.state, mask)
    else:
        raise UsageError("basis must be 1 or 2")
    circ = codec.full_corrector(css, style)
    branches = codec.simulate(circ, damaged)
    rho = codec.branch_density(branches)
    target = block.ideal()
    return {
        "fidelity": float(np.vdot(target, rho @ target).real),
        "purity": qstate.purity(rho),
        "syndromes": [
            {"basis": o.basis, "syndrome": str(o.syndrome), "correction": str(o.correction), "probability": o.probability}
            for b in branches for o in codec.outcomes(circ, b)
        ],
    }


def codec_theorem6(p):
    css = _css(p)
    seed = _seed(p)
    qubits = _ints(p.get("qubits"))
    if p.get("p") is not None:
        spec = channels.sample_stochastic_defection(css.n, float(p["p"]), seed)
    else:
        spec = channels.DefectionSpec.random(qubits, seed)
    mode = p.get("mode") or "branch"
    r = codec.run_recovery(css, _complexes(p.get("logical") or "1,0"), spec, p.get("style") or "in-place", mode, seed)
    return {**r.to_dict(), "qubits": list(spec.qubits), "seed": seed}


def codec_alpha_sweep(p):
    scheme = p.get("scheme") or "n3-phase"
    a, b = _complexes(p.get("logical") or "0.6,0.8")
    rows = []
    for eps in _grid(p.get("eps_grid") or "0.1:1.0:10"):
        if scheme == "n3-phase":
            phis = _floats(p.get("phis") or "1.0,1.3,0.7")
            alpha = codec.run_phase_error_experiment(*phis, eps, a, b).alpha
            closed = codec.phase_alpha_closed_form(phis, eps)
        elif scheme == "n3-entangle":
            alpha = codec.run_purity_amplification(eps, eps, eps, a, b).alpha
            closed = codec.entangle_alpha_closed_form([eps] * 3)
        else:
            raise UsageError(f"unknown scheme {scheme!r}")
        rows.append([eps, alpha.real, alpha.imag, complex(closed).real, complex(closed).imag, abs(alpha - closed)])
    return Table(["eps", "alpha_re", "alpha_im", "closed_re", "closed_im", "abs_diff"], rows)


def bounds_curves(p):
    rows = bounds.emit_rate_curves(_grid(p.get("grid") or "0.01:0.49:49"))
    return Table(["d_over_n", "upper", "lower", "classical"], [list(r) for r in rows])


def bounds_survival(p):
    return bounds.survival(int(p["n"]), float(p["p"]), int(p["d"]), int(p.get("T") or 1)).to_dict()


def bounds_threshold(p):
    lo, hi = bounds.threshold_summary()
    return {"inverse_entropy_half": hi, "p_guaranteed": lo, "p_impossible": hi}


def run_reproduce(p):
    numbers = _ints(p.get("check")) or [num for num, _, _ in reproduce.CHECKS]
    results = [reproduce.run_check(n) for n in numbers]
    body = "\n".join(r.line() for r in results)
    passed = sum(r.passed for r in results)
    return Text(f"{body}\n{passed}/{len(results)} passed\n", ok=passed == len(results))


HANDLERS: dict[str, Callable[[dict], object]] = {
    "code.inspect": code_inspect,
    "code.dual": code_dual,
    "code.distance": code_distance,
    "code.css": code_css,
    "code.search": code_search,
    "state.dump": state_dump,
    "state.support": state_support,
    "codec.encode": codec_encode,
    "codec.correct": codec_correct,
    "codec.theorem6": codec_theorem6,
    "codec.alpha-sweep": codec_alpha_sweep,
    "bounds.curves": bounds_curves,
    "bounds.survival": bounds_survival,
    "bounds.threshold": bounds_threshold,
    "reproduce": run_reproduce,
}

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["command"],
    "additionalProperties": False,
    "properties": {
        "command": {"enum": sorted(HANDLERS)},
        "params": {"type": "object"},
        "seed": {"type": ["integer", "null"]},
        "output": {"type": ["string", "null"]},
    },
}


# -- argparse ------------------------------------------------------------------------


def _add_code_args(sp):
    sp.add_argument("--code", help="zoo name (repetition3, even_parity3, hamming7, simplex7, fullN)")
    sp.add_argument("--generator", help="comma-separated generator rows")
    sp.add_argument("--checks", help="comma-separated parity-check rows")


def _add_css_args(sp):
    sp.add_argument("--css", help="seven or n3")
    sp.add_argument("--c-plus", dest="c_plus", help="comma-separated generator rows of the larger code")
    sp.add_argument("--extra", help="comma-separated extra check rows")
    sp.add_argument("--logical", help="logical amplitudes, e.g. 0.6,0.8j")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cssqec", description=__doc__.splitlines()[0])
    ap.add_argument("--output", "-o", help="write the result here instead of stdout")
    sub = ap.add_subparsers(dest="group", required=True)

    g = sub.add_parser("code").add_subparsers(dest="action", required=True)
    for name in ("inspect", "dual", "distance"):
        _add_code_args(g.add_parser(name))
    _add_css_args(g.add_parser("css"))
    sp = g.add_parser("search")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--K", type=int, default=1)
    sp.add_argument("--d-target", dest="d_target", type=int, required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--max-attempts", dest="max_attempts", type=int)

    g = sub.add_parser("state").add_subparsers(dest="action", required=True)
    for name in ("dump", "support"):
        sp = g.add_parser(name)
        _add_code_args(sp)
        sp.add_argument("--offset")
        sp.add_argument("--phases", help="one angle per generator row")

    g = sub.add_parser("codec").add_subparsers(dest="action", required=True)
    _add_css_args(g.add_parser("encode"))
    sp = g.add_parser("correct")
    _add_css_args(sp)
    sp.add_argument("--flips", help="comma-separated qubit positions")
    sp.add_argument("--basis", type=int, choices=(1, 2), default=1)
    sp.add_argument("--style", choices=("in-place", "ancilla"))
    sp = g.add_parser("theorem6")
    _add_css_args(sp)
    sp.add_argument("--qubits", help="defecting qubits")
    sp.add_argument("--p", type=float, help="sample the defecting set with this probability instead")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--style", choices=("in-place", "ancilla"))
    sp.add_argument("--mode", choices=("branch", "sample"))
    sp = g.add_parser("alpha-sweep")
    sp.add_argument("--scheme", choices=("n3-phase", "n3-entangle"), default="n3-phase")
    sp.add_argument("--eps-grid", dest="eps_grid", default="0.1:1.0:10")
    sp.add_argument("--phis", help="three angles for the phase scheme")
    sp.add_argument("--logical")

    g = sub.add_parser("bounds").add_subparsers(dest="action", required=True)
    g.add_parser("curves").add_argument("--grid", default="0.01:0.49:49")
    sp = g.add_parser("survival")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--T", type=int, default=1)
    g.add_parser("threshold")

    sp = sub.add_parser("reproduce")
    sp.add_argument("--all", action="store_true", help="run every check (the default)")
    sp.add_argument("--check", help="comma-separated check numbers")

    sub.add_parser("run").add_argument("manifest")
    return ap


def load_manifest(path: str) -> dict:
    try:
        with open(path) as fh:
            m = json.load(fh)
        jsonschema.validate(m, MANIFEST_SCHEMA)
    except (OSError, json.JSONDecodeError, jsonschema.ValidationError) as exc:
        raise ManifestError(str(exc).splitlines()[0]) from exc
    return m


class ManifestError(Exception):
    pass


def execute(command: str, params: dict):
    return HANDLERS[command](params)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("CSSQEC_LOG", "WARNING").upper(), stream=sys.stderr)
    args = build_parser().parse_args(argv)
    output = args.output
    try:
        if args.group == "run":
            m = load_manifest(args.manifest)
            params = dict(m.get("params") or {})
            if m.get("seed") is not None:
                params["seed"] = m["seed"]
            command = m["command"]
            output = output or m.get("output")
        else:
            command = args.group if args.group == "reproduce" else f"{args.group}.{args.action}"
            params = {k: v for k, v in vars(args).items() if k not in ("group", "action", "output", "all")}
        log.info("running %s", command)
        result = execute(command, params)
    except ManifestError as exc:
        print(f"error: manifest rejected: {exc}", file=sys.stderr)
        return EXIT_MANIFEST
    except CapabilityError as exc:
        print(f"error: size limit: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except ConstructionError as exc:
        print(f"error: construction failed: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except (UsageError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(result)
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    ok = result.ok if isinstance(result, Text) else True
    return EXIT_OK if ok else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
