"""Command-line entry point.  Each subcommand is a thin adapter over the library.

Exit codes: 0 success, 1 verification failure / counterexample / rejection,
2 a cap was exhausted, 64 usage error, 65 malformed input file, 66 unreadable file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .encoding import ExplicitTheory, tableau
from .fixtures import FIXTURE_NAMES, fixture_path
from .formula import ParseError
from .kernel import MODES, AdjointChecker, ProofType, VerificationError, check_justifications, default_mode, replay, verify
from .machine import MachineError, StepCapExceeded, build_table, check_machine, parse_machine, run
from .proofio import FORMAT_VERSION, FormatError, digest, format_proof, format_theory, manifest_lines, parse_proof, parse_theory, write_atomic
from .synthesis import FsExhausted, apf, build_special_proof, default_pool, fs_exact, fs_upper, normal_goal
from .verifier import Caps, discover, transcript

EXIT_OK, EXIT_FAIL, EXIT_EXHAUSTED = 0, 1, 2
EXIT_USAGE, EXIT_DATA, EXIT_NOINPUT = 64, 65, 66


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(f"{self.prog}: {message}", EXIT_USAGE)


class _Context:
    """Per-invocation state: files read (for the manifest) and the output channel."""

    def __init__(self, args):
        self.args = args
        self.digests: dict[str, str] = {}
        self.summary: dict = {"command": args.command}

    def read(self, path: str) -> str:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_NOINPUT) from exc
        self.digests[path] = digest(data)
        try:
            return data.decode("ascii")
        except UnicodeDecodeError as exc:
            raise CliError(f"{path}: not an ASCII file", EXIT_DATA) from exc

    def machine(self):
        spec = self.args.machine
        if spec.startswith("fixture:"):
            name = spec.split(":", 1)[1]
            if name not in FIXTURE_NAMES:
                raise CliError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURE_NAMES)}", EXIT_USAGE)
            text = fixture_path(name).read_text(encoding="ascii")
            self.digests[spec] = digest(text.encode("ascii"))
        else:
            text = self.read(spec)
            name = Path(spec).stem
        try:
            return check_machine(parse_machine(text, name=name))
        except MachineError as exc:
            raise CliError(f"{spec}: {exc}", EXIT_DATA) from exc

    @property
    def mode(self) -> str:
        if getattr(self.args, "mode", None):
            return self.args.mode
        try:
            return default_mode()
        except ValueError as exc:
            raise CliError(str(exc), EXIT_USAGE) from exc

    def manifest(self) -> dict:
        flags = {k: v for k, v in sorted(vars(self.args).items()) if k not in ("out", "json_summary", "func", "command")}
        return {
            "command": self.args.command,
            "flags": flags,
            "inputs": dict(sorted(self.digests.items())),
            "version": __version__,
            "mode": self.mode,
        }

    def emit(self, text: str, path: Optional[str] = None) -> None:
        target = path if path is not None else getattr(self.args, "out", None)
        if target:
            write_atomic(target, text)
        else:
            sys.stdout.write(text)


def _bits(s: str) -> str:
    if any(c not in "01" for c in s):
        raise CliError(f"input must be a bit string, got {s!r}", EXIT_USAGE)
    return s


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_run(ctx: _Context) -> int:
    m, s = ctx.machine(), _bits(ctx.args.input)
    r = run(m, s, ctx.args.step_cap)
    ctx.summary.update(verdict=r.verdict, value=r.value, steps=r.steps)
    ctx.emit(f"{r.verdict} value={r.value} steps={r.steps}\n")
    return {"halted": EXIT_OK, "malformed": EXIT_FAIL, "cap": EXIT_EXHAUSTED}[r.verdict]


def cmd_table(ctx: _Context) -> int:
    m, s = ctx.machine(), _bits(ctx.args.input)
    try:
        table = build_table(m, s, ctx.args.step_cap)
    except MachineError as exc:
        raise CliError(str(exc), EXIT_EXHAUSTED) from exc
    out = [f"# {h}" for h in manifest_lines(ctx.manifest())]
    for i, row in enumerate(table.rows):
        out.append(f"{i}: " + " ".join(f"({sq.symbol},{sq.state},{sq.flag})" for sq in row))
    ctx.summary.update(size=table.size)
    ctx.emit("\n".join(out) + "\n")
    return EXIT_OK


def cmd_encode(ctx: _Context) -> int:
    m, s = ctx.machine(), _bits(ctx.args.input)
    theory = tableau(m, s)
    ctx.summary.update(k=theory.k, formulas=len(theory.combined))
    ctx.emit(format_theory(theory.combined, theory.k, header=manifest_lines(ctx.manifest())))
    return EXIT_OK


def cmd_prove(ctx: _Context) -> int:
    m, s = ctx.machine(), _bits(ctx.args.input)
    try:
        sp = build_special_proof(m, s, ctx.args.step_cap, ctx.mode)
    except MachineError as exc:
        raise CliError(str(exc), EXIT_EXHAUSTED if isinstance(exc, StepCapExceeded) else EXIT_FAIL) from exc
    ptype = verify(sp.theory, sp.proof, sp.goal, ctx.mode)
    ctx.summary.update(lines=len(sp.proof), value=sp.value, steps=sp.steps)
    ctx.emit(format_proof(sp.proof, ptype.steps, sp.goal, header=manifest_lines(ctx.manifest())))
    return EXIT_OK


def _load_proof(ctx: _Context, path: str):
    try:
        return parse_proof(ctx.read(path))
    except FormatError as exc:
        raise CliError(f"{path}: {exc}", EXIT_DATA) from exc


def _theory(ctx: _Context):
    if ctx.args.theory:
        try:
            return ExplicitTheory(parse_theory(ctx.read(ctx.args.theory)))
        except FormatError as exc:
            raise CliError(f"{ctx.args.theory}: {exc}", EXIT_DATA) from exc
    if not ctx.args.machine:
        raise CliError("give --theory FILE or --machine FILE with --input", EXIT_USAGE)
    return tableau(ctx.machine(), _bits(ctx.args.input))


def cmd_verify(ctx: _Context) -> int:
    theory = _theory(ctx)
    pf = _load_proof(ctx, ctx.args.proof)
    try:
        if ctx.args.infer:
            verify(theory, pf.lines, pf.goal, ctx.mode)
        elif pf.steps is None:
            raise CliError("proof file lacks justifications; use --infer", EXIT_FAIL)
        else:
            check_justifications(theory, pf.lines, pf.steps, pf.goal, ctx.mode)
    except VerificationError as exc:
        ctx.summary.update(ok=False, index=exc.index, reason=exc.reason)
        print(f"FAIL line {exc.index}: {exc.reason}", file=sys.stderr)
        return EXIT_FAIL
    ctx.summary.update(ok=True, lines=len(pf.lines))
    ctx.emit(f"OK {len(pf.lines)} lines\n")
    return EXIT_OK


def cmd_type(ctx: _Context) -> int:
    theory = _theory(ctx)
    pf = _load_proof(ctx, ctx.args.proof)
    try:
        ptype = verify(theory, pf.lines, pf.goal, ctx.mode)
    except VerificationError as exc:
        print(f"FAIL line {exc.index}: {exc.reason}", file=sys.stderr)
        return EXIT_FAIL
    ctx.emit("".join(f"{i} {step}\n" for i, step in enumerate(ptype)))
    return EXIT_OK


def cmd_ck(ctx: _Context) -> int:
    pf = _load_proof(ctx, ctx.args.checker)
    if pf.steps is None:
        raise CliError("checker file needs a justification on every line", EXIT_DATA)
    ck = AdjointChecker(pf.lines, ProofType(pf.steps), ctx.mode)
    verdict, cost = replay(ck, tableau(ctx.machine(), _bits(ctx.args.input)))
    ctx.summary.update(verdict=verdict, comparisons=cost)
    ctx.emit(f"{verdict} comparisons={cost}\n")
    return EXIT_OK if verdict else EXIT_FAIL


def cmd_fs(ctx: _Context) -> int:
    m, s = ctx.machine(), _bits(ctx.args.input)
    upper = fs_upper(m, s, ctx.args.step_cap, ctx.mode)
    lines = [f"fs_upper {upper}"]
    ctx.summary.update(fs_upper=upper)
    code = EXIT_OK
    if ctx.args.exact:
        sp = build_special_proof(m, s, ctx.args.step_cap, ctx.mode)
        res = fs_exact(m, s, sp.value, default_pool(m, s, ctx.args.step_cap, ctx.mode), upper + 1, ctx.args.pool_budget, mode=ctx.mode)
        if res.exhausted:
            lines.append(f"fs_exact exhausted after {res.tried} sequences ({res.reason})")
            code = EXIT_EXHAUSTED
        else:
            lines.append(f"fs_exact {res.length}")
        ctx.summary.update(fs_exact=res.length, tried=res.tried)
    ctx.emit("\n".join(lines) + "\n")
    return code


def cmd_apf(ctx: _Context) -> int:
    m = ctx.machine()
    rows = []
    try:
        for n in range(ctx.args.max_n + 1):
            rows.append((n, apf(m, n, ctx.args.apf_mode, ctx.args.step_cap, ctx.args.pool_budget, ctx.mode)))
    except (FsExhausted, StepCapExceeded) as exc:
        print(f"exhausted at n={len(rows)}: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    ctx.emit("".join(f"{n} {v}\n" for n, v in rows))
    if ctx.args.csv:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "apf"])
        writer.writerows(rows)
        write_atomic(ctx.args.csv, buf.getvalue())
    ctx.summary.update(apf={str(n): v for n, v in rows})
    return EXIT_OK


def cmd_discover(ctx: _Context) -> int:
    m = ctx.machine()
    a = ctx.args
    caps = Caps(step_cap=a.step_cap, k_cap=a.k_cap, pool_budget=a.pool_budget, max_iterations=a.max_iterations)
    outcome = discover(m, caps, ctx.mode)
    text, summary = transcript(outcome, a.step_cap)
    header = manifest_lines(ctx.manifest())
    if a.emit_transcript:
        write_atomic(a.emit_transcript, "".join(f"# {h}\n" for h in header) + text)
    if a.emit_checkers:
        for n, ck in enumerate(outcome.checkers):
            extra = [f"checker {n} witness {ck.witness!r}"]
            write_atomic(Path(a.emit_checkers) / f"checker_{n:03d}.proof", format_proof(ck.proof, ck.type.steps, ck.proof[-1], header=header + extra))
    ctx.summary.update(summary)
    ctx.emit(text)
    return {"proved-all-ones": EXIT_OK, "counterexample": EXIT_FAIL}.get(outcome.status, EXIT_EXHAUSTED)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="proofforge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"proofforge {__version__} (format {FORMAT_VERSION})")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def command(name, func, help_text, machine=True, needs_input=True):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        if machine:
            p.add_argument("--machine", required=machine == "required", help="machine file, or fixture:NAME")
        if needs_input:
            p.add_argument("--input", default="", help="input bit string (default empty)")
        p.add_argument("--step-cap", type=int, default=10_000)
        p.add_argument("--mode", choices=MODES, default=None, help="kernel mode (default: $PROOFFORGE_MODE or paper)")
        p.add_argument("--out", help="write the artifact here instead of stdout")
        p.add_argument("--json-summary", action="store_true", help="print a JSON summary line to stderr")
        return p

    command("run", cmd_run, "simulate a machine", "required")
    command("table", cmd_table, "print the computation table window", "required")
    command("encode", cmd_encode, "write the tableau theory", "required")
    command("prove", cmd_prove, "write the special normal proof", "required")
    p = command("verify", cmd_verify, "check a proof file", True)
    p.add_argument("--theory", help="formula-per-line theory file")
    p.add_argument("--proof", required=True)
    p.add_argument("--infer", action="store_true", help="ignore stored justifications and infer them")
    p = command("type", cmd_type, "print the proof type of a proof file", True)
    p.add_argument("--theory")
    p.add_argument("--proof", required=True)
    p = command("ck", cmd_ck, "replay an adjoint checker against T<M,s>", "required")
    p.add_argument("--checker", required=True, help="proof file whose justifications are the checker's type")
    p = command("fs", cmd_fs, "proof-length measures for one input", "required")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--pool-budget", type=int, default=2_000)
    p = command("apf", cmd_apf, "adjoint proof complexity for n = 0..max-n", "required", needs_input=False)
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--apf-mode", choices=("upper", "exact"), default="upper")
    p.add_argument("--pool-budget", type=int, default=2_000)
    p.add_argument("--csv")
    p = command("discover", cmd_discover, "run the checker-discovery loop", "required", needs_input=False)
    p.add_argument("--k-cap", type=int, default=10)
    p.add_argument("--pool-budget", type=int, default=2_000)
    p.add_argument("--max-iterations", type=int, default=256)
    p.add_argument("--emit-transcript")
    p.add_argument("--emit-checkers")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise CliError("a subcommand is required (see --help)", EXIT_USAGE)
        ctx = _Context(args)
        code = args.func(ctx)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SystemExit as exc:  # --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    if getattr(args, "json_summary", False):
        ctx.summary["exit"] = code
        print(json.dumps(ctx.summary, sort_keys=True), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
