"""Text formats: numbered proof files and formula-per-line theory files.

Proof file::

    # comment lines are ignored
    goal: $\\exists i t_{i,1}=(1,h,1)$
    0 | $t_{0,0}=(>,q0,1)$ | IN
    1 | ... | MP 4 2
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .formula import Formula, FormulaSequence, ParseError, parse_formula, serialize
from .kernel import CheckerStep, ProofType

FORMAT_VERSION = 1


class FormatError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class ProofFile:
    goal: Optional[Formula]
    lines: FormulaSequence
    steps: Optional[tuple[CheckerStep, ...]]  # None when any justification is missing

    @property
    def type(self) -> ProofType:
        return ProofType(self.steps or ())


def format_step(step: CheckerStep) -> str:
    return str(step)


def parse_step(text: str, lineno: int) -> CheckerStep:
    parts = text.split()
    if not parts:
        raise FormatError("empty justification", lineno)
    word = parts[0].upper()
    try:
        if word in ("IN", "LAMBDA", "ZFC") and len(parts) == 1:
            return CheckerStep({"IN": "In", "LAMBDA": "Lambda", "ZFC": "Zfc"}[word])
        if word == "MP" and len(parts) == 3:
            return CheckerStep("Mp", int(parts[1]), int(parts[2]))
        if word == "GEN" and len(parts) == 3:
            return CheckerStep("Gen", int(parts[1]), var=parts[2])
    except ValueError:
        pass
    raise FormatError(f"bad justification {text!r}", lineno)


def _formula(text: str, lineno: int) -> Formula:
    try:
        return parse_formula(text.strip(), free=None)
    except ParseError as exc:
        raise FormatError(f"{exc} (offset {exc.offset})", lineno) from exc


def format_proof(lines: Sequence[Formula], steps: Optional[Sequence[CheckerStep]] = None, goal: Optional[Formula] = None, header: Sequence[str] = ()) -> str:
    out = [f"# {h}" for h in header]
    if goal is not None:
        out.append(f"goal: {serialize(goal).text}")
    for i, f in enumerate(lines):
        just = format_step(steps[i]) if steps is not None else "?"
        out.append(f"{i} | {serialize(f).text} | {just}")
    return "\n".join(out) + "\n"


def parse_proof(text: str) -> ProofFile:
    goal = None
    lines: list[Formula] = []
    steps: list[Optional[CheckerStep]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("goal:"):
            goal = _formula(line[5:], lineno)
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) not in (2, 3):
            raise FormatError("expected '<i> | <formula> | <justification>'", lineno)
        if not parts[0].isdigit() or int(parts[0]) != len(lines):
            raise FormatError(f"expected line number {len(lines)}", lineno)
        lines.append(_formula(parts[1], lineno))
        just = parts[2] if len(parts) == 3 else "?"
        steps.append(None if just == "?" else parse_step(just, lineno))
    complete = all(s is not None for s in steps)
    return ProofFile(goal, FormulaSequence(tuple(lines)), tuple(steps) if complete else None)


def format_theory(formulas: Sequence[Formula], k: Optional[int] = None, header: Sequence[str] = ()) -> str:
    out = [f"# {h}" for h in header]
    if k is not None:
        out.append(f"# k = {k} (formulas 0..{k} are def_M, the rest encode the input)")
    out += [serialize(f).text for f in formulas]
    return "\n".join(out) + "\n"


def parse_theory(text: str) -> FormulaSequence:
    items = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line and not line.startswith("#"):
            items.append(_formula(line, lineno))
    return FormulaSequence(tuple(items))


# ---------------------------------------------------------------------------
# Manifests and atomic writes
# ---------------------------------------------------------------------------


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def manifest_lines(manifest: dict) -> list[str]:
    return [f"proofforge format {FORMAT_VERSION}", "manifest: " + json.dumps(manifest, sort_keys=True)]


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
