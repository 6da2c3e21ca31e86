"""Plain-text state-set files.

One state per line: ``label re0 im0 re1 im1 ...``, whitespace separated;
``#`` starts a comment. The dimension is inferred from the token count and
must agree across lines. States are normalized on load.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .machine import StateSet
from .qcore import ket_new


class StateFileError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<string>"):
        self.line = line
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


def parse_state_set(text: str, source: str = "<string>") -> StateSet:
    labels, states = [], []
    dim = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        label, *tokens = line.split()
        if not tokens or len(tokens) % 2:
            raise StateFileError("expected a label followed by re/im pairs", lineno, source)
        try:
            vals = [float(t) for t in tokens]
        except ValueError as exc:
            raise StateFileError(f"bad number ({exc})", lineno, source) from None
        amps = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
        if dim is None:
            dim = amps.size
        elif amps.size != dim:
            raise StateFileError(f"state has dimension {amps.size}, expected {dim}", lineno, source)
        try:
            states.append(ket_new(amps))
        except ValueError as exc:
            raise StateFileError(str(exc), lineno, source) from None
        labels.append(label)
    if not states:
        raise StateFileError("no states found", None, source)
    if len(set(labels)) != len(labels):
        raise StateFileError("duplicate state labels", None, source)
    return StateSet(tuple(states), tuple(labels))


def load_state_set(path) -> StateSet:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise StateFileError(f"cannot read file ({exc.strerror})", None, str(path)) from None
    return parse_state_set(text, str(path))


def format_state_set(states: StateSet) -> str:
    lines = []
    for label, ket in zip(states.labels, states.states):
        nums = []
        for a in ket.amplitudes:
            nums += [f"{a.real:.17g}", f"{a.imag:.17g}"]
        lines.append(" ".join([label, *nums]))
    return "\n".join(lines) + "\n"
