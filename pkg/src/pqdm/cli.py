"""Command-line front end.

Exit codes: 0 when the checked property holds, 1 when it is violated or the
spec is infeasible, 2 for usage, parse and I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import bounds, instances, machine, nosignal
from .qcore import BasisPair
from .rng import SplitMix64, random_unitary
from .statefile import StateFileError, load_state_set

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_GRID = (0.0, math.pi / 2, 7)


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """17 significant digits, or an empty field for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _grid(text: str | None, degrees: bool, default=DEFAULT_GRID) -> tuple[float, float, int]:
    if text is None:
        return default
    vals = _floats(text)
    if len(vals) != 3 or vals[2] != int(vals[2]):
        raise UsageError("range must be START,STOP,STEPS")
    start, stop, steps = vals[0], vals[1], int(vals[2])
    if degrees:
        start, stop = math.radians(start), math.radians(stop)
    return start, stop, steps


def _angle(value: float, degrees: bool) -> float:
    return math.radians(value) if degrees else value


def _probabilities(text: str, n: int) -> tuple[float, ...]:
    vals = _floats(text)
    if len(vals) == 1:
        vals = vals * n
    if len(vals) != n:
        raise UsageError(f"got {len(vals)} probabilities for {n} states")
    if any(not 0 <= p <= 1 for p in vals):
        raise UsageError("probabilities must lie in [0, 1]")
    return tuple(vals)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc.strerror}") from None


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# -- feasible / synth ---------------------------------------------------------

def cmd_feasible(args) -> int:
    states = load_state_set(args.file)
    spec = machine.MachineSpec(states, _probabilities(args.p, states.n))
    rep = machine.feasibility(spec)
    print("feasible" if rep.feasible else "infeasible")
    print(f"min_eigenvalue: {fmt(rep.min_eigenvalue)}")
    print(f"gram_rank: {states.gram_rank} of {states.n}")
    return EXIT_OK if rep.feasible else EXIT_FAIL


def cmd_synth(args) -> int:
    states = load_state_set(args.file)
    spec = machine.MachineSpec(states, _probabilities(args.p, states.n), probe_dim=args.probe_dim)
    rep = machine.feasibility(spec)
    if not rep.feasible:
        print("infeasible")
        print(f"min_eigenvalue: {fmt(rep.min_eigenvalue)}")
        return EXIT_FAIL
    try:
        m = machine.synthesize(spec)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    tol = args.tol if args.tol is not None else machine.VERIFY_TOL
    v = machine.verify_machine(m, tol)
    print(f"probe_labels: {' '.join(f'{k}={lab}' for k, lab in sorted(m.probe_labels.items()))}")
    for name in ("unitarity_defect", "success_probability_error", "fidelity_error",
                 "cross_leakage", "gram_defect"):
        print(f"{name}: {fmt(getattr(v, name))}")
    print("pass" if v.passed else "fail")
    if args.out:
        u = m.unitary.entries
        rows = [[i, j, fmt(u[i, j].real), fmt(u[i, j].imag)]
                for i in range(u.shape[0]) for j in range(u.shape[1])]
        _emit(_csv(["row", "col", "re", "im"], rows), args.out)
    return EXIT_OK if v.passed else EXIT_FAIL


# -- nosignal -----------------------------------------------------------------

def _thetas(start: float, stop: float, steps: int) -> list[float]:
    if steps < 2 or not start < stop:
        raise UsageError("grid needs steps >= 2 and start < stop")
    return [float(t) for t in np.linspace(start, stop, steps)]


def max_pairwise_distance(results) -> float:
    return max((nosignal.detect_signalling(a, b, math.inf)[1] for a, b in combinations(results, 2)),
               default=0.0)


def cmd_nosignal(args) -> int:
    tol = args.tol if args.tol is not None else nosignal.SIGNAL_TOL
    basis_m = BasisPair(_angle(args.theta_m, args.degrees))
    states = machine.basis_pair_states(basis_m)
    spec = machine.MachineSpec(states, _probabilities(args.p, 2))
    rep = machine.feasibility(spec)
    if not rep.feasible:
        print("infeasible")
        print(f"min_eigenvalue: {fmt(rep.min_eigenvalue)}")
        return EXIT_FAIL
    m = machine.synthesize(spec)
    thetas = _thetas(*_grid(args.grid, args.degrees))
    results = [nosignal.run_protocol(m, BasisPair(t)) for t in thetas]
    ref = results[0]
    for t, r in zip(thetas, results):
        d = nosignal.detect_signalling(ref, r, tol)[1]
        print(f"theta={fmt(t)} distance_to_first={fmt(d)}")
    worst = max_pairwise_distance(results)
    print(f"max_pairwise_distance: {fmt(worst)}")

    own = nosignal.run_protocol(m, basis_m)
    p1, pbar = spec.probabilities
    target = nosignal.mixture_target(p1, pbar, basis_m, spec.blank)
    eq8 = nosignal.trace_distance(own.branches["P0"][0], target)
    print(f"P0 branch vs 1/4[p|psi><psi| + p_bar|psi_bar><psi_bar|] (x) |Sigma><Sigma|: {fmt(eq8)}")

    if args.diagnostic:
        for t, r in zip(thetas, results):
            c = nosignal.compare_branches(own, r)
            print(f"diagnostic theta={fmt(t)} correlated_P0_distance={fmt(c.distance)}")
        print(f"note: {nosignal.BRANCH_NOTE}")
    if args.shots:
        counts = nosignal.sample_outcomes(ref, args.shots, args.seed)
        for (alice, probe), c in counts.items():
            if c:
                print(f"sample alice={alice[0]},{alice[1]} probe={probe} count={c}")
    ok = worst <= tol
    print("no-signalling holds" if ok else "SIGNALLING DETECTED")
    return EXIT_OK if ok else EXIT_FAIL


# -- bound --------------------------------------------------------------------

BOUND_HEADER = ["trial", "i", "j", "p_i", "p_j", "lhs", "zeta_overlap", "v_overlap",
                "rhs", "slack", "status"]


def _bound_states(n: int, overlap: str, rng: SplitMix64) -> machine.StateSet | None:
    if overlap == "random":
        return instances.random_state_set(rng, n)
    s = float(overlap)
    if s >= 1 - bounds.DEGENERATE_TOL:
        return None
    return instances.equiangular_state_set(n, s, rng=rng)


def bound_rows(n: int, overlap: str, p_spec: str, trials: int, seed: int) -> tuple[list[list], bool]:
    rng = SplitMix64(seed)
    rows, ok = [], True
    pairs = list(combinations(range(n), 2))
    for trial in range(trials):
        states = _bound_states(n, overlap, rng)
        if states is None:
            rows += [[trial, i, j, "", "", "", "", fmt(1.0), "", "", "degenerate"] for i, j in pairs]
            continue
        p = machine.max_uniform_probability(states) if p_spec == "max" else float(p_spec)
        spec = machine.MachineSpec.uniform(states, p)
        if not machine.feasibility(spec).feasible:
            ok = False
            rows += [[trial, i, j, fmt(p), fmt(p), "", "", "", "", "", "infeasible"] for i, j in pairs]
            continue
        m = machine.synthesize(spec)
        e = bounds.BipartiteEnsemble.with_computational_alice(states)
        for r in bounds.check_bound(e, m):
            i, j = r.pair
            good = r.slack >= -bounds.BOUND_TOL
            ok &= good
            rows.append([trial, i, j, fmt(spec.probabilities[i]), fmt(spec.probabilities[j]),
                         fmt(r.lhs), fmt(r.zeta_overlap), fmt(r.v_overlap), fmt(r.rhs),
                         fmt(r.slack), "ok" if good else "violated"])
    return rows, ok


def cmd_bound(args) -> int:
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    if args.p != "max":
        _floats(args.p)
    if args.overlap != "random":
        s = _floats(args.overlap)
        if len(s) != 1 or not 0 <= s[0] <= 1:
            raise UsageError("--overlap must be 'random' or a number in [0, 1]")
    rows, ok = bound_rows(args.n, args.overlap, args.p, args.trials, args.seed)
    _emit(_csv(BOUND_HEADER, rows), args.out)
    return EXIT_OK if ok else EXIT_FAIL


# -- sweep --------------------------------------------------------------------

SWEEP_VARIABLES = ("overlap", "p", "theta")
SWEEP_HEADER = ["value", "max_uniform_probability", "feasible", "bound_rhs", "nosignal_max_distance"]


@dataclass(frozen=True)
class SweepConfig:
    variable: str
    start: float
    stop: float
    steps: int
    fixed: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise UsageError(f"sweep variable must be one of {SWEEP_VARIABLES}")
        if self.steps < 2:
            raise UsageError("sweep needs steps >= 2")
        if not self.start < self.stop:
            raise UsageError("sweep needs start < stop")

    def values(self) -> list[float]:
        return [float(v) for v in np.linspace(self.start, self.stop, self.steps)]


def _sweep_point(cfg: SweepConfig, value: float, frame: np.ndarray) -> list:
    fixed = cfg.fixed
    if cfg.variable == "theta":
        states = machine.basis_pair_states(BasisPair(fixed.get("theta_m", 0.0)))
    else:
        s = value if cfg.variable == "overlap" else fixed.get("overlap", 0.5)
        states = machine.two_state_set(s).transformed(frame)
    pmax = machine.max_uniform_probability(states)
    if cfg.variable == "p":
        p = value
    else:
        p = pmax if fixed.get("p", "max") == "max" else float(fixed["p"])
    spec = machine.MachineSpec.uniform(states, min(max(p, 0.0), 1.0))
    feasible = 0.0 <= p <= 1.0 and machine.feasibility(spec).feasible
    rhs = dist = None
    if feasible:
        m = machine.synthesize(spec)
        if states.independent:
            e = bounds.BipartiteEnsemble.with_computational_alice(states)
            rhs = bounds.check_bound(e, m)[0].rhs
        if cfg.variable == "theta":
            ref = nosignal.run_protocol(m, BasisPair(cfg.start))
            dist = nosignal.detect_signalling(ref, nosignal.run_protocol(m, BasisPair(value)))[1]
        else:
            runs = [nosignal.run_protocol(m, BasisPair(t)) for t in _thetas(*DEFAULT_GRID)]
            dist = max_pairwise_distance(runs)
    return [fmt(value), fmt(pmax), fmt(bool(feasible)), fmt(rhs), fmt(dist)]


def run_sweep(cfg: SweepConfig, jobs: int = 1) -> str:
    frame = random_unitary(SplitMix64(cfg.seed), 2)
    values = cfg.values()
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            rows = list(pool.map(lambda v: _sweep_point(cfg, v, frame), values))
    else:
        rows = [_sweep_point(cfg, v, frame) for v in values]
    return _csv(SWEEP_HEADER, rows)


def cmd_sweep(args) -> int:
    if args.range is None:
        raise UsageError("--range START,STOP,STEPS is required")
    start, stop, steps = _grid(args.range, args.degrees and args.variable == "theta")
    fixed = {"overlap": args.overlap, "p": args.p,
             "theta_m": _angle(args.theta_m, args.degrees)}
    if args.p != "max":
        _floats(args.p)
    cfg = SweepConfig(args.variable, start, stop, steps, fixed, args.seed)
    _emit(run_sweep(cfg, args.jobs), args.out)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # subcommands repeat the global flags without overriding values given earlier
    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--tol", type=float, default=default(None), help="tolerance for the property check")
    parser.add_argument("--seed", type=int, default=default(0), help="seed for randomized instances")
    parser.add_argument("--out", default=default(None), help="write CSV/unitary output to this path")
    parser.add_argument("--degrees", action="store_true", default=default(False),
                        help="read angles in degrees")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pqdm", description="Probabilistic quantum deletion machines.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("feasible", help="decide feasibility for a state-set file")
    _global_flags(p, suppress=True)
    p.add_argument("file")
    p.add_argument("--p", required=True, help="success probabilities, comma separated (one value = uniform)")
    p.set_defaults(func=cmd_feasible)

    p = sub.add_parser("synth", help="synthesize and verify a machine")
    _global_flags(p, suppress=True)
    p.add_argument("file")
    p.add_argument("--p", required=True)
    p.add_argument("--probe-dim", type=int, default=4)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("nosignal", help="run the two-singlet experiment over Alice bases")
    _global_flags(p, suppress=True)
    p.add_argument("--theta-m", type=float, default=0.0, help="basis angle the machine is built on")
    p.add_argument("--p", default="1,1", help="p,p_bar for the machine's basis pair")
    p.add_argument("--grid", help="Alice angles START,STOP,STEPS (default 0,pi/2,7)")
    p.add_argument("--diagnostic", action="store_true", help="also compare Alice-correlated P0 branches")
    p.add_argument("--shots", type=int, default=0, help="print sampled joint outcomes")
    p.set_defaults(func=cmd_nosignal)

    p = sub.add_parser("bound", help="check the deletion-probability bound on random ensembles")
    _global_flags(p, suppress=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--overlap", default="random", help="'random' or a common pairwise overlap")
    p.add_argument("--p", default="max", help="'max' or a uniform probability")
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", help="parameter sweep to CSV")
    _global_flags(p, suppress=True)
    p.add_argument("--variable", choices=SWEEP_VARIABLES, required=True)
    p.add_argument("--range", help="START,STOP,STEPS")
    p.add_argument("--overlap", type=float, default=0.5, help="fixed overlap when not swept")
    p.add_argument("--p", default="max", help="fixed uniform p ('max' = optimum) when not swept")
    p.add_argument("--theta-m", type=float, default=0.0, help="machine basis angle for theta sweeps")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, StateFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
