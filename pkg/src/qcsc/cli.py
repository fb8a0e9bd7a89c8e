"""Command-line entry point: ``qcsc <command> [<action>] [options]``.

Every invocation writes its primary output (to ``--out`` or stdout) and a run
manifest recording the version, argv, input digests, seed, outputs and wall
time.  Validation failures exit with status 2 and print
``{"error": {"code": ..., "message": ...}}`` on stderr.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__

INTERFACE_REVISION = 1
VERSION_STRING = f"qcsc {__version__} (interface rev {INTERFACE_REVISION})"
MAX_AMPLITUDE_DUMP = 20


class CliError(Exception):
    """Validation failure with a stable machine-readable code."""

    def __init__(self, code: str, message: str, details=None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.details = details


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message, {"usage": self.format_usage().strip()})


class _Run:
    """Per-invocation bookkeeping for the manifest."""

    def __init__(self, argv, args):
        self.argv = list(argv)
        self.args = args
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []
        self.started = time.perf_counter()

    def read(self, path: str, code: str = "file_not_found") -> str:
        try:
            raw = Path(path).read_bytes()
        except OSError as exc:
            raise CliError(code, f"cannot read {path}: {exc.strerror}") from None
        self.inputs[path] = hashlib.sha256(raw).hexdigest()
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise CliError("invalid_encoding", f"{path} is not UTF-8 text") from None

    def read_json(self, path: str):
        text = self.read(path)
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise CliError("invalid_json", f"{path}: {exc}") from None

    def write(self, path: str, text: str) -> None:
        p = Path(path)
        if p.parent != Path(""):
            p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")
        self.outputs.append(str(p))

    def emit(self, obj) -> None:
        """Primary JSON result to ``--out`` or stdout."""
        text = dumps(obj)
        if self.args.out:
            self.write(self.args.out, text)
        else:
            sys.stdout.write(text)

    def manifest(self) -> dict:
        return {
            "version": VERSION_STRING,
            "argv": self.argv,
            "inputs": dict(sorted(self.inputs.items())),
            "seed": self.args.seed,
            "outputs": self.outputs,
            "duration_s": time.perf_counter() - self.started,
        }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _load(run: _Run, path: str, loader, code: str):
    data = run.read_json(path)
    try:
        return loader(data)
    except CliError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CliError(code, f"{path}: {exc}") from None


def _operator(run, path):
    from .pauli import QubitOperator
    return _load(run, path, QubitOperator.from_json_dict, "invalid_operator")


def _circuit(run, path):
    from .circuits import Circuit
    return _load(run, path, Circuit.from_json_dict, "invalid_circuit")


def _bitstring(index: int, n: int) -> str:
    # qubit 0 is the rightmost character
    return format(index, f"0{n}b") if n else ""


# -- commands -------------------------------------------------------------------------

def cmd_sim_run(run: _Run, a) -> None:
    from .density import NoiseModel, expectation_dm, run_noisy
    from .statevector import expectation, run as sv_run, sample

    circ = _circuit(run, a.circuit)
    op = _operator(run, a.observable) if a.observable else None
    if op is not None and op.num_qubits > circ.num_qubits:
        raise CliError("size_mismatch", "observable acts on more qubits than the circuit")
    if a.shots is not None and a.shots < 1:
        raise CliError("invalid_argument", "--shots must be >= 1")
    out: dict = {"num_qubits": circ.num_qubits}
    if a.noise:
        nm = _load(run, a.noise, NoiseModel.from_json_dict, "invalid_noise_model")
        try:
            rho = run_noisy(circ, nm)
        except ValueError as exc:
            raise CliError("limit_exceeded", str(exc)) from None
        probs = np.clip(np.real(np.diag(rho.data)), 0, None)
        if op is not None:
            out["expectation"] = expectation_dm(rho, op)
        if a.shots:
            counts = np.random.default_rng(a.seed).multinomial(a.shots, probs / probs.sum())
            out["counts"] = {_bitstring(i, circ.num_qubits): int(c)
                             for i, c in enumerate(counts) if c}
        if op is None and not a.shots:
            out["probabilities"] = probs.tolist()
    else:
        state = sv_run(circ)
        if op is not None:
            out["expectation"] = expectation(state, op)
        if a.shots:
            counts = sample(state, a.shots, a.seed)
            out["counts"] = {_bitstring(i, circ.num_qubits): c for i, c in sorted(counts.items())}
        if op is None and not a.shots:
            if circ.num_qubits > MAX_AMPLITUDE_DUMP:
                raise CliError("limit_exceeded",
                               f"amplitude dumps are limited to {MAX_AMPLITUDE_DUMP} qubits; "
                               "use --shots or --observable")
            out["amplitudes"] = [[float(z.real), float(z.imag)] for z in state.amplitudes]
    run.emit(out)


def _lattice(run, a, default_kind="chain"):
    from .lattice import LatticeSpec
    if a.lattice:
        return _load(run, a.lattice, LatticeSpec.from_json_dict, "invalid_lattice")
    if default_kind == "honeycomb":
        return LatticeSpec.honeycomb(*a.cells)
    if a.sites is None:
        raise CliError("missing_argument", "--sites or --lattice is required")
    return LatticeSpec.chain(a.sites, a.periodic)


def cmd_ham_build(run: _Run, a) -> None:
    from . import lattice as lt

    if a.model == "hubbard":
        op = lt.hubbard_hamiltonian(_lattice(run, a), a.t, a.u)
    elif a.model == "heisenberg":
        op = lt.heisenberg(_lattice(run, a), a.j)
    elif a.model == "kitaev":
        params = dict(lt.RUCL3_PARAMS) if a.rucl3 else {"J": a.j, "K": a.k, "Gamma": a.gamma,
                                                        "Gamma_prime": a.gamma_prime}
        op = lt.kitaev_heisenberg(_lattice(run, a, "honeycomb"), **params)
    else:
        op = lt.emery_hamiltonian(a.cells_1d, a.t_pd, a.t_pp, a.delta, a.u_d, a.u_p, a.v_pd)
    run.emit(op.to_json_dict())


def cmd_trotter_plan(run: _Run, a) -> None:
    from .trotter import (TrotterPlan, _evolution_terms, all_commute, commutator_bound, l1_bound,
                          step_circuit, steps_for_error_commutator, steps_for_error_l1)

    h = _operator(run, a.ham)
    if a.eps <= 0:
        raise CliError("invalid_argument", "--eps must be positive")
    if a.bound == "commutator":
        if a.order != 1:
            raise CliError("invalid_argument", "the commutator bound is first order only")
        n = steps_for_error_commutator(h, a.t, a.eps)
        value = commutator_bound(h, a.t, n)
    else:
        n = steps_for_error_l1(h, a.t, a.eps, a.order)
        value = l1_bound(h, a.t, n, a.order)
    if all_commute(_evolution_terms(h)):
        value = 0.0  # the product formula is exact
    plan = TrotterPlan(h, a.t, a.order, n)
    step = step_circuit(plan)
    circuit_path = a.circuit_out or (str(Path(a.out).with_suffix("")) + ".step.json"
                                     if a.out else "trotter_step.json")
    run.write(circuit_path, dumps(step.to_json_dict()))
    run.emit({"n": n, "bound": a.bound, "bound_value": value, "order": a.order, "t": a.t,
              "eps": a.eps, "circuit_path": circuit_path, "circuit_repetitions": n,
              "gates_per_step": len(step), "term_order": list(plan.term_order),
              "bound_note": "sufficient condition from l1 upper bounds on norms"})


def cmd_measure_estimate(run: _Run, a) -> None:
    from .measure import estimate_expectation, measurement_groups, shadow_estimate
    from .statevector import run as sv_run

    circ = _circuit(run, a.circuit)
    op = _operator(run, a.observable)
    if op.num_qubits > circ.num_qubits:
        raise CliError("size_mismatch", "observable acts on more qubits than the circuit")
    if not op.is_hermitian:
        raise CliError("invalid_operator", "observable must be Hermitian")
    state = sv_run(circ)
    identity = sum(t.coeff.real for t in op.terms if t.is_identity)
    rest = type(op)([t for t in op.terms if not t.is_identity], op.num_qubits)
    try:
        if a.method == "shadows":
            report = shadow_estimate(state, rest, a.shots, a.seed)
        else:
            groups = measurement_groups(rest, a.shots, a.allocation)
            report = estimate_expectation(state, groups, a.seed, rest)
    except ValueError as exc:
        raise CliError("invalid_argument", str(exc)) from None
    report.mean += identity
    out = report.to_json_dict()
    out["method"] = a.method
    run.emit(out)


def cmd_measure_zne(run: _Run, a) -> None:
    from .measure import zne_extrapolate

    text = run.read(a.points)
    try:
        rows = list(csv.DictReader(io.StringIO(text)))
        points = [(float(r["factor"]), float(r["value"])) for r in rows]
        value = zne_extrapolate(points, a.model)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError("invalid_points", f"{a.points}: {exc}") from None
    run.emit({"model": a.model, "points": [list(p) for p in points], "value": value})


def cmd_swapnet(run: _Run, a) -> None:
    from .swapnet import compile_dense_interactions, swap_network

    if a.n < 2:
        raise CliError("invalid_argument", "--n must be >= 2")
    if a.compile:
        op = _operator(run, a.compile)
        try:
            circ = compile_dense_interactions(op, a.n, a.t)
        except ValueError as exc:
            raise CliError("invalid_operator", str(exc)) from None
        out = circ.to_json_dict()
        out["final_layout"] = list(swap_network(a.n).final_layout)
        run.emit(out)
    else:
        run.emit(swap_network(a.n).to_json_dict())


def cmd_sched_run(run: _Run, a) -> None:
    from .sched import Scenario, ScenarioError, simulate

    data = run.read_json(a.scenario)
    try:
        scenario = Scenario.from_json_dict(data)
    except ScenarioError as exc:
        raise CliError("invalid_scenario", str(exc),
                       [{"path": p, "code": c, "message": m} for p, c, m in exc.errors]) from None
    except (TypeError, ValueError, AttributeError) as exc:
        raise CliError("invalid_scenario", str(exc)) from None
    result = simulate(scenario, a.seed)
    out_dir = Path(a.out or ".")
    run.write(str(out_dir / "events.jsonl"), result.log.to_jsonl())
    run.write(str(out_dir / "metrics.json"), dumps(result.metrics))


def cmd_oracle_diag(run: _Run, a) -> None:
    from .lattice import exact_spectrum

    op = _operator(run, a.ham)
    try:
        evals = exact_spectrum(op, a.k, a.particles)
    except ValueError as exc:
        raise CliError("limit_exceeded" if "limit" in str(exc) else "invalid_operator",
                       str(exc)) from None
    run.emit({"eigenvalues": evals, "k": a.k, "n_particles": a.particles})


# -- parser -----------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--threads", type=int, default=None, help="cap on kernel threads")
    p.add_argument("--out", default=None, help="output path (directory for 'sched run')")
    p.add_argument("--manifest", default=None, help="manifest path (default <out>.manifest.json)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="qcsc", description="Quantum-centric supercomputing workbench.")
    parser.add_argument("--version", action="version", version=VERSION_STRING)
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    def leaf(group, name, fn, help_):
        p = group.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(fn=fn)
        return p

    def branch(name, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        g = p.add_subparsers(dest="action", metavar="action", parser_class=_Parser)
        g.required = True
        return g

    sim = branch("sim", "circuit simulation")
    p = leaf(sim, "run", cmd_sim_run, "simulate a circuit file")
    p.add_argument("--circuit", required=True)
    p.add_argument("--shots", type=int)
    p.add_argument("--observable")
    p.add_argument("--noise", help="noise model JSON; switches to density-matrix simulation")

    ham = branch("ham", "model Hamiltonians")
    p = leaf(ham, "build", cmd_ham_build, "build a qubit Hamiltonian")
    p.add_argument("--model", required=True, choices=["hubbard", "heisenberg", "kitaev", "emery"])
    p.add_argument("--lattice", help="lattice JSON file")
    p.add_argument("--sites", type=int, help="chain length")
    p.add_argument("--periodic", action="store_true")
    p.add_argument("--cells", type=int, nargs=2, default=(1, 1), metavar=("NX", "NY"),
                   help="honeycomb plaquettes")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--u", type=float, default=0.0)
    p.add_argument("--j", type=float, default=1.0)
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--gamma-prime", type=float, default=0.0)
    p.add_argument("--rucl3", action="store_true", help="use the alpha-RuCl3 parameter set")
    p.add_argument("--emery-cells", dest="cells_1d", type=int, default=1)
    p.add_argument("--t-pd", type=float, default=1.0)
    p.add_argument("--t-pp", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=3.0)
    p.add_argument("--u-d", type=float, default=8.0)
    p.add_argument("--u-p", type=float, default=3.0)
    p.add_argument("--v-pd", type=float, default=1.0)

    trot = branch("trotter", "product-formula planning")
    p = leaf(trot, "plan", cmd_trotter_plan, "choose a Trotter step count")
    p.add_argument("--ham", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--order", type=int, choices=[1, 2], default=1)
    p.add_argument("--bound", choices=["l1", "commutator"], default="l1")
    p.add_argument("--circuit-out", help="where to write the one-step circuit")

    meas = branch("measure", "expectation estimation and error mitigation")
    p = leaf(meas, "estimate", cmd_measure_estimate, "sampled expectation value")
    p.add_argument("--circuit", required=True)
    p.add_argument("--observable", required=True)
    p.add_argument("--shots", type=int, default=10000)
    p.add_argument("--method", choices=["groups", "shadows"], default="groups")
    p.add_argument("--allocation", choices=["weighted", "uniform"], default="weighted")
    p = leaf(meas, "zne", cmd_measure_zne, "zero-noise extrapolation of (factor,value) points")
    p.add_argument("--points", required=True, help="CSV with columns factor,value")
    p.add_argument("--model", choices=["linear", "poly2", "exp"], default="linear")

    p = sub.add_parser("swapnet", parents=[common], help="SWAP-network schedule or compiled circuit",
                       description="SWAP-network schedule or compiled circuit")
    p.set_defaults(fn=cmd_swapnet)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--compile", help="ZZ interaction operator JSON")
    p.add_argument("--t", type=float, default=1.0)

    sched = branch("sched", "workload scheduling simulation")
    p = leaf(sched, "run", cmd_sched_run, "simulate a scenario")
    p.add_argument("--scenario", required=True)

    oracle = branch("oracle", "dense reference computations")
    p = leaf(oracle, "diag", cmd_oracle_diag, "lowest eigenvalues by exact diagonalization")
    p.add_argument("--ham", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--particles", type=int, default=None, help="restrict to a particle-number sector")
    return parser


def _error(exc: CliError) -> int:
    body = {"code": exc.code, "message": exc.message}
    if exc.details is not None:
        body["details"] = exc.details
    sys.stderr.write(json.dumps({"error": body}, sort_keys=True) + "\n")
    return 2


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliError as exc:
        return _error(exc)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    run = _Run(["qcsc", *argv], args)
    try:
        if args.threads is not None:
            if args.threads < 1:
                raise CliError("invalid_argument", "--threads must be >= 1")
            from .statevector import set_num_threads
            set_num_threads(args.threads)
        args.fn(run, args)
    except CliError as exc:
        return _error(exc)
    except ValueError as exc:
        return _error(CliError("invalid_input", str(exc)))
    manifest = dumps(run.manifest())
    if args.manifest:
        Path(args.manifest).write_text(manifest, encoding="utf-8")
    elif args.out and args.fn is cmd_sched_run:
        Path(args.out, "manifest.json").write_text(manifest, encoding="utf-8")
    elif args.out:
        Path(args.out + ".manifest.json").write_text(manifest, encoding="utf-8")
    else:
        sys.stderr.write(json.dumps({"manifest": run.manifest()}, sort_keys=True) + "\n")
    return 0


# operation name used by callers that embed the CLI
dispatch = main


if __name__ == "__main__":
    raise SystemExit(main())
