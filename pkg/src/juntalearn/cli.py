"""Command-line harness: juntalearn {gen,learn,test,reduce,calibrate,bench}.

Exit codes: 0 success, 1 usage or config error, 2 contract violation,
3 success rate below target under --assert.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import experiments as ex
from .config import CONFIG_ENV, Constants, load_constants
from .dist import JuntaDistribution, NoisyParityDistribution, SampleBatch, random_junta
from .errors import ContractError, JuntaError, NoCandidate, SearchFloorReached
from .formats import dist_to_doc, read_dist, read_samples, write_dist
from .learner import LearnerConfig, learn_junta
from .rng import Rng

EXIT_OK, EXIT_USAGE, EXIT_CONTRACT, EXIT_BELOW = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _coords(text: str | None) -> tuple[int, ...]:
    """'2,5,11' (1-based) -> (1, 4, 10)."""
    if not text or text in ("-", "none"):
        return ()
    return tuple(sorted(int(t) - 1 for t in text.replace(";", ",").split(",") if t.strip()))


def _need_seed(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required for randomized commands")
    return args.seed


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _summary(rows, key: str, target: float | None, args) -> int:
    rate = float(np.mean([r[key] for r in rows])) if rows else 0.0
    msg = f"{key} rate {rate:.3f} over {len(rows)} trials"
    if target is not None:
        msg += f" (target {target})"
    print(msg, file=sys.stderr)
    if args.assert_ and target is not None and rate < target:
        return EXIT_BELOW
    return EXIT_OK


# -- commands ------------------------------------------------------------------


def cmd_gen(args, constants: Constants) -> int:
    if args.type == "uniform":
        D = JuntaDistribution.uniform(args.n)
    elif args.type == "noisy-parity":
        J = _coords(args.J)
        if not J:
            raise UsageError("--J is required for noisy-parity")
        D = NoisyParityDistribution(args.n, J, args.sign, args.eta)
    else:
        seed = _need_seed(args)
        if args.k is None:
            raise UsageError("--k is required for a random junta")
        D = random_junta(args.n, args.k, Rng(seed), _coords(args.J) or None)
    truth = {"relevant": [c + 1 for c in ex.truth_set(D)],
             "nonzero_biases": [{"A": [c + 1 for c in A], "c": v}
                                for A, v in ex.as_junta_biases(D).items()]}
    if args.seed is not None:
        truth["seed"] = args.seed
    if args.out:
        write_dist(args.out, D, truth)
    else:
        print(json.dumps(dist_to_doc(D, truth), indent=2))
    return EXIT_OK


def cmd_learn(args, constants: Constants) -> int:
    if args.input:
        # learn one hypothesis from a sample file
        batch = read_samples(args.input)
        if args.k is None:
            raise UsageError("--k is required")
        cfg = LearnerConfig(batch.n, args.k, args.eps, constants, strict=not args.non_strict)
        Q, trace = learn_junta(SampleBatch(batch.bits, batch.n), cfg)
        doc = dist_to_doc(Q, {"trace": trace.to_dict(), "m": batch.m})
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
        return EXIT_OK
    seed = _need_seed(args)
    truth = read_dist(args.spec) if args.spec else None
    n = truth.n if truth is not None else args.n
    if n is None or args.k is None:
        raise UsageError("--n (or --spec) and --k are required")
    setup = ex.LearnSetup(n, args.k, args.eps, args.plant, args.eta, args.samples, not args.non_strict, constants)
    setup.config().check_batch(setup.m())
    rows = ex.run_trials(lambda i: ex.learn_trial(setup, seed, i, truth), args.trials, args.threads)
    _emit(ex.rows_to_csv(rows), args.out)
    return _summary(rows, "success", args.target, args)


def cmd_test(args, constants: Constants) -> int:
    seed = _need_seed(args)
    setup = ex.TesterSetup(args.s, args.alpha, args.eps, args.delta, args.dist, args.reference, args.samples,
                           not args.non_strict, constants)
    rows = ex.run_trials(lambda i: ex.tester_trial(setup, seed, i), args.trials, args.threads)
    for r in rows:
        r["correct"] = ex.tester_correct(r["verdict"], r["truth_l1"], setup.alpha, setup.eps)
    _emit(ex.rows_to_csv(rows), args.out)
    return _summary(rows, "correct", args.target, args)


def cmd_reduce(args, constants: Constants) -> int:
    from . import reduction_trials as rt

    seed = _need_seed(args)
    runner = {"lpn-to-ljd": rt.lpn_to_ljd_trial, "ljd-to-lpn": rt.ljd_to_lpn_trial,
              "lpdn-to-lpn": rt.lpdn_to_lpn_trial}[args.which]
    opts = rt.ReduceSetup(
        n=args.n, k=args.k, eps=args.eps, eta=args.eta, S=_coords(args.S) if args.S is not None else None,
        solver=args.solver, rounds=args.rounds, constants=constants,
    )
    results = ex.run_trials(lambda i: runner(opts, seed, i), args.trials, args.threads)
    rows = [r for r, _ in results]
    _emit(ex.rows_to_csv(rows), args.out)
    if args.transcript:
        Path(args.transcript).write_text("".join(json.dumps(t, sort_keys=True) + "\n" for _, t in results))
    return _summary(rows, "success", args.target, args)


def cmd_calibrate(args, constants: Constants) -> int:
    seed = _need_seed(args)
    which = ["tester", "fourier", "learner"] if args.which == "all" else [args.which]
    trials = {}
    if args.trials is not None:
        trials = {w: args.trials for w in which}
    t0 = time.perf_counter()
    doc = ex.calibrate(which, seed, constants, trials, args.margin)
    doc["calibration"]["wall_time"] = round(time.perf_counter() - t0, 2)
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_bench(args, constants: Constants) -> int:
    seed = _need_seed(args)
    defaults = {"n": "16,64,256,1024", "k": "1,2,3", "eps": "0.4,0.2,0.1"}
    values = [v for v in (args.values or defaults[args.sweep]).split(",") if v]
    base = ex.LearnSetup(args.n or 64, args.k or 2, args.eps, args.plant, args.eta, None, False, constants)
    rows = ex.bench(args.sweep, values, base, args.trials, seed, args.target or 0.9)
    _emit(ex.rows_to_csv(rows), args.out)
    if args.sweep == "n" and len(rows) > 1 and all(r["m_min"] > 0 for r in rows):
        shape = ex.log_n_shape(rows, base.k, base.eps, constants.learner)
        print(json.dumps(shape), file=sys.stderr)
        if args.assert_ and (shape["diff"] > shape["allowed"] or shape["ratio"] > 2):
            return EXIT_BELOW
    elif args.assert_ and any(r["m_min"] <= 0 for r in rows):
        return EXIT_BELOW
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="juntalearn", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--out")
    common.add_argument("--config", help=f"constants file (default: ${CONFIG_ENV} or the shipped one)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--assert", dest="assert_", action="store_true", help="exit 3 when below --target")
    common.add_argument("--target", type=float)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="write a planted distribution spec")
    g.add_argument("--type", choices=["junta", "noisy-parity", "uniform"], required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int)
    g.add_argument("--J", help="1-based coordinates, comma-separated")
    g.add_argument("--sign", type=int, choices=[1, -1], default=1)
    g.add_argument("--eta", type=float, default=0.0)
    g.set_defaults(func=cmd_gen)

    lr = sub.add_parser("learn", parents=[common], help="seeded learner trials")
    lr.add_argument("--spec", help="planted truth; otherwise --plant families are drawn per trial")
    lr.add_argument("--input", help="learn once from a sample file and print the hypothesis")
    lr.add_argument("--plant", choices=["mixed", *ex.PLANTS], default="mixed")
    lr.add_argument("--n", type=int)
    lr.add_argument("--k", type=int)
    lr.add_argument("--eps", type=float, default=0.1)
    lr.add_argument("--eta", type=float, default=0.1)
    lr.add_argument("--samples", type=int)
    lr.add_argument("--trials", type=int, default=100)
    lr.add_argument("--non-strict", action="store_true", help="skip sample-size preconditions")
    lr.set_defaults(func=cmd_learn, target=None)

    t = sub.add_parser("test", parents=[common], help="seeded tolerant identity tests")
    t.add_argument("--s", type=int, default=16, help="support size (power of two)")
    t.add_argument("--alpha", type=float, default=0.0)
    t.add_argument("--eps", type=float, default=0.25)
    t.add_argument("--delta", type=float, default=0.05)
    t.add_argument("--dist", type=float, default=0.0, help="true L1 distance of D from the reference")
    t.add_argument("--reference", choices=["random", "uniform"], default="random")
    t.add_argument("--samples", type=int)
    t.add_argument("--trials", type=int, default=200)
    t.add_argument("--non-strict", action="store_true")
    t.set_defaults(func=cmd_test)

    r = sub.add_parser("reduce", parents=[common], help="end-to-end reduction trials")
    r.add_argument("which", choices=["lpn-to-ljd", "ljd-to-lpn", "lpdn-to-lpn"])
    r.add_argument("--n", type=int, default=10)
    r.add_argument("--k", type=int, default=2)
    r.add_argument("--S", help="planted set, 1-based (LPN secret or parity set); '-' for empty")
    r.add_argument("--eps", type=float, default=0.1)
    r.add_argument("--eta", type=float, default=0.0)
    r.add_argument("--solver", choices=["lpn", "scan"], default="lpn", help="LPDN slot for ljd-to-lpn")
    r.add_argument("--rounds", type=int, help="override the heavy-coefficient round count")
    r.add_argument("--trials", type=int, default=100)
    r.add_argument("--transcript", help="JSON-lines transcript path")
    r.set_defaults(func=cmd_reduce)

    c = sub.add_parser("calibrate", parents=[common], help="fit the sample-bound constants")
    c.add_argument("--which", choices=["tester", "fourier", "learner", "all"], default="all")
    c.add_argument("--trials", type=int)
    c.add_argument("--margin", type=float, default=1.25)
    c.set_defaults(func=cmd_calibrate)

    b = sub.add_parser("bench", parents=[common], help="bisected minimal-m sweeps")
    b.add_argument("--sweep", choices=["n", "k", "eps"], default="n")
    b.add_argument("--values", help="comma-separated sweep values")
    b.add_argument("--n", type=int)
    b.add_argument("--k", type=int)
    b.add_argument("--eps", type=float, default=0.2)
    b.add_argument("--eta", type=float, default=0.1)
    b.add_argument("--plant", choices=["mixed", *ex.PLANTS], default="mixed")
    b.add_argument("--trials", type=int, default=50)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        constants = load_constants(args.config)
    except (OSError, ValueError) as e:
        print(f"juntalearn: config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if args.threads < 1:
        print("juntalearn: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, constants)
    except UsageError as e:
        print(f"juntalearn: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ContractError as e:
        print(f"juntalearn: contract violation: {e}", file=sys.stderr)
        return EXIT_CONTRACT
    except (NoCandidate, SearchFloorReached, JuntaError, ValueError) as e:
        print(f"juntalearn: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
