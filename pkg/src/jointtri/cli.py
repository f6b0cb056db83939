"""Command-line front end.

Subcommands: generate, triangularize, bounds, tensor, sweep, verify.
Exit codes: 0 success, 1 usage error, 2 numerical-precondition error
(the error class name goes to stderr).
"""

import argparse
import sys

import numpy as np

from . import bounds as bd
from . import harness as hz
from . import io
from . import tensor as tn
from . import triangularize as tri
from .errors import DimensionMismatch, JointTriError, LineSearchStalled


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="jointtri",
        description="Approximate joint triangularization and bound verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic model or tensor")
    gen.add_argument("--kind", choices=["model", "tensor"], required=True)
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--N", type=int, required=True)
    gen.add_argument("--kappa", type=float, default=2.0)
    gen.add_argument("--gamma", type=float, default=1.0)
    gen.add_argument("--sigma", type=float, default=0.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--output", required=True)

    tria = sub.add_parser("triangularize", help="triangularize a matrix set")
    tria.add_argument("--input", required=True)
    tria.add_argument("--output", required=True)
    tria.add_argument("--beta", choices=["ones", "random"], default="ones")
    tria.add_argument("--sigma", type=float, default=0.0)
    tria.add_argument("--tol", type=float, default=1e-10)
    tria.add_argument("--max-iters", type=int, default=2000)
    tria.add_argument("--seed", type=int, default=0)

    bnd = sub.add_parser("bounds", help="full bound report for a model")
    bnd.add_argument("--input", required=True)
    bnd.add_argument("--frame", help="candidate frame JSON; computed if omitted")
    bnd.add_argument("--output", required=True)
    bnd.add_argument("--beta", choices=["ones", "random"], default="ones")
    bnd.add_argument("--tol", type=float, default=1e-10)
    bnd.add_argument("--max-iters", type=int, default=2000)
    bnd.add_argument("--seed", type=int, default=0)

    ten = sub.add_parser("tensor", help="decompose a third-order tensor")
    ten.add_argument("--input", required=True)
    ten.add_argument("--output", required=True)
    ten.add_argument("--d", type=int, required=True)
    ten.add_argument("--theta", choices=["ones", "random"], default="ones")
    ten.add_argument("--tol", type=float, default=1e-10)
    ten.add_argument("--max-iters", type=int, default=2000)
    ten.add_argument("--seed", type=int, default=0)

    swp = sub.add_parser("sweep", help="noise-scaling study")
    swp.add_argument("--input", required=True)
    swp.add_argument("--output", required=True)
    swp.add_argument(
        "--sigmas", default="1e-3,5e-4,2.5e-4,1.25e-4",
        help="comma-separated decreasing noise grid",
    )
    swp.add_argument("--trials", type=int, default=1)
    swp.add_argument("--seed", type=int, default=0)

    ver = sub.add_parser("verify", help="bound containment study")
    ver.add_argument("--input", required=True)
    ver.add_argument("--output", required=True)
    ver.add_argument("--sigma", type=float, default=1e-3)
    ver.add_argument("--trials", type=int, default=100)
    ver.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_generate(args):
    if args.kind == "model":
        spec = hz.GeneratorSpec(
            d=args.d,
            n=args.N,
            kappa_target=args.kappa,
            gamma_target=args.gamma,
            seed=args.seed,
        )
        gt = hz.gen_ground_truth(spec, sigma=args.sigma)
        io.dump_canonical(io.ground_truth_to_dict(gt), args.output)
    else:
        if args.d != args.N:
            raise DimensionMismatch("tensor generation requires d = N")
        z = hz.gen_components(args.d, kappa_target=args.kappa, seed=args.seed)
        t = hz.gen_tensor(z, args.sigma, 1.0, seed=args.seed)
        extra = {
            "Z": [row.tolist() for row in z],
            "sigma": args.sigma,
            "eps": 1.0,
        }
        io.dump_canonical(io.tensor_to_dict(t, extra=extra), args.output)
    return 0


def _converge(mset, args, strategy):
    beta, _ = tri.find_separating_beta(mset, strategy=strategy, seed=args.seed)
    u_init = tri.schur_initializer(mset, beta)
    config = tri.OptimizerConfig(max_iters=args.max_iters, grad_tol=args.tol)
    try:
        u, trace = tri.descend(mset, u_init, config)
    except LineSearchStalled as stall:
        u, trace = stall.frame, stall.trace
    return u, beta, trace


def _cmd_triangularize(args):
    data = io.load(args.input)
    if "matrices" in data:
        mset = io.matrix_set_from_dict(data)
    else:
        # model file: assemble the observed (noisy) matrix set
        mset = io.ground_truth_from_dict(data).observed_matrices()
    u, beta, trace = _converge(mset, args, args.beta)
    report = {
        "frame": io.frame_to_dict(u),
        "beta": beta.tolist(),
        "loss": tri.loss(u, mset),
        "aposteriori": bd.a_posteriori_bound(mset, u, beta, args.sigma),
        "trace": {
            "loss": trace.loss_values,
            "grad_norms": trace.grad_norms,
            "steps": trace.step_lengths,
            "termination": trace.termination,
        },
    }
    io.dump_canonical(report, args.output)
    return 0


def _cmd_bounds(args):
    gt = io.ground_truth_from_dict(io.load(args.input))
    observed = gt.observed_matrices()
    if args.frame:
        u = io.frame_from_dict(io.load(args.frame))
        beta, _ = tri.find_separating_beta(
            observed, strategy=args.beta, seed=args.seed
        )
    else:
        u, beta, _ = _converge(observed, args, args.beta)
    family = hz.enumerate_exact_triangularizers(gt)
    alpha, idx, _ = hz.nearest_direction(u, family)
    u_circ = family.frames[idx]
    u_init = tri.schur_initializer(observed, beta)
    sigma_max, alpha_max, constants = bd.init_noise_threshold(gt, beta, u_init)
    clean = gt.clean_matrices()
    eig_bound = max(
        bd.eigenvalue_error_bound(
            alpha, gt.sigma, np.linalg.norm(m), np.linalg.norm(w)
        )
        for m, w in zip(clean.matrices, gt.noise)
    )
    explicit, gamma = bd.explicit_bound(gt)
    report = bd.BoundReport(
        alpha_apriori=bd.a_priori_bound(gt, u_circ),
        alpha_explicit=explicit,
        alpha_aposteriori=bd.a_posteriori_bound(observed, u, beta, gt.sigma),
        gamma=gamma,
        epsilon=constants["epsilon"],
        a_alpha=constants["a_alpha"],
        a_sigma=constants["a_sigma"],
        alpha_max=alpha_max,
        sigma_max=sigma_max,
        eigenvalue_error=eig_bound,
        observed_alpha=alpha,
        predicted_direction=bd.predicted_direction(gt, u_circ),
    )
    io.dump_canonical(report.to_dict(), args.output)
    return 0


def _cmd_tensor(args):
    data = io.load(args.input)
    t = io.tensor_from_dict(data)
    rng = np.random.default_rng(args.seed)
    if args.theta == "ones":
        theta = np.ones(t.n) / np.sqrt(t.n)
    else:
        theta = rng.standard_normal(t.n)
        theta /= np.linalg.norm(theta)
    mset, reduction = tn.observable_matrices(t, args.d, theta)
    u, beta, trace = _converge(mset, args, "ones")
    y = tn.estimate_components(u, mset)
    weights = np.sqrt(t.n) * theta
    pencil = sum(w * m for w, m in zip(weights, tn.slices(t)))
    if reduction is not None:
        u_d, v_d = reduction
        pencil = u_d.T @ pencil @ v_d
    z_star = tn.recover_scales(pencil, y, theta)
    report = {
        "Z_star": [row.tolist() for row in z_star],
        "theta": theta.tolist(),
        "loss": tri.loss(u, mset),
        "frame": io.frame_to_dict(u),
    }
    if "Z" in data:
        z = np.asarray(data["Z"], dtype=float)
        eps = float(data.get("eps", 1.0))
        sigma = float(data.get("sigma", 0.0))
        report["component_bound"] = tn.component_error_bound(z, eps, sigma)
        reference = z / z.sum(axis=0)
        matched, _ = tn.match_columns(y, reference)
        report["component_error"] = float(np.max(np.abs(matched - reference)))
    io.dump_canonical(report, args.output)
    return 0


def _cmd_sweep(args):
    gt = io.ground_truth_from_dict(io.load(args.input))
    sigmas = [float(s) for s in args.sigmas.split(",") if s]
    report = hz.sigma_sweep(gt, sigmas, trials=args.trials, seed=args.seed)
    io.dump_canonical(
        {
            "sigmas": report.sigmas,
            "records": report.records,
            "direction_residual_slope": report.direction_residual_slope,
            "observed_alpha_slope": report.observed_alpha_slope,
        },
        args.output,
    )
    return 0


def _cmd_verify(args):
    gt = io.ground_truth_from_dict(io.load(args.input))
    summary = hz.verify_bounds(gt, args.sigma, args.trials, seed=args.seed)
    io.dump_canonical(summary, args.output)
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "triangularize": _cmd_triangularize,
    "bounds": _cmd_bounds,
    "tensor": _cmd_tensor,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
}


def run(argv):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return _COMMANDS[args.command](args)
    except JointTriError as exc:
        print(type(exc).__name__, file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
