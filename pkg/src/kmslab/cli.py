"""Command-line front end: ``kmslab {critical-beta, solve, evaluate, verify} INSTANCE``.

JSON reports go to stdout, a short human summary to stderr.  Exit codes:
0 success, 1 input error, 2 no critical beta / no state, 3 verification gate failed.
"""

import argparse
import sys

import numpy as np

from . import fock, states, toeplitz, weights
from .algebra import KmsFunctional, TraceVector
from .correspondence import (induced_trace, induced_trace_functional, inner_product, tensor,
                             tensor_operator, theta)
from .instance import InputError, dumps, load_instance, load_words
from .transfer import (PositiveEnergyError, critical_beta, invariance_residual, invariant_solver,
                       spectral_radius, subinvariance_residual, subinvariant_solver, tensor_generator,
                       transfer_matrix)

EXIT_OK, EXIT_INPUT, EXIT_EMPTY, EXIT_GATE = 0, 1, 2, 3

KMS_GATE = 1e-9
IDENTITY_GATE = 1e-11
PSD_GATE = -1e-9
SOLVER_GATE = 1e-9
WEIGHT_GATE = 1e-9


def _emit(report, summary):
    sys.stdout.write(dumps(report) + "\n")
    sys.stdout.flush()
    for line in summary:
        sys.stderr.write(line + "\n")


def _echo(inst, path):
    return {
        "file": path,
        "block_dims": list(inst.algebra.block_dims),
        "mult": inst.X.mult.tolist(),
        "coeff_dynamics": inst.H is not None,
        "positive_energy": bool(inst.D.positive_energy),
        "min_generator_eigenvalue": inst.D.min_eigenvalue,
    }


def _beta(args, inst):
    beta = args.beta if args.beta is not None else inst.beta
    if beta is None:
        raise InputError("no inverse temperature: pass --beta or set 'beta' in the instance")
    if not beta > 0 or not np.isfinite(beta):
        raise InputError("--beta must be positive and finite")
    return float(beta)


def _spectral(Z):
    sd = spectral_radius(Z)
    return {"radius": sd.r, "lower": sd.lower, "upper": sd.upper, "irreducible": sd.irreducible,
            "perron_vector": None if sd.vector is None else sd.vector}


def _group(inst):
    return weights.TwistedIsometryGroup(inst.D, inst.H)


def _weights(inst, beta):
    if inst.H is None:
        return inst.algebra.dims
    return np.array([np.trace(e).real for e in inst.H.exp(-beta)])


def _solve(inst, beta, target):
    Z = transfer_matrix(inst.X, inst.D, beta)
    w = _weights(inst, beta)
    solver = subinvariant_solver if target == "toeplitz" else invariant_solver
    return Z, solver(Z, inst.algebra, weights=w)


def _state(inst, beta, t, validate=True):
    if inst.H is None:
        return states.KmsState(inst.X, inst.D, beta, TraceVector(inst.algebra, t), validate=validate)
    return states.KmsState(inst.X, _group(inst), beta, KmsFunctional(beta, inst.H, t), validate=validate)


def _sweep(inst, beta_c):
    top = 2.0 * beta_c if beta_c else 2.0
    rows = []
    for b in np.linspace(top / 8, top, 8):
        Z, sub = _solve(inst, b, "toeplitz")
        _, inv = _solve(inst, b, "pimsner")
        rows.append({"beta": b, "radius": spectral_radius(Z).r,
                     "toeplitz_state": sub is not None, "pimsner_state": inv is not None})
    return rows


# --- critical-beta ---------------------------------------------------------

def cmd_critical_beta(args):
    inst = load_instance(args.instance)
    try:
        bc = critical_beta(inst.X, inst.D, tol=args.tol)
    except PositiveEnergyError as exc:
        raise InputError(str(exc))
    report = {"command": "critical-beta", "instance": _echo(inst, args.instance), "tol": args.tol,
              "tag": "critical-temperature"}
    if bc is None:
        r0 = spectral_radius(transfer_matrix(inst.X, inst.D, 0.0)).r
        report.update({"critical_beta": None, "radius_at_zero": r0,
                       "message": "r(Z(beta)) < 1 for all beta >= 0", "sweep": _sweep(inst, None)})
        _emit(report, ["no critical beta: r(Z(beta)) < 1 for all beta >= 0"])
        return EXIT_EMPTY
    Z = transfer_matrix(inst.X, inst.D, bc)
    report.update({"critical_beta": bc, "transfer_matrix": Z.Z, "spectral": _spectral(Z),
                   "sweep": _sweep(inst, bc)})
    _emit(report, ["critical beta = %.10g, r(Z(beta_c)) = %.12g" % (bc, spectral_radius(Z).r)])
    return EXIT_OK


# --- solve -----------------------------------------------------------------

def _wold_report(t, Z, algebra):
    wd = states.wold_decompose(TraceVector(algebra, t), Z)
    s, f, r = wd.residuals(Z)
    mass = wd.tau.mass
    if wd.tau_infinite.mass <= 1e-9 * max(1.0, mass):
        kind = "finite"
    elif wd.tau_finite.mass <= 1e-9 * max(1.0, mass):
        kind = "infinite"
    else:
        kind = "mixed"
    return {"tau_finite": wd.tau_finite.t, "tau_infinite": wd.tau_infinite.t, "tau0": wd.tau0.t,
            "finite_mass": wd.lam, "residuals": {"sum": s, "fixed_point": f, "series": r},
            "type": kind, "tag": "wold-decomposition"}


def cmd_solve(args):
    inst = load_instance(args.instance)
    beta = _beta(args, inst)
    Z, sol = _solve(inst, beta, args.target)
    report = {"command": "solve", "instance": _echo(inst, args.instance), "beta": beta,
              "target": args.target, "transfer_matrix": Z.Z, "spectral": _spectral(Z),
              "tag": "subinvariance" if args.target == "toeplitz" else "invariance-quotient"}
    if sol is None:
        report["solution"] = None
        _emit(report, ["no %s KMS state at beta = %.10g" % (args.target, beta)])
        return EXIT_EMPTY
    t = sol.t
    wd = _wold_report(t, Z, inst.algebra)
    report["solution"] = {
        "t": t,
        "normalization_weights": _weights(inst, beta),
        "subinvariance_residual": subinvariance_residual(sol, Z),
        "invariance_residual": invariance_residual(sol, Z),
        "descends_to_quotient": bool(invariance_residual(sol, Z) <= SOLVER_GATE),
        "wold": wd,
    }
    _emit(report, ["%s state at beta = %.10g: t = %s, type %s"
                   % (args.target, beta, np.array2string(t, precision=10), wd["type"])])
    return EXIT_OK


# --- evaluate --------------------------------------------------------------

def _trace_for(inst, beta):
    if inst.trace is not None:
        return inst.trace.t, "instance"
    _, sol = _solve(inst, beta, "toeplitz")
    if sol is None:
        return None, None
    return sol.t, "subinvariant-solver"


def cmd_evaluate(args):
    inst = load_instance(args.instance)
    beta = _beta(args, inst)
    words = load_words(inst.X, args.words)
    t, source = _trace_for(inst, beta)
    report = {"command": "evaluate", "instance": _echo(inst, args.instance), "beta": beta,
              "tag": "two-point-function"}
    if t is None:
        report["values"] = None
        _emit(report, ["no KMS state at beta = %.10g" % beta])
        return EXIT_EMPTY
    try:
        phi = _state(inst, beta, t)
    except ValueError as exc:
        raise InputError("trace.t: %s" % exc)
    values = []
    for word, el in words:
        val = phi(el)
        values.append({"m": word.m, "n": word.n, "balanced": word.m == word.n, "value": val})
    report.update({"trace": t, "trace_source": source, "values": values})
    _emit(report, ["phi(word %d) = %.12g%+.12gi" % (i, v["value"].real, v["value"].imag)
                   for i, v in enumerate(values)])
    return EXIT_OK


# --- verify ----------------------------------------------------------------

def _gate(sections, name, tag, value, limit, passed=None, **extra):
    ok = (value <= limit) if passed is None else passed
    sections.append(dict({"check": name, "tag": tag, "value": value, "gate": limit, "passed": bool(ok)},
                         **extra))
    return ok


def _random_elements(X, rng, degree, count):
    return [toeplitz.random_element(X, rng, degree, num_terms=2) for _ in range(count)]


def _unit_words(X, rng, m, n):
    w = toeplitz.random_word(X, rng, m, n)
    return toeplitz.MonomialWord(tuple(v * (1.0 / v.norm()) for v in w.left),
                                 tuple(v * (1.0 / v.norm()) for v in w.right))


def cmd_verify(args):
    inst = load_instance(args.instance)
    beta = _beta(args, inst)
    X = inst.X
    rng = np.random.default_rng(args.seed)
    checks = []
    report = {"command": "verify", "instance": _echo(inst, args.instance), "beta": beta,
              "seed": args.seed, "max_degree": args.max_degree, "fock_level": args.fock_level}
    Z, sol = _solve(inst, beta, "toeplitz")
    if sol is None:
        report["checks"] = []
        report["message"] = "no KMS state at this beta"
        _emit(report, ["no KMS state at beta = %.10g; nothing to verify" % beta])
        return EXIT_EMPTY
    t = sol.t
    state_beta = beta
    if args.perturb:
        # negative control: keep tau but raise the temperature, breaking subinvariance
        state_beta = beta - args.perturb
        report["perturbation"] = {"beta_shift": -args.perturb, "state_beta": state_beta}
    phi = _state(inst, state_beta, t, validate=not args.perturb)
    Zs = transfer_matrix(X, inst.D, state_beta)
    tv = TraceVector(X.algebra, t)
    report["trace"] = t

    _gate(checks, "subinvariance", "subinvariance", subinvariance_residual(tv, Zs), SOLVER_GATE)

    # KMS residuals on random elements
    worst = 0.0
    for _ in range(args.pairs):
        x, y = _random_elements(X, rng, args.max_degree, 2)
        worst = max(worst, states.verify_kms(phi, x, y) / states.kms_scale(phi, x, y))
    _gate(checks, "kms-residual", "kms-condition", worst, KMS_GATE, pairs=args.pairs)

    # positivity of moment matrices: unit, algebra units and degree <= 1 basis words
    elems = states.basis_words(X, 1) + states.algebra_elements(X)
    elems += [states.defect_element(a, X) for a in X.algebra.matrix_units()[:4]]
    elems += [toeplitz.ToeplitzElement.from_word(X, toeplitz.MonomialWord((xi,), (eta,)))
              for xi in X.frame()[:4] for eta in X.frame()[:4]]
    mineig = states.moment_matrix_psd(phi, elems)
    _gate(checks, "moment-matrix", "positivity", -mineig, -PSD_GATE, min_eigenvalue=mineig)

    if inst.H is None:
        worst = 0.0
        for _ in range(20):
            xi, eta = X.random_vector(rng), X.random_vector(rng)
            worst = max(worst, states.two_point_identity_residual(phi, xi, eta)
                        / max(1.0, xi.norm() * eta.norm()))
        _gate(checks, "two-point-identity", "two-point-function", worst, IDENTITY_GATE)

    # induced traces and induction in stages
    worst_id = worst_st = 0.0
    for _ in range(10):
        xi, eta = X.random_vector(rng), X.random_vector(rng)
        lhs = induced_trace(tv, theta(xi, eta))
        rhs = tv(inner_product(eta, xi))
        worst_id = max(worst_id, abs(lhs - rhs) / max(1.0, abs(rhs)))
        S = X.random_operator(rng)
        T = X.random_bimodule_operator(rng, positive=True)
        lhs = induced_trace(tv, tensor_operator(S, T))
        rhs = induced_trace(induced_trace_functional(tv, T), S)
        worst_st = max(worst_st, abs(lhs - rhs) / max(1.0, abs(rhs)))
    _gate(checks, "induced-trace", "induced-trace", worst_id, IDENTITY_GATE)
    _gate(checks, "induction-in-stages", "induction-in-stages", worst_st, IDENTITY_GATE)
    XX = tensor(X, X)
    Z2 = transfer_matrix(XX, tensor_generator(inst.D, inst.D), beta).Z
    comp = float(np.max(np.abs(Z2 - Z.Z @ Z.Z)) / max(1.0, np.max(np.abs(Z2))))
    _gate(checks, "transfer-composition", "induction-in-stages", comp, IDENTITY_GATE)

    wd = _wold_report(t, Z, X.algebra)
    _gate(checks, "wold", "wold-decomposition", max(wd["residuals"].values()), SOLVER_GATE,
          type=wd["type"])

    if inst.H is not None and X.is_full():
        U = _group(inst)
        fphi = KmsFunctional(beta, inst.H, t)
        kappa = weights.induce_weight(fphi, X, U)
        _gate(checks, "weight-defining-property", "induced-weight",
              weights.defining_property_residual(kappa, fphi), 1e-10)
        back = weights.restrict_weight(kappa)
        _gate(checks, "weight-round-trip", "induced-weight-bijection",
              float(np.max(np.abs(back.c - fphi.c))), WEIGHT_GATE)
        fg = weights.apply_F_general(fphi, X, U)
        fd = weights.apply_F_definitional(fphi, X, U)
        _gate(checks, "general-transfer", "general-transfer", float(np.max(np.abs(fg.c - fd.c))),
              WEIGHT_GATE)
        ops = [X.random_operator(rng, positive=True) for _ in range(3)]
        _gate(checks, "weight-stages", "weight-induction-in-stages",
              weights.weight_stages_check(X, X, U, U, fphi, ops), WEIGHT_GATE)

    # Fock cross-validation for finite-type states
    r_upper = spectral_radius(Zs).upper
    if r_upper < 1.0 and inst.H is None:
        N = args.fock_level
        tau0 = TraceVector(X.algebra, np.clip(t - Zs.Z.T @ t, 0.0, None))
        try:
            F = fock.build_fock(X, N, cap=args.cap_dimension)
        except MemoryError as exc:
            checks.append({"check": "fock-cross-validation", "tag": "fock-realization",
                           "skipped": str(exc), "passed": True})
            F = None
        if F is not None:
            Phi = fock.FockState(tau0, F, inst.D, state_beta)
            worst_part = 0.0
            worst_ratio = 0.0
            for _ in range(10):
                k = int(rng.integers(0, min(3, N) + 1))
                el = toeplitz.ToeplitzElement.from_word(X, _unit_words(X, rng, k, k))
                spatial = Phi(fock.element_matrix(el, F))
                part = states.KmsState(X, inst.D, state_beta, fock.partial_trace(tau0, inst.D, state_beta, N - k),
                                       validate=False)(el)
                worst_part = max(worst_part, abs(spatial - part))
                # a degree-k word sees levels k..N, so the missing series starts after N - k
                tb = fock.tail_bound(tau0, inst.D, state_beta, N - k)
                worst_ratio = max(worst_ratio, abs(spatial - phi(el)) / tb.bound if tb.bound > 0 else 0.0)
            _gate(checks, "fock-partial-evaluation", "fock-realization", worst_part, IDENTITY_GATE)
            _gate(checks, "fock-tail", "fock-realization", worst_ratio, 1.0, r_upper=tb.r_upper, level=N)
    else:
        checks.append({"check": "fock-cross-validation", "tag": "fock-realization",
                       "skipped": "state is not of finite type" if r_upper >= 1.0
                       else "spatial realization implemented for trivial coefficient dynamics",
                       "passed": True})

    report["checks"] = checks
    failed = [c["check"] for c in checks if not c["passed"]]
    report["all_passed"] = not failed
    summary = ["%-26s %s" % (c["check"], "PASS" if c["passed"] else "FAIL") for c in checks]
    _emit(report, summary)
    return EXIT_GATE if failed else EXIT_OK


# --- entry point -----------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="kmslab", description="KMS states of quasi-free dynamics")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("critical-beta", help="inverse temperature where r(Z(beta)) = 1")
    c.add_argument("instance")
    c.add_argument("--tol", type=float, default=1e-12)
    c.set_defaults(func=cmd_critical_beta)

    s = sub.add_parser("solve", help="a KMS state at a given beta")
    s.add_argument("instance")
    s.add_argument("--beta", type=float)
    s.add_argument("--target", choices=("toeplitz", "pimsner"), default="toeplitz")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("evaluate", help="state values on words")
    e.add_argument("instance")
    e.add_argument("--beta", type=float)
    e.add_argument("--words", required=True)
    e.set_defaults(func=cmd_evaluate)

    v = sub.add_parser("verify", help="randomized verification suite")
    v.add_argument("instance")
    v.add_argument("--beta", type=float)
    v.add_argument("--seed", type=int, required=True)
    v.add_argument("--max-degree", type=int, default=3)
    v.add_argument("--fock-level", type=int, default=6)
    v.add_argument("--cap-dimension", type=int, default=fock.DEFAULT_CAP)
    v.add_argument("--pairs", type=int, default=50)
    v.add_argument("--perturb", type=float, default=0.0,
                   help="negative control: evaluate the state at beta - PERTURB with the same trace")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write("input error: %s\n" % exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
