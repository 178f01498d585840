"""Command-line front end.

Every subcommand loads its inputs from the JSON encodings in
:mod:`qcontext.serialize`, runs one library operation and prints a report
that carries the residual behind its verdict.

Exit codes: 0 affirmative verdict (or successful computation), 1 negative
verdict, 2 unreadable input or bad usage, 3 non-square matrix, 4 failed
validation, 5 cross-check mismatch, 64 unknown subcommand.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import channel as ch
from . import measure, mub, opcore, serialize, sharp_order
from .errors import NonSquare, ParseError, QContextError, VerdictMismatch

EXIT_OK, EXIT_NEGATIVE, EXIT_PARSE, EXIT_NONSQUARE, EXIT_INVALID, EXIT_MISMATCH = 0, 1, 2, 3, 4, 5
EXIT_UNKNOWN_COMMAND = 64

CLASS_ORDER = [
    opcore.OperatorClass.SELF_ADJOINT,
    opcore.OperatorClass.POSITIVE,
    opcore.OperatorClass.EFFECT,
    opcore.OperatorClass.PROJECTION,
    opcore.OperatorClass.RANK_ONE_PROJECTION,
    opcore.OperatorClass.DENSITY,
    opcore.OperatorClass.UNITARY,
    opcore.OperatorClass.GENERAL,
]


class UsageError(Exception):
    def __init__(self, message, code=EXIT_PARSE):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        code = EXIT_UNKNOWN_COMMAND if "invalid choice" in message and "command" in message \
            else EXIT_PARSE
        raise UsageError(message, code)


# ---------------------------------------------------------------- loaders

def load_matrix(path):
    return serialize.decode_matrix(serialize.load_json(path))


def load_channel(path, tol):
    return ch.make_channel(serialize.decode_branches(serialize.load_json(path)), tol)


def load_sharp(path, tol):
    obj = serialize.load_json(path)
    if "basis" in obj:
        return sharp_order.context_from_basis(serialize.decode_basis(obj), tol)
    return sharp_order.as_sharp(ch.make_channel(serialize.decode_branches(obj), tol), tol)


def load_context(path, tol):
    return sharp_order.as_context(load_sharp(path, tol), tol)


def load_any_channel(path, tol):
    obj = serialize.load_json(path)
    if "basis" in obj:
        return sharp_order.context_from_basis(serialize.decode_basis(obj), tol)
    return ch.make_channel(serialize.decode_branches(obj), tol)


def load_povm(path, tol):
    outcomes, effects = serialize.decode_povm_parts(serialize.load_json(path))
    return measure.make_povm(outcomes, effects, tol)


def load_joint(path, tol):
    xs, ys, grid = serialize.decode_joint_parts(serialize.load_json(path))
    return measure.make_joint(xs, ys, grid, tol)


def _c(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


# ---------------------------------------------------------------- commands

def cmd_classify(args):
    A = load_matrix(args.path)
    classes = opcore.classify(A, args.tolerance)
    names = [c.value for c in CLASS_ORDER if c in classes]
    return {"classes": names, "residuals": opcore.classification_residuals(A)}, EXIT_OK


def cmd_check(args):
    tol = args.tolerance
    if args.kind == "povm":
        povm = load_povm(args.path, tol)
        residual = float(np.linalg.norm(sum(povm.effects) - np.eye(povm.dim)))
        return {"povm": True, "outcomes": list(povm.outcomes), "completeness_residual": residual}, \
            EXIT_OK
    C = load_any_channel(args.path, tol)
    left, right = ch.unitality_residuals(C.branches)
    report = {"channel": True, "unitality_residual_left": left, "unitality_residual_right": right}
    if args.kind == "channel":
        return report, EXIT_OK
    S = sharp_order.as_sharp(C, tol)
    report["sharp"] = True
    report["projection_residual"] = max(float(np.linalg.norm(P @ P - P)) for P in S.branches)
    if args.kind == "sharp":
        return report, EXIT_OK
    is_ctx = sharp_order.context_via_commutation(S, trials=64, seed=args.seed, tol=tol)
    report["context"] = is_ctx
    report["rank_residual"] = max(float(abs(np.trace(P) - 1)) for P in S.branches)
    if is_ctx:
        ctx = sharp_order.as_context(S, tol)
        report["basis"] = [[_c(z) for z in ctx.basis[:, i]] for i in range(ctx.dim)]
    return report, EXIT_OK if is_ctx else EXIT_NEGATIVE


def cmd_apply(args):
    C = load_any_channel(args.channel, args.tolerance)
    A = load_matrix(args.matrix)
    out = ch.apply_map(C, A)
    t_in, t_out = np.trace(A), np.trace(out)
    return {"output": serialize.encode_matrix(out), "trace_in": _c(t_in), "trace_out": _c(t_out),
            "trace_residual": float(abs(t_in - t_out))}, EXIT_OK


def cmd_compose(args):
    tol = args.tolerance
    a, b = load_any_channel(args.a, tol), load_any_channel(args.b, tol)
    c = ch.compose(a, b, tol)
    residual = max(
        float(np.linalg.norm(ch.apply_map(c, E) - ch.apply_map(a, ch.apply_map(b, E))))
        for _, E in opcore.matrix_units(a.dim)
    )
    return {"channel": serialize.encode_channel(c), "homomorphism_residual": residual}, EXIT_OK


def cmd_maps_equal(args):
    tol = args.tolerance
    a, b = load_any_channel(args.a, tol), load_any_channel(args.b, tol)
    distance = ch.map_distance(a, b)
    equal = distance <= tol
    return {"equal": equal, "distance": distance}, EXIT_OK if equal else EXIT_NEGATIVE


def cmd_order(args):
    tol = args.tolerance
    a, b = load_sharp(args.a, tol), load_sharp(args.b, tol)
    res = sharp_order.sharp_le(a, b, tol)
    report = {"le": res["le"]}
    if res["le"]:
        report["decomposition"] = {f"Q{q + 1}": [i + 1 for i in members]
                                   for q, members in res["decomposition"].items()}
        report["product_residual"] = ch.map_distance(ch.compose(a, b, tol), a)
    return report, EXIT_OK if res["le"] else EXIT_NEGATIVE


def cmd_eq31(args):
    tol = args.tolerance
    rep = mub.eq31_check(load_context(args.a, tol), load_context(args.b, tol), tol)
    return rep.to_dict(), EXIT_OK if rep.holds else EXIT_NEGATIVE


def cmd_cor33(args):
    tol = args.tolerance
    a, b = load_context(args.a, tol), load_context(args.b, tol)
    verdicts = mub.cor33_equivalences(a, b, tol)
    residual = max(
        float(np.linalg.norm(ch.apply_map(a, ch.apply_map(b, E)) - ch.random_map_apply(E)))
        for _, E in opcore.matrix_units(a.dim)
    )
    report = dict(verdicts, random_map_residual=residual)
    return report, EXIT_OK if verdicts["mub"] else EXIT_NEGATIVE


def cmd_mub(args):
    tol = args.tolerance
    v = mub.mutually_unbiased(load_context(args.a, tol), load_context(args.b, tol), tol)
    return v.to_dict(), EXIT_OK if v.mutually_unbiased else EXIT_NEGATIVE


def cmd_unbiased(args):
    tol = args.tolerance
    C = load_any_channel(args.channel, tol)
    A = load_matrix(args.matrix)
    verdict = mub.is_unbiased_operator(A, C, tol)
    return {"unbiased": verdict, "residual": mub.unbiased_residual(A, C)}, \
        EXIT_OK if verdict else EXIT_NEGATIVE


def cmd_strongly_unbiased(args):
    tol = args.tolerance
    C = load_any_channel(args.channel, tol)
    A = load_matrix(args.matrix)
    res = mub.is_strongly_unbiased(A, C, tol)
    return res, EXIT_OK if res["strongly_unbiased"] else EXIT_NEGATIVE


def _normalization(povm, fn):
    return float(abs(sum(fn(label) for label in povm.outcomes) - 1))


def cmd_prob(args):
    tol = args.tolerance
    rho = load_matrix(args.rho)
    povm = load_povm(args.povm, tol)
    if args.channel:
        C = load_any_channel(args.channel, tol)
        fn = lambda o: measure.prob_transformed(rho, C, povm, o, tol)  # noqa: E731
    else:
        fn = lambda o: measure.prob(rho, povm, o, tol)  # noqa: E731
    return {"probability": fn(args.outcome), "normalization_residual": _normalization(povm, fn)}, \
        EXIT_OK


def cmd_prob_context(args):
    tol = args.tolerance
    ctx = load_context(args.context, tol)
    rho = load_matrix(args.rho)
    povm = load_povm(args.povm, tol)
    if args.channel:
        C = load_any_channel(args.channel, tol)
        fn = lambda o: measure.prob_in_context_transformed(ctx, rho, C, povm, o, tol)  # noqa: E731
        quantum = measure.prob_transformed(rho, C, povm, args.outcome, tol)
    else:
        fn = lambda o: measure.prob_in_context(ctx, rho, povm, o, tol)  # noqa: E731
        quantum = measure.prob(rho, povm, args.outcome, tol)
    p = fn(args.outcome)
    return {"probability_context": p, "probability_quantum": quantum,
            "difference": p - quantum, "normalization_residual": _normalization(povm, fn)}, EXIT_OK


def cmd_ontmodel(args):
    tol = args.tolerance
    contexts = [load_context(p, tol) for p in args.context]
    rho = load_matrix(args.rho)
    povm = load_povm(args.povm, tol)
    C = load_any_channel(args.channel, tol) if args.channel else None
    models = measure.build_ontological_model(contexts, rho, povm, C, tol, context_ids=args.context)
    out = []
    for m in models:
        d = m.to_dict()
        d["mu_residual"] = float(abs(m.mu.sum() - 1))
        if m.random_matrix is not None:
            d["random_matrix_total_residual"] = float(abs(m.random_matrix.sum() - 1))
        out.append(d)
    return {"models": out}, EXIT_OK


def cmd_joint_verify(args):
    tol = args.tolerance
    Z = load_joint(args.joint, tol)
    X, Y = load_povm(args.x, tol), load_povm(args.y, tol)
    C = load_any_channel(args.channel, tol) if args.channel else None
    ok = measure.verify_joint(Z, X, Y, tol, channel=C)
    mx, my = Z.marginal_x(tol), Z.marginal_y(tol)
    residual = max(
        max(float(np.linalg.norm(mx.effect(o) - X.effect(o))) for o in X.outcomes),
        max(float(np.linalg.norm(my.effect(o) - Y.effect(o))) for o in Y.outcomes),
    )
    return {"joint": ok, "marginal_residual": residual}, EXIT_OK if ok else EXIT_NEGATIVE


def cmd_distinguish(args):
    tol = args.tolerance
    A, B = load_matrix(args.a), load_matrix(args.b)
    ctx = sharp_order.find_distinguishing_context(A, B, tol)
    if ctx is None:
        return {"found": False, "distance": opcore.frobenius_distance(A, B)}, EXIT_NEGATIVE
    gap = float(np.linalg.norm(ch.apply_map(ctx, A) - ch.apply_map(ctx, B)))
    return {"found": True, "separation": gap, "context": serialize.encode_context(ctx)}, EXIT_OK


# ---------------------------------------------------------------- wiring

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--tolerance", type=float)
    common.add_argument("--format", choices=["json", "text"])
    common.add_argument("--seed", type=int)

    parser = _Parser(prog="qcontext", description=__doc__.splitlines()[0])
    parser.add_argument("--tolerance", type=float, default=opcore.DEFAULT_TOL,
                        help="equality tolerance (default 1e-9)")
    parser.add_argument("--format", choices=["json", "text"], default="json")
    parser.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    def add(name, fn, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=fn)
        return p

    add("classify", cmd_classify, "operator classes of a matrix").add_argument("path")
    p = add("check", cmd_check, "validate a channel, sharp channel, context or POVM")
    p.add_argument("path")
    p.add_argument("--kind", choices=["channel", "sharp", "context", "povm"], default="channel")
    p = add("apply", cmd_apply, "apply a channel map to a matrix")
    p.add_argument("--channel", required=True)
    p.add_argument("--matrix", required=True)
    for name, fn, help_text in [
        ("compose", cmd_compose, "channel whose map is L_a after L_b"),
        ("maps-equal", cmd_maps_equal, "compare two channel maps"),
        ("order", cmd_order, "refinement order between sharp channels"),
        ("eq31", cmd_eq31, "commutation criterion for two context maps"),
        ("cor33", cmd_cor33, "equivalent forms of mutual unbiasedness"),
        ("mub", cmd_mub, "transition matrix of two contexts"),
        ("distinguish", cmd_distinguish, "context separating two operators"),
    ]:
        p = add(name, fn, help_text)
        p.add_argument("--a", required=True)
        p.add_argument("--b", required=True)
    for name, fn, help_text in [
        ("unbiased", cmd_unbiased, "is the operator unbiased in the channel"),
        ("strongly-unbiased", cmd_strongly_unbiased, "are all powers unbiased"),
    ]:
        p = add(name, fn, help_text)
        p.add_argument("--matrix", required=True)
        p.add_argument("--channel", required=True)
    p = add("prob", cmd_prob, "quantum probability of an outcome")
    p.add_argument("--rho", required=True)
    p.add_argument("--povm", required=True)
    p.add_argument("--outcome", required=True)
    p.add_argument("--channel")
    p = add("prob-context", cmd_prob_context, "probability of an outcome according to a context")
    p.add_argument("--context", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--povm", required=True)
    p.add_argument("--outcome", required=True)
    p.add_argument("--channel")
    p = add("ontmodel", cmd_ontmodel, "export mu, fuzzy events and random matrices")
    p.add_argument("--context", required=True, action="append")
    p.add_argument("--rho", required=True)
    p.add_argument("--povm", required=True)
    p.add_argument("--channel")
    p = add("joint-verify", cmd_joint_verify, "check marginals of a joint POVM")
    p.add_argument("--joint", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--channel")
    return parser


def _render_text(report, indent="") -> str:
    lines = []
    for key, value in report.items():
        if isinstance(value, dict) and not {"rows", "cols", "data"} <= set(value):
            lines.append(f"{indent}{key}:")
            lines.append(_render_text(value, indent + "  "))
        elif isinstance(value, dict):
            M = serialize.decode_matrix(value)
            lines.append(f"{indent}{key}:")
            lines.append(np.array2string(M, precision=6, suppress_small=True, prefix=indent + "  "))
        elif isinstance(value, bool):
            lines.append(f"{indent}{key}: {'true' if value else 'false'}")
        elif isinstance(value, list) and value and all(isinstance(v, str) for v in value):
            lines.append(f"{indent}{key}: {', '.join(value)}")
        else:
            lines.append(f"{indent}{key}: {json.dumps(value)}")
    return "\n".join(lines)


def _emit(report, fmt, stream):
    if fmt == "json":
        stream.write(json.dumps(report, indent=2) + "\n")
    else:
        stream.write(_render_text(report) + "\n")


def _error_body(exc, code) -> dict:
    body = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("index", "residual_left", "residual_right"):
        if getattr(exc, attr, None) is not None:
            body[attr] = getattr(exc, attr)
    return body


def _exit_code_for(exc) -> int:
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, NonSquare):
        return EXIT_NONSQUARE
    if isinstance(exc, VerdictMismatch):
        return EXIT_MISMATCH
    return EXIT_INVALID


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        stderr.write(json.dumps({"error": "UsageError", "message": str(exc),
                                 "exit_code": exc.code}) + "\n")
        return exc.code
    if args.tolerance <= 0:
        stderr.write(json.dumps({"error": "UsageError", "message": "tolerance must be positive",
                                 "exit_code": EXIT_PARSE}) + "\n")
        return EXIT_PARSE
    try:
        report, code = args.func(args)
    except (QContextError, ValueError) as exc:
        code = EXIT_INVALID if not isinstance(exc, QContextError) else _exit_code_for(exc)
        body = _error_body(exc, code)
        if args.format == "json":
            stderr.write(json.dumps(body) + "\n")
        else:
            stderr.write(f"error: {body['error']}: {body['message']}\n")
        return code
    _emit(report, args.format, stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
