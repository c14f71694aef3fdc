"""Command-line front end (``gsfactor``).

Every command reads and writes JSON. Exit codes: 0 on success, 1 for
invalid input or flags, 2 for numerical failures (window inadequacy,
degenerate fits).
"""
from __future__ import annotations

import argparse
import json
import math
import sys

from . import factorize as fz
from . import schatten as sch
from . import weyl
from .coefftensor import CoeffTensor, classify, estimate_decay
from .errors import NumericalError, ValidationError
from .generators import mehler, projector_symbol, random_gs, rank_one

SPACES = {"schwartz": "schwartz", "Ss": "roumieu", "Sigmas": "beurling"}
DEFAULT_GRID = "-8,8,256"


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for numerical failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(f"{self.prog}: {message}")


def _index(text: str):
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad multi-index {text!r}") from exc


def _orders(text: str):
    out = []
    for t in text.split(","):
        t = t.strip().lower()
        try:
            out.append(math.inf if t in ("inf", "infinity") else float(t))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad Schatten order {t!r}") from exc
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    return obj


# -- I/O ---------------------------------------------------------------------------------


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc


def _read_tensor(path) -> CoeffTensor:
    obj = _read_json(path)
    if not isinstance(obj, dict) or "entries" not in obj:
        raise ValidationError(f"{path} does not hold a coefficient tensor")
    return CoeffTensor.from_dict(obj)


def _read_grid(path, cls):
    obj = _read_json(path)
    if not isinstance(obj, dict) or "axis1" not in obj:
        raise ValidationError(f"{path} does not hold grid data")
    return cls.from_dict(obj)


def _read_weight(path, dim):
    if path is None:
        return sch.HermiteWeight.unit(dim)
    W = sch.HermiteWeight.from_dict(_read_json(path), dim=dim)
    if W.dim != dim:
        raise ValidationError(f"{path}: weight dimension {W.dim}, expected {dim}")
    return W


def _emit(obj, args):
    text = json.dumps(_jsonable(obj), separators=(",", ":"), sort_keys=True) + "\n"
    out = getattr(args, "output", None)
    if out is None:
        sys.stdout.write(text)
    else:
        try:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise ValidationError(f"cannot write {out}: {exc.strerror}") from exc


def _grid(args):
    ax = weyl.Axis.parse(getattr(args, "grid", None) or DEFAULT_GRID)
    return weyl.PhaseGrid(ax, ax)


# -- commands ------------------------------------------------------------------------------


def cmd_generate(args):
    kind = args.kind
    n = 32 if args.n is None else args.n
    if kind == "mehler":
        if args.tau is None:
            raise ValidationError("mehler needs --tau")
        return mehler(args.tau, n).to_dict()
    if kind == "random-gs":
        seed = getattr(args, "seed", None)
        if seed is None:
            raise ValidationError("random-gs needs --seed")
        return random_gs(n, seed, s=args.s, r=args.r, d_left=args.d_left,
                         d_right=args.d_right, n_entries=args.entries).to_dict()
    if kind == "rank-one":
        return rank_one(args.alpha, args.beta, trunc=args.n).to_dict()
    return projector_symbol(_grid(args)).to_dict()


def _space(args):
    branch = SPACES[args.space]
    if args.r is not None and branch != "roumieu":
        raise ValidationError("--r is only valid with --space Ss")
    if branch != "schwartz" and args.s is None:
        raise ValidationError(f"--space {args.space} needs --s")
    return branch


def cmd_factorize(args):
    A = _read_tensor(args.input)
    branch = _space(args)
    if args.chain is not None:
        if args.d0 is not None:
            raise ValidationError("--d0 cannot be combined with --chain")
        chain = fz.factor_chain(A, args.s, args.chain, branch=branch, r=args.r, jmax=args.jmax)
        P = chain.product()
        positive = all(fz.is_positive_hermite_diagonal(f)[0] for f in chain.factors[1:])
        return {"branch": branch, "factors": [f.to_dict() for f in chain.factors],
                "diagnostics": chain.diagnostics,
                "verification": {"reconstruction_error": fz.reconstruction_error(A, P),
                                 "positive_diagonal": positive}}
    pair = fz.factorize(A, branch, s=args.s, r=args.r, d0=args.d0, jmax=args.jmax)
    out = pair.to_dict()
    out["verification"] = fz.verify_pair(A, pair, s=args.s)
    return out


def cmd_classify(args):
    return classify(_read_tensor(args.input), args.s, mode=args.mode).to_dict()


def cmd_decay(args):
    return estimate_decay(_read_tensor(args.input), args.s).to_dict()


def cmd_quantize(args):
    a = _read_grid(args.input, weyl.GridSymbol)
    return weyl.change_quantization(a, args.from_t, args.to_t).to_dict()


def cmd_kernel(args):
    if args.direction == "to-kernel":
        a = _read_grid(args.input, weyl.GridSymbol)
        return weyl.symbol_to_kernel(a, args.t).to_dict()
    K = _read_grid(args.input, weyl.GridKernel)
    return weyl.kernel_to_symbol(K, args.t).to_dict()


def cmd_sharp(args):
    a = _read_grid(args.a, weyl.GridSymbol)
    b = _read_grid(args.b, weyl.GridSymbol)
    return weyl.sharp(a, b, args.t).to_dict()


def cmd_factorize_symbol(args):
    a = _read_grid(args.input, weyl.GridSymbol)
    branch = _space(args)
    a1, a2 = weyl.factorize_symbol(a, args.t, args.s, branch, trunc=args.trunc, r=args.r)
    err = float(abs(weyl.sharp(a1, a2, args.t).values - a.values).max())
    return {"a1": a1.to_dict(), "a2": a2.to_dict(), "branch": branch,
            "verification": {"sharp_error": err}}


def cmd_schatten(args):
    A = _read_tensor(args.input)
    W1 = _read_weight(args.w1, A.d_right)
    W2 = _read_weight(args.w2, A.d_left)
    spec = sch.singular_values(sch.operator_matrix(A, W1, W2))
    norms = [[_jsonable(p), sch.schatten_norm(spec, p)] for p in args.p]
    return {"sigma": spec.sigma.tolist(), "norms": norms}


def cmd_verify(args):
    A = _read_tensor(args.input)
    W1 = _read_weight(args.w1, A.d_right)
    W2 = _read_weight(args.w2, A.d_left)
    if args.check == "hs":
        return sch.hs_identity_report(A, W1, W2).to_dict()
    if args.check == "hoelder":
        if args.second is None:
            raise ValidationError("--check hoelder needs --second")
        A2 = _read_tensor(args.second)
        W3 = _read_weight(args.w3, A2.d_left)
        return sch.holder_check(A, A2, (W1, W2, W3), args.p1, args.p2).to_dict()
    if args.check == "embed":
        C1 = _read_weight(args.outer_w1, A.d_right)
        C2 = _read_weight(args.outer_w2, A.d_left)
        return sch.embedding_monotonicity_check(A, (W1, W2), (C1, C2)).to_dict()
    # decay
    if args.s is None:
        raise ValidationError("--check decay needs --s")
    spec = sch.singular_values(sch.operator_matrix(A, W1, W2))
    c, rho, r2 = sch.decay_fit(spec, args.s)
    ratio = sch.partial_sum_ratio(spec, 0.1)
    report = sch.CheckReport("decay", sch._digest(A, W1, W2, [args.s]), r2, args.min_r2, rho,
                             r2 >= args.min_r2 and ratio < 1.0).to_dict()
    report["fit"] = {"c": c, "rho": rho, "r_squared": r2, "tail_ratio": ratio}
    return report


# -- parser ---------------------------------------------------------------------------------


def _common():
    p = _Parser(add_help=False)
    p.add_argument("--output", default=argparse.SUPPRESS, help="output path (default: stdout)")
    p.add_argument("--format", choices=["json"], default=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--grid", default=argparse.SUPPRESS, help='"min,max,n" (default %s)' % DEFAULT_GRID)
    return p


def _space_flags(p, default="Ss"):
    p.add_argument("--space", choices=sorted(SPACES), default=default)
    p.add_argument("--s", type=float)
    p.add_argument("--r", type=float)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="gsfactor", parents=[common],
                     description="Hermite-spectral kernel factorization and symbol calculus.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", parents=[common], help="write test data")
    p.add_argument("kind", choices=["mehler", "random-gs", "rank-one", "projector-symbol"])
    p.add_argument("--tau", type=float)
    p.add_argument("--n", type=int, help="truncation (default 32; rank-one: smallest box)")
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--d-left", type=int, default=1)
    p.add_argument("--d-right", type=int, default=1)
    p.add_argument("--entries", type=int)
    p.add_argument("--alpha", type=_index, default=(0,))
    p.add_argument("--beta", type=_index, default=(0,))
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("factorize", parents=[common], help="factor a coefficient tensor")
    p.add_argument("input")
    _space_flags(p)
    p.add_argument("--d0", type=int)
    p.add_argument("--chain", type=int)
    p.add_argument("--jmax", type=int)
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("classify", parents=[common], help="estimate space membership")
    p.add_argument("input")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--mode", choices=["roumieu", "beurling", "schwartz", "dual"], default="roumieu")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("decay", parents=[common], help="estimate the decay rate")
    p.add_argument("input")
    p.add_argument("--s", type=float, required=True)
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("quantize", parents=[common], help="change the quantization parameter")
    p.add_argument("input")
    p.add_argument("--from", dest="from_t", type=float, required=True)
    p.add_argument("--to", dest="to_t", type=float, required=True)
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("kernel", parents=[common], help="symbol to kernel or back")
    p.add_argument("input")
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--direction", choices=["to-kernel", "to-symbol"], default="to-kernel")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("sharp", parents=[common], help="symbol of a composition")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--t", type=float, default=0.5)
    p.set_defaults(func=cmd_sharp)

    p = sub.add_parser("factorize-symbol", parents=[common], help="factor a symbol")
    p.add_argument("input")
    p.add_argument("--t", type=float, default=0.5)
    _space_flags(p)
    p.add_argument("--trunc", type=int, default=32)
    p.set_defaults(func=cmd_factorize_symbol)

    p = sub.add_parser("schatten", parents=[common], help="singular values and Schatten norms")
    p.add_argument("input")
    p.add_argument("--p", type=_orders, default=[2.0])
    p.add_argument("--w1", help="input-space weight file")
    p.add_argument("--w2", help="output-space weight file")
    p.set_defaults(func=cmd_schatten)

    p = sub.add_parser("verify", parents=[common], help="numerical checks of the Schatten layer")
    p.add_argument("input")
    p.add_argument("--check", choices=["hs", "hoelder", "embed", "decay"], required=True)
    p.add_argument("--w1")
    p.add_argument("--w2")
    p.add_argument("--w3")
    p.add_argument("--second", help="second tensor (T2) for the Hoelder check")
    p.add_argument("--p1", type=float, default=2.0)
    p.add_argument("--p2", type=float, default=2.0)
    p.add_argument("--outer-w1")
    p.add_argument("--outer-w2")
    p.add_argument("--s", type=float)
    p.add_argument("--min-r2", type=float, default=0.99)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _emit(args.func(args), args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
