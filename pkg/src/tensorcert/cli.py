"""tensorcert command line.

Exit codes: 0 verified / bound holds / search succeeded, 1 verification
failed / bound violated / search found nothing, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from typing import List, Optional

from . import __version__
from . import bounds as B
from . import decompositions as DC
from .biased_dim import BiasMatrix, biased_dim, column_subspace, modularity_defect
from .linalg import Matrix, MatrixSpaceOperator, ShapeError, Subspace
from .scalars import eps_ring, parse_field
from .tensors import (
    FlattenGrouping,
    contract_kappa,
    cyclic_tensor,
    evaluate_decomposition,
    koszul_flatten,
    kronecker_compose,
    lift_kappa,
    flatten,
)

REPORT_SCHEMA = "tensorcert/1"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def _field(args):
    try:
        return parse_field(args.field)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _decomposition(args, required=True):
    f = _field(args)
    if getattr(args, "builtin", None):
        try:
            return DC.builtin(args.builtin, f)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    path = getattr(args, "file", None)
    if path:
        try:
            return DC.load(path)
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    if required:
        raise UsageError("give a decomposition FILE or --builtin NAME")
    return None


def _cells(text: Optional[str], shape) -> Optional[list]:
    """'all', 'none', or 'i,j;i,j;...' (0-based)."""
    if text is None:
        return None
    t = text.strip().lower()
    a, b = shape
    if t == "all":
        return [(i, j) for i in range(a) for j in range(b)]
    if t in ("none", ""):
        return []
    out = []
    for part in t.split(";"):
        try:
            i, j = (int(x) for x in part.split(","))
        except ValueError:
            raise UsageError(f"bad cell {part!r}; expected i,j") from None
        if not (0 <= i < a and 0 <= j < b):
            raise UsageError(f"cell ({i},{j}) outside {a}x{b}")
        out.append((i, j))
    return out


def _subspace(text, shape, field, default="all"):
    cells = _cells(text if text is not None else default, shape)
    return Subspace.coordinate(cells, shape, field)


def _ints(text: str) -> List[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise UsageError(f"expected comma separated integers, got {text!r}") from None


def _target(spec: Optional[str], d, field):
    if spec is None:
        try:
            return DC.infer_target(d)
        except ShapeError as exc:
            raise UsageError(str(exc)) from None
    kind, _, rest = spec.partition(":")
    if kind == "matmul":
        a, b, c = _ints(rest)
        return cyclic_tensor((a, b, c), field)
    if kind == "kappa":
        m, n = _ints(rest)
        return cyclic_tensor((n,) * m, field)
    if kind == "w":
        return DC.symmetric_w_tensor(field)
    raise UsageError(f"unknown target {spec!r}; use matmul:a,b,c, kappa:m,n or w")


def _tensor_arg(spec: str, field):
    kind, _, rest = spec.partition(":")
    if kind == "matmul":
        return cyclic_tensor(tuple(_ints(rest)), field)
    if kind == "kappa":
        m, n = _ints(rest)
        return cyclic_tensor((n,) * m, field)
    raise UsageError(f"unknown tensor {spec!r}; use matmul:a,b,c or kappa:m,n")


def _factor(args, d) -> int:
    k = args.factor
    if not 1 <= k <= d.shape.m:
        raise UsageError(f"--factor must be between 1 and {d.shape.m}")
    return k - 1


def _operator(spec: str, shape, field, rng):
    if spec in (None, "identity"):
        return MatrixSpaceOperator.identity(shape, field)
    if spec == "random-invertible":
        return MatrixSpaceOperator.random_invertible(shape, field, rng)
    if spec == "random":
        return MatrixSpaceOperator.random(shape, shape, field, rng)
    if spec == "transpose":
        if shape[0] != shape[1]:
            raise UsageError("transpose operator needs a square factor")
        return MatrixSpaceOperator.transpose_map(shape[0], field=field)
    if spec.startswith("projection:"):
        return MatrixSpaceOperator.projection(_cells(spec.split(":", 1)[1], shape), shape, field)
    raise UsageError(f"unknown operator {spec!r}")


# ---------------------------------------------------------------------------
# commands; each returns (ok, report dict)


def cmd_verify(args):
    d = _decomposition(args)
    f = d.shape.field
    if args.eps is None and args.file and f.is_eps:
        args.eps = DC.load_with_h(args.file)[1]
    if args.eps is not None:
        h = args.eps
        if not f.is_eps:
            order = max(args.eps_order or 0, h + 2)
            d = DC.lift_to_eps(d, order)
        elif f.order < h + 2:
            raise UsageError(f"eps order {f.order} too small for h={h}")
        target = _target(args.target, d, d.shape.field.base)
        rep = DC.verify_infinitesimal(DC.EpsDecomposition(d, h), target)
        out = {"mode": "infinitesimal", "h": h}
    else:
        if f.is_eps:
            raise UsageError("eps-valued decomposition: pass --eps H")
        target = _target(args.target, d, f)
        rep = DC.verify_exact(d, target)
        out = {"mode": "exact"}
    out.update(rep.to_dict())
    out["field"] = str(d.shape.field)
    out["name"] = d.metadata.get("name")
    out["summary"] = f"{rep.status}, r={rep.r}"
    return rep.ok, out


def cmd_bound(args):
    d = _decomposition(args)
    f = d.shape.field
    rng = random.Random(args.seed)
    if args.kind == "inner-rank":
        k = _factor(args, d)
        L = _operator(args.operator, d.shape.factors[k], f, rng)
        rep = B.inner_rank_sum(d, k, L)
        out = rep.to_dict()
        out["factor"] = k + 1
        out["operator"] = args.operator or "identity"
        return rep.verdict == "holds", out
    if d.shape.m != 3:
        raise UsageError("this bound needs a 3-factor decomposition")
    fa, fb, fc = d.shape.factors
    if args.kind == "annihilate":
        Z = _subspace(args.Z, fa, f)
        H = _subspace(args.H, fb, f)
        supp = B.annihilation_support(d, Z, H)
        lhs = B.span_product_dim(Z, H)
        ok = lhs <= len(supp)
        return ok, {"dim_span_ZH": lhs, "support": list(supp), "support_size": len(supp),
                    "verdict": "holds" if ok else "violated",
                    "quotient_span_dim": B.quotient_span_dim(Z.perp(), H.perp())}
    if args.kind == "psi":
        Z = _subspace(args.Z, fa, f)
        H = _subspace(args.H, fb, f)
        L = _operator(args.operator, fc, f, rng)
        psi = B.build_psi_zh(Z, H)
        supp = B.annihilation_support(d, Z, H)
        rep = B.psi_bound(d, psi, supp, L)
        out = rep.to_dict()
        out["psi_shape"] = list(psi.matrix.shape)
        out["kernel_trivial"] = psi.kernel_trivial()
        return rep.verdict == "holds", out
    if args.kind == "general":
        A = _subspace(args.A, fa, f, default="none")
        Bs = _subspace(args.B, fb, f, default="none")
        L = _operator(args.operator, fc, f, rng)
        M, N = B.quotient_operator(A), B.quotient_operator(Bs)
        t = evaluate_decomposition(d)
        psi = B.build_psi_general(t, M, N, L)
        supp = B.general_support(d, M, N)
        rep = B.psi_bound(d, psi, supp, L)
        out = rep.to_dict()
        out["psi_shape"] = list(psi.matrix.shape)
        return rep.verdict == "holds", out
    raise UsageError(f"unknown bound {args.kind}")


def cmd_construct(args):
    d = _decomposition(args)
    k = _factor(args, d)
    fam = d.factor_family(k)
    idx = _ints(args.indices) if args.indices else list(range(len(fam)))
    if any(not 0 <= i < len(fam) for i in idx):
        raise UsageError("term index out of range")
    vs = [fam[i] for i in idx]
    try:
        L = B.construct_rank_one_operator(vs)
    except ValueError as exc:
        return False, {"status": "rejected", "reason": str(exc), "indices": idx}
    ranks = [L(v).rank() for v in vs]
    ok = L.is_invertible() and all(r <= 1 for r in ranks)
    return ok, {"status": "constructed" if ok else "invalid", "indices": idx, "image_ranks": ranks,
                "invertible": L.is_invertible(), "operator": L.matrix.to_strings()}


def cmd_overlap(args):
    d = _decomposition(args)
    factors = [args.factor - 1] if args.factor else list(range(d.shape.m))
    out = {"families": []}
    for k in factors:
        if not 0 <= k < d.shape.m:
            raise UsageError("factor out of range")
        rep = B.max_proper_overlap(d.factor_family(k), d.shape.factors[k], d.shape.field)
        item = rep.to_dict()
        item["factor"] = k + 1
        item["recomputed"] = B.overlap(d.factor_family(k), rep.witness)
        out["families"].append(item)
    return True, out


def cmd_search(args):
    f = _field(args)
    if args.kind == "tame":
        n = args.n
        rng = random.Random(args.seed)
        zeta = B.standard_basis(n, f)
        eta = B.standard_basis(n, f)
        if args.basis == "random":
            zeta = _random_basis(n, f, rng)
            eta = _random_basis(n, f, rng)
        res = B.tame_search(zeta, eta, n)
        if res is None:
            return False, {"status": "exhausted", "n": n, "basis": args.basis, "seed": args.seed}
        return True, {"status": "found", "n": n, "Z": res["Z"], "H": res["H"], "rank": res["rank"],
                      "candidates_examined": res["candidates_examined"], "basis": args.basis,
                      "seed": args.seed}
    if args.kind == "maxrank":
        dims = tuple(_ints(args.dims))
        if len(dims) != 3:
            raise UsageError("--dims needs n1,n2,n3")
        t = cyclic_tensor(dims, f)
        A = _subspace(args.A, t.shape.factors[0], f, default="none")
        Bs = _subspace(args.B, t.shape.factors[1], f, default="none")
        res = B.max_rank_search(B.QuotientQuestion(t, A, Bs), budget=args.budget, seed=args.seed)
        sz = B.stars_zeros_rank(_cells(args.A or "none", t.shape.factors[0]),
                                _cells(args.B or "none", t.shape.factors[1]), dims, f)
        res["stars_zeros_count"] = sz["count"]
        return res["best"] <= res["optimistic"], res
    if args.kind == "invertible-combo":
        d = _decomposition(args)
        k = _factor(args, d)
        fam = d.factor_family(k)[args.start:]
        res = B.complete_to_invertible(fam, args.prefix, seed=args.seed)
        res["offset"] = args.start
        return res["status"] == "found", res
    raise UsageError(f"unknown search {args.kind}")


def _random_basis(n, f, rng):
    while True:
        vs = [Matrix.random(n, n, f, rng) for _ in range(n * n)]
        if Subspace.span(vs, (n, n), f).dim == n * n:
            return vs


def cmd_flatten(args):
    f = _field(args)
    if args.tensor:
        t = _tensor_arg(args.tensor, f)
    else:
        t = evaluate_decomposition(_decomposition(args))
    m = t.shape.m
    if args.koszul is not None:
        try:
            mat = koszul_flatten(t, args.koszul)
        except (ValueError, ShapeError) as exc:
            raise UsageError(str(exc)) from None
        return True, {"kind": "koszul", "p": args.koszul, "shape": list(mat.shape), "rank": mat.rank()}
    try:
        if args.grouping == "pi":
            g = FlattenGrouping.pi()
        elif args.grouping == "pairing":
            g = FlattenGrouping.pairing(m)
        else:
            g = FlattenGrouping.parse(args.grouping, m)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    mat = flatten(t, g)
    rk = mat.rank()
    return True, {"kind": "flatten", "grouping_left": list(g.left), "shape": list(mat.shape), "rank": rk,
                  "full_rank": rk == min(mat.shape)}


def cmd_compose(args):
    d = _decomposition(args)
    if args.kind == "kronecker":
        other = DC.builtin(args.with_, d.shape.field) if args.with_ else d
        out_d = kronecker_compose(d, other)
    elif args.kind == "lift":
        out_d = lift_kappa(d)
    else:
        out_d = contract_kappa(d)
    rep = DC.verify_exact(out_d, DC.infer_target(out_d))
    res = {"kind": args.kind, "r": out_d.r, "shape": [list(s) for s in out_d.shape.factors],
           "status": rep.status}
    if args.output:
        DC.save(out_d, args.output)
        res["output"] = args.output
    return rep.ok, res


def cmd_stats(args):
    d = _decomposition(args)
    return True, DC.stats(d)


def _rational_rows(text):
    return [[x for x in row.split(",")] for row in text.split(";")]


def cmd_biased(args):
    try:
        if args.diag:
            D = BiasMatrix.diag([DC.QQ.parse(x) for x in args.diag.split(",")])
        else:
            D = BiasMatrix.from_rows([[DC.QQ.parse(x) for x in r] for r in _rational_rows(args.matrix)])
        S = column_subspace([[DC.QQ.parse(x) for x in r] for r in _rational_rows(args.S)], D.n)
        out = {"n": D.n, "trace": str(D.trace()), "dim_D_S": str(biased_dim(D, S)),
               "dim_D_S_perp": str(biased_dim(D, S.perp()))}
        if args.S2:
            S2 = column_subspace([[DC.QQ.parse(x) for x in r] for r in _rational_rows(args.S2)], D.n)
            out["dim_D_S2"] = str(biased_dim(D, S2))
            out["modularity_defect"] = str(modularity_defect(D, S, S2))
    except (ValueError, ZeroDivisionError, ShapeError) as exc:
        raise UsageError(str(exc)) from None
    return True, out


def cmd_emit(args):
    f = _field(args)
    if args.builtin == "w":
        e = DC.symmetric_w_family(f, max(args.eps_order or 0, 3))
        text = DC.dumps(e.decomposition, e.h)
    else:
        d = _decomposition(args)
        text = DC.dumps(d)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        return True, {"output": args.output, "bytes": len(text.encode())}
    sys.stdout.write(text)
    return True, None


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", default="Q", help="Q or F<p> (default Q)")
    common.add_argument("--eps-order", type=int, default=None, help="truncation order of the eps ring")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized phases (default 0)")
    common.add_argument("--format", choices=("json", "text"), default="json")

    src = argparse.ArgumentParser(add_help=False)
    src.add_argument("file", nargs="?", help="decomposition JSON file")
    src.add_argument("--builtin", help="strassen, naive222, naive234, naiveXYZ, ...")

    p = argparse.ArgumentParser(prog="tensorcert", description="Exact certificates for matrix multiplication tensors.")
    p.add_argument("--version", action="version", version=f"tensorcert {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common, src],
                       help="check that rank-one terms sum exactly to a tensor",
                       description="Exact check that the rank-one terms sum to the target tensor "
                                   "(default: the matrix multiplication / cyclic tensor of the shape). "
                                   "With --eps H, check that the eps-family equals eps^H times the target "
                                   "plus higher order terms.")
    v.add_argument("--eps", type=int, default=None, metavar="H")
    v.add_argument("--target", help="matmul:a,b,c, kappa:m,n or w")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bound", parents=[common, src], help="inner-rank and annihilation bounds",
                       description="inner-rank: product of dimensions <= sum of Rank(L gamma) over all terms "
                                   "(n2 rank(L) for a singular L). annihilate: dim Span(ZH) <= size of the "
                                   "support. psi: rank of Psi_{Z,H} <= supported sum of Rank(L gamma). "
                                   "general: rank of Psi for the quotients by A and B <= supported sum.")
    b.add_argument("kind", choices=("inner-rank", "annihilate", "psi", "general"))
    b.add_argument("--factor", type=int, default=3, help="1-based factor (default 3)")
    b.add_argument("--operator", default=None,
                   help="identity, random-invertible, random, transpose or projection:i,j;...")
    b.add_argument("--Z", help="cells spanning Z (i,j;... or all/none)")
    b.add_argument("--H", help="cells spanning H")
    b.add_argument("--A", help="cells spanning A")
    b.add_argument("--B", help="cells spanning B")
    b.set_defaults(func=cmd_bound)

    c = sub.add_parser("construct", parents=[common, src], help="rank-one operator construction",
                       description="Build an invertible operator taking up to n^2+1 spanning matrices "
                                   "to matrices of rank one.")
    c.add_argument("what", choices=("L",))
    c.add_argument("--factor", type=int, default=3)
    c.add_argument("--indices", help="0-based term indices to use (default: all)")
    c.set_defaults(func=cmd_construct)

    o = sub.add_parser("overlap", parents=[common, src], help="maximum proper overlap of factor families",
                       description="max over proper subspaces U of |{v} in U| - dim U, with a witness.")
    o.add_argument("--factor", type=int, default=None)
    o.set_defaults(func=cmd_overlap)

    s = sub.add_parser("search", parents=[common, src], help="deterministic searches",
                       description="tame: n-subsets Z, H of two bases with Psi_{Z,H} of rank n^2. "
                                   "maxrank: rank of Psi for the quotient question (A, B) against the "
                                   "optimistic bound. invertible-combo: an invertible combination using at "
                                   "most n - rank(M) extra vectors.")
    s.add_argument("kind", choices=("tame", "maxrank", "invertible-combo"))
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--basis", choices=("standard", "random"), default="standard")
    s.add_argument("--dims", default="2,2,2")
    s.add_argument("--A")
    s.add_argument("--B")
    s.add_argument("--budget", type=int, default=8)
    s.add_argument("--factor", type=int, default=1)
    s.add_argument("--start", type=int, default=0, help="drop this many leading terms")
    s.add_argument("--prefix", type=int, default=1, help="M is the sum of this many leading vectors")
    s.set_defaults(func=cmd_search)

    fl = sub.add_parser("flatten", parents=[common, src], help="flattening and Koszul flattening ranks",
                        description="Rank of a flattening (pi groups row1,col1,row3 against row2,col2,col3; "
                                    "pairing groups alternate factors) or of the Koszul flattening "
                                    "B* (x) L^p A -> L^{p+1} A (x) C.")
    fl.add_argument("--tensor", help="matmul:a,b,c or kappa:m,n")
    fl.add_argument("--grouping", default="pi", help="pi, pairing or left slots like 0,1,4")
    fl.add_argument("--koszul", type=int, default=None, metavar="P")
    fl.set_defaults(func=cmd_flatten)

    cp = sub.add_parser("compose", parents=[common, src], help="Kronecker composition, kappa lift and contraction",
                        description="kronecker: factor-wise Kronecker products of two decompositions. "
                                    "lift: kappa_m(n) terms to kappa_{m+1}(n) with at most n^2 times as many. "
                                    "contract: kappa_{m+1}(n) terms down to kappa_m(n).")
    cp.add_argument("kind", choices=("kronecker", "lift", "contract"))
    cp.add_argument("--with", dest="with_", help="builtin right operand for kronecker")
    cp.add_argument("--output", help="write the resulting decomposition here")
    cp.set_defaults(func=cmd_compose)

    st = sub.add_parser("stats", parents=[common, src], help="per-factor statistics",
                        description="Span dimension, maximum proper overlap and inner ranks per factor.")
    st.set_defaults(func=cmd_stats)

    bd = sub.add_parser("biased-dim", parents=[common], help="D-biased dimension",
                        description="trace of D compressed to S, its complement, and the modularity defect.")
    bd.add_argument("--diag", help="diagonal of D, comma separated")
    bd.add_argument("--matrix", help="rows of D: a,b;c,d")
    bd.add_argument("--S", required=True, help="spanning vectors of S: a,b;c,d")
    bd.add_argument("--S2", help="spanning vectors of a second subspace")
    bd.set_defaults(func=cmd_biased)

    em = sub.add_parser("emit", parents=[common, src], help="write a builtin decomposition as JSON",
                        description="Serialize a builtin decomposition (or the eps family 'w').")
    em.add_argument("--output")
    em.set_defaults(func=cmd_emit)
    return p


def _render_text(obj, prefix=""):
    lines = []
    for k in sorted(obj):
        v = obj[k]
        if isinstance(v, dict):
            lines.extend(_render_text(v, f"{prefix}{k}."))
        else:
            lines.append(f"{prefix}{k}: {json.dumps(v, sort_keys=True)}")
    return lines


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "biased-dim" and not (args.diag or args.matrix):
        parser.error("biased-dim needs --diag or --matrix")
    try:
        ok, report = args.func(args)
    except (UsageError, DC.DecompositionFormatError) as exc:
        print(f"tensorcert: error: {exc}", file=sys.stderr)
        return 2
    except (ShapeError, ValueError) as exc:
        print(f"tensorcert: error: {exc}", file=sys.stderr)
        return 1
    if report is not None:
        report = dict(report)
        report["schema"] = REPORT_SCHEMA
        report["command"] = args.command
        report["ok"] = bool(ok)
        if args.format == "json":
            print(json.dumps(report, sort_keys=True, indent=2))
        else:
            print("\n".join(_render_text(report)))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
