"""Command-line front end and verification harness.

Subcommands: mutate, gvec, tube-info, expand, theta, theta2, scatter2,
gca-graph, gca-verify, verify, report.  Matrices are given either as a path
to a JSON file {"n": ..., "m": ..., "rows": [[...], ...]} (rows are the n+m
rows of the extended exchange matrix) or as the name of a bundled fixture.
All indices on the command line are 1-based.  Exit codes: 0 success, 1 a
checked identity failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from typing import Dict, List, Optional, Sequence

from . import gca, scatter2
from .affine import (
    NotInImaginaryWall,
    all_arcs,
    cluster_expansion_imaginary,
    maximal_compatible_sets,
    tube_root_vector,
)
from .poly import to_json_dict
from .seeds import (
    ExtendedExchangeMatrix,
    RootVec,
    WeightVec,
    initial_seed,
    mutate_seed_word,
)
from .theta import IdentityViolated, ThetaEngine

BUNDLED = ["a1t22", "a1t41", "a1t14", "a2t", "a3t", "a3t22", "a4t", "c2t", "d4t", "e6t"]


class ConfigError(Exception):
    pass


def _log(msg: str) -> None:
    if os.environ.get("CLUSTER_LOG"):
        print(msg, file=sys.stderr)


def load_matrix(source: str) -> ExtendedExchangeMatrix:
    if source in BUNDLED:
        text = resources.files("affcluster.matrices").joinpath(f"{source}.json").read_text()
    else:
        if not os.path.exists(source):
            raise ConfigError(f"no such matrix file or fixture: {source}")
        with open(source) as fh:
            text = fh.read()
    try:
        blob = json.loads(text)
        rows = tuple(tuple(int(x) for x in r) for r in blob["rows"])
        n = int(blob["n"])
        return ExtendedExchangeMatrix(rows, n)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"malformed matrix file: {exc}") from exc


def matrix_json(matrix: ExtendedExchangeMatrix) -> dict:
    return {"n": matrix.n, "m": matrix.m, "rows": [list(r) for r in matrix.rows]}


def parse_word(text: str) -> List[int]:
    try:
        word = [int(t) - 1 for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad mutation word: {text}") from exc
    if any(k < 0 for k in word):
        raise ConfigError("mutation indices are 1-based")
    return word


def parse_vec(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad vector: {text}") from exc


def emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=1, sort_keys=True))
    else:
        for key in sorted(payload):
            print(f"{key}: {payload[key]}")


# -- subcommands ---------------------------------------------------------------


def cmd_mutate(args) -> int:
    matrix = load_matrix(args.matrix)
    word = parse_word(args.word)
    for k in word:
        if k >= matrix.n:
            raise ConfigError(f"mutation index {k + 1} exceeds n={matrix.n}")
        matrix = matrix.mutate(k)
    emit({"matrix": matrix_json(matrix)}, args.format)
    return 0


def cmd_gvec(args) -> int:
    matrix = load_matrix(args.matrix)
    seed = mutate_seed_word(initial_seed(matrix), parse_word(args.word))
    from .seeds import g_vector_of

    gvecs = [list(g_vector_of(seed, i).coords) for i in range(matrix.n)]
    emit({"gvectors": gvecs}, args.format)
    return 0


def cmd_tube_info(args) -> int:
    eng = ThetaEngine(load_matrix(args.matrix).top(), height_bound=args.height_bound)
    tubes = []
    for tube in eng.tubes:
        arcs = [
            {
                "start": r.start,
                "length": r.length,
                "vector": list(tube_root_vector(tube, r).coords),
                "label": list(eng.data.nu_c(tube_root_vector(tube, r)).coords),
            }
            for r in all_arcs(tube)
        ]
        tubes.append(
            {
                "size": tube.size,
                "orbit": [list(v.coords) for v in tube.orbit],
                "arcs": arcs,
            }
        )
    emit(
        {
            "delta": list(eng.data.delta.coords),
            "nu_delta": list(eng.data.nu_c(eng.data.delta).coords),
            "tubes": tubes,
        },
        args.format,
    )
    return 0


def cmd_expand(args) -> int:
    eng = ThetaEngine(load_matrix(args.matrix).top())
    phi = RootVec(tuple(parse_vec(args.root)))
    if len(phi.coords) != eng.n:
        raise ConfigError(f"root must have {eng.n} coordinates")
    m_delta, arcs = cluster_expansion_imaginary(eng.data, eng.tubes, phi)
    emit(
        {
            "m_delta": m_delta,
            "arcs": [
                {"tube": r.tube, "start": r.start, "length": r.length, "mult": mult}
                for r, mult in sorted(arcs.items())
            ],
        },
        args.format,
    )
    return 0


def _parse_target(eng: ThetaEngine, text: str) -> WeightVec:
    text = text.strip()
    if text.endswith("delta"):
        head = text[: -len("delta")].rstrip("* ")
        k = int(head) if head else 1
        return eng.data.nu_c(eng.data.delta).scale(k)
    return WeightVec(tuple(parse_vec(text)))


def cmd_theta(args) -> int:
    eng = ThetaEngine(load_matrix(args.matrix).top(), depth=args.depth)
    label = _parse_target(eng, args.target)
    theta = eng.theta_by_label(label)
    emit(
        {
            "label": list(theta.label.coords),
            "theta": str(theta.poly),
            "json": to_json_dict(theta.poly),
        },
        args.format,
    )
    return 0


def cmd_scatter2(args) -> int:
    matrix = load_matrix(args.matrix)
    if matrix.n != 2:
        raise ConfigError("scatter2 requires a rank-2 matrix")
    diagram = scatter2.complete_scattering_rank2(matrix.top(), args.order)
    walls = [
        {
            "normal": list(w.normal),
            "direction": list(w.direction),
            "line": w.is_line,
            "series": to_json_dict(w.series),
        }
        for w in diagram.walls
    ]
    payload = {"order": args.order, "walls": walls}
    if args.dump:
        with open(args.dump, "w") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
    emit(payload, args.format)
    return 0


def cmd_theta2(args) -> int:
    matrix = load_matrix(args.matrix)
    if matrix.n != 2:
        raise ConfigError("theta2 requires a rank-2 matrix")
    diagram = scatter2.complete_scattering_rank2(matrix.top(), args.order)
    lam = WeightVec(tuple(parse_vec(args.lam)))
    poly = scatter2.theta_via_broken_lines(diagram, lam)
    emit({"lambda": list(lam.coords), "theta": str(poly), "json": to_json_dict(poly)}, args.format)
    return 0


def cmd_gca_graph(args) -> int:
    eng = ThetaEngine(load_matrix(args.matrix).top())
    if not eng.tubes:
        raise ConfigError("matrix has no tubes")
    if args.tube >= len(eng.tubes):
        raise ConfigError(f"tube index out of range (found {len(eng.tubes)} tubes)")
    tube = eng.tubes[args.tube]
    j0 = min(maximal_compatible_sets(tube), key=lambda s: sorted(s))
    seed, labels = gca.build_tube_seed(eng.tubes, j0)
    graph = gca.enumerate_exchange_graph(eng.tubes, seed, labels)
    payload = {
        "tube": args.tube,
        "size": tube.size,
        "vertices": len(graph.vertices),
        "edges": sorted({tuple(sorted((a, b))) for a, b, _ in graph.edges}),
        "clusters": [
            sorted([r.start, r.length] for r in labs) for labs in graph.labels
        ],
    }
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
    emit(payload, args.format)
    return 0


def cmd_gca_verify(args) -> int:
    eng = ThetaEngine(load_matrix(args.matrix).top())
    if not eng.tubes:
        raise ConfigError("matrix has no tubes")
    report = {}
    for tube in eng.tubes:
        j0 = min(maximal_compatible_sets(tube), key=lambda s: sorted(s))
        seed, labels = gca.build_tube_seed(eng.tubes, j0)
        graph = gca.enumerate_exchange_graph(eng.tubes, seed, labels)
        expected = len(maximal_compatible_sets(tube))
        if len(graph.vertices) != expected:
            print(f"FAIL tube {tube.index}: {len(graph.vertices)} != {expected}")
            return 1
        nrel = gca.t_o_check(eng, eng.tubes, graph)
        ncf = gca.t_o_check(eng, eng.tubes, graph, coefficient_free=True)
        report[f"tube{tube.index}"] = {
            "size": tube.size,
            "seeds": len(graph.vertices),
            "relations": nrel,
            "relations_coefficient_free": ncf,
        }
    emit(report, args.format)
    return 0


IDENTITIES = ["thetaxi", "cheby", "imexch", "realexch", "expansion", "tube-closure"]


def run_identity(eng: ThetaEngine, name: str, kmax: int = 4) -> List[str]:
    """Run one identity family; returns failure descriptions (empty = pass)."""
    failures: List[str] = []
    if name == "thetaxi":
        if eng.n == 2:
            eng.theta_delta()
        else:
            base = None
            for tube in eng.tubes:
                for pos in range(tube.size):
                    theta = eng.theta_delta_from(tube.index, pos)
                    if base is None:
                        base = theta.poly
                    elif theta.poly != base:
                        failures.append(
                            f"theta_delta differs for tube {tube.index} position {pos}"
                        )
    elif name == "cheby":
        for k in range(2, kmax + 1):
            for l in range(1, k):
                lhs = eng.theta_k_delta(k).poly * eng.theta_k_delta(l).poly
                rhs = eng.theta_k_delta(k + l).poly + eng.y_monomial(
                    eng.data.delta.scale(l)
                ) * (eng.theta_k_delta(k - l).poly if k > l else eng.one())
                if lhs != rhs:
                    failures.append(f"product identity failed at k={k}, l={l}")
            sq = eng.theta_k_delta(k).poly * eng.theta_k_delta(k).poly
            rhs = eng.theta_k_delta(2 * k).poly + eng.y_monomial(
                eng.data.delta.scale(k), 2
            )
            if sq != rhs:
                failures.append(f"square identity failed at k={k}")
    elif name == "imexch":
        for tube in eng.tubes:
            for i in range(tube.size):
                for j in range(tube.size):
                    if i == j:
                        continue
                    try:
                        eng.imaginary_exchange(tube.index, i, j)
                    except IdentityViolated as exc:
                        failures.append(str(exc))
    elif name == "realexch":
        for tube in eng.tubes:
            for jset in maximal_compatible_sets(tube):
                for gamma in jset:
                    if gamma.length == tube.size - 1:
                        continue
                    try:
                        eng.real_exchange(tube.index, jset, gamma)
                    except IdentityViolated as exc:
                        failures.append(str(exc))
    elif name == "expansion":
        # the product of a boundary theta with a theta on the imaginary ray
        # peels back to a single basis element, exactly
        for tube in eng.tubes:
            for r in all_arcs(tube):
                t_arc = eng.theta_tube_root(r)
                for md in (1, 2):
                    combo = eng.expand_product(t_arc, eng.theta_k_delta(md))
                    label = t_arc.label + eng.data.nu_c(eng.data.delta).scale(md)
                    if combo != {label: eng.one()}:
                        failures.append(f"expansion product failed at {r}, m_delta={md}")
    elif name == "tube-closure":
        for tube in eng.tubes:
            gens = [eng.theta_tube_root(r) for r in all_arcs(tube) if r.length <= 2]
            for a in gens:
                for b in gens:
                    combo = eng.expand_product(a, b)
                    for label in combo:
                        phi = eng.data.nu_c_inv(label)
                        try:
                            _, arcs = cluster_expansion_imaginary(
                                eng.data, eng.tubes, phi
                            )
                            stray = [r for r in arcs if r.tube != tube.index]
                        except NotInImaginaryWall:
                            stray = [label]
                        if stray:
                            failures.append(
                                f"label {label.coords} left the span of tube {tube.index}"
                            )
    else:
        raise ConfigError(f"unknown identity {name}; choose from {IDENTITIES}")
    return failures


def cmd_verify(args) -> int:
    matrix = load_matrix(args.matrix)
    eng = ThetaEngine(matrix.top(), depth=args.depth)
    names = IDENTITIES if args.identity == "all" else [args.identity]
    failures: Dict[str, List[str]] = {}
    for name in sorted(names):
        _log(f"verifying {name}")
        try:
            bad = run_identity(eng, name, kmax=args.kmax)
        except IdentityViolated as exc:
            bad = [str(exc)]
        if bad:
            failures[name] = bad
        print(f"{name}: {'FAIL' if bad else 'ok'}")
        for msg in bad:
            print(f"  {msg}")
    return 1 if failures else 0


def cmd_report(args) -> int:
    matrix = load_matrix(args.matrix)
    eng = ThetaEngine(matrix.top())
    tubes = []
    for tube in eng.tubes:
        arcs = []
        for r in all_arcs(tube):
            vec = tube_root_vector(tube, r)
            arcs.append(
                {
                    "start": r.start,
                    "length": r.length,
                    "vector": list(vec.coords),
                    "nu_c": list(eng.data.nu_c(vec).coords),
                }
            )
        tubes.append(
            {
                "size": tube.size,
                "orbit": [list(v.coords) for v in tube.orbit],
                "arcs": arcs,
                "max_compatible_sets": len(maximal_compatible_sets(tube)),
            }
        )
    payload = {
        "matrix": matrix_json(matrix),
        "delta": list(eng.data.delta.coords),
        "nu_delta": list(eng.data.nu_c(eng.data.delta).coords),
        "symmetrizers": [str(x) for x in eng.data.d],
        "coxeter_order": [i + 1 for i in eng.data.order],
        "theta_delta": to_json_dict(eng.theta_delta().poly),
        "tubes": tubes,
    }
    emit(payload, args.format)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affcluster",
        description="Exact computations in cluster algebras of acyclic affine type.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, order=False, depth=False):
        p.add_argument("--matrix", required=True, help="path or bundled name: %s" % ",".join(BUNDLED))
        p.add_argument("--format", choices=["json", "text"], default="text")
        if order:
            p.add_argument("--order", type=int, default=8)
        if depth:
            p.add_argument("--depth", type=int, default=8)

    p = sub.add_parser("mutate", help="mutate an extended exchange matrix")
    common(p)
    p.add_argument("--word", required=True, help="comma-separated 1-based indices")
    p.set_defaults(func=cmd_mutate)

    p = sub.add_parser("gvec", help="g-vectors of the seed reached by a word")
    common(p)
    p.add_argument("--word", default="", help="comma-separated 1-based indices")
    p.set_defaults(func=cmd_gvec)

    p = sub.add_parser("tube-info", help="tubes, orbits and arc tables")
    common(p)
    p.add_argument("--height-bound", type=int, default=None)
    p.set_defaults(func=cmd_tube_info)

    p = sub.add_parser("expand", help="compatible expansion of a root in the imaginary wall")
    common(p)
    p.add_argument("--root", required=True, help="comma-separated root coordinates")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("theta", help="theta function for a label in the imaginary wall")
    common(p, depth=True)
    p.add_argument("--target", required=True, help='weight coordinates or "k*delta"')
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("scatter2", help="rank-2 scattering diagram by consistency")
    common(p, order=True)
    p.add_argument("--dump", default=None, help="write walls to this JSON file")
    p.set_defaults(func=cmd_scatter2)

    p = sub.add_parser("theta2", help="rank-2 theta function via broken lines")
    common(p, order=True)
    p.add_argument("--lambda", dest="lam", required=True, help="weight coordinates a,b")
    p.set_defaults(func=cmd_theta2)

    p = sub.add_parser("gca-graph", help="exchange graph of a tube's generalized seed")
    common(p)
    p.add_argument("--tube", type=int, default=0)
    p.add_argument("--json", dest="json_out", default=None)
    p.set_defaults(func=cmd_gca_graph)

    p = sub.add_parser("gca-verify", help="verify tube generalized cluster algebras")
    common(p)
    p.set_defaults(func=cmd_gca_verify)

    p = sub.add_parser("verify", help="verify theta-function identities")
    common(p, depth=True)
    p.add_argument("--identity", default="all", help="|".join(IDENTITIES + ["all"]))
    p.add_argument(
        "--kmax", type=int, default=4,
        help="largest multiple of the imaginary ray in the product identities",
    )
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="full structural report for a matrix")
    common(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    from .affine import HeightBoundTooSmall, SimplesMismatch
    from .seeds import NotFound
    from .theta import NonTerminating

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (IdentityViolated, NonTerminating) as exc:
        print(f"identity violated: {exc}", file=sys.stderr)
        return 1
    except (NotFound, NotInImaginaryWall, HeightBoundTooSmall, SimplesMismatch, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
