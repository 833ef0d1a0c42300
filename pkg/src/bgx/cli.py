"""Command line front end.

    bgx gmod --n 2                       # emit G(2) as JSON
    bgx pmod --k -1 --dmax 10            # emit a stunted projective module
    bgx qmap --n 2 --r 1                 # emit the classifying map q(2,1)
    bgx qext --n 1 --r 0 --check         # emit Q(1,0), optionally verified
    bgx ext --source 'G(2)' --target 'F2[2]' --algebra E1 --smax 4
    bgx dlchart --nmax 6 --smax 4 --algebra E1 --svg chart.svg
    bgx margolis --n 2 --r 4
    bgx freeness --n 1 --r 2 --algebra E1
    bgx verify all
    bgx convert in.json out.json

Every contract failure maps to a fixed nonzero exit status: 3 for schema
problems, 4 for window problems, 5 for domain exclusions, 6 for other
contract violations; `verify` exits 1 when a check fails.
"""

from __future__ import annotations

import argparse
import re
import sys

from .errors import BgxError, ContractViolation
from .steenrod import AlgebraSpec
from .amodule import AModule, f2_module, restrict
from .brown_gitler import (
    brown_gitler,
    default_window,
    mahowald_sequence,
    q_extension,
    q_map,
    rename,
    stunted_projective,
)
from .ext_engine import ext_chart, g_chart, is_free_over, margolis_homology
from .serialize import doc_to_module, dump_module, dumps_canonical, module_to_doc
from .chart_svg import render_chart_svg
from . import verify as verify_mod

__all__ = ["main", "build_parser"]


def _write(text: str, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_module(spec_str: str, algebra: AlgebraSpec) -> AModule:
    """G(n), F2, F2[k], P(k,dmax), or a path to a module document."""
    s = spec_str.strip()
    m = re.fullmatch(r"G\((\d+)\)", s)
    if m:
        mod = brown_gitler(int(m.group(1)))
        return mod if algebra.is_full else restrict(mod, algebra)
    m = re.fullmatch(r"F2(?:\[(-?\d+)\])?", s)
    if m:
        mod = f2_module(AlgebraSpec.full(), int(m.group(1) or 0))
        return mod if algebra.is_full else restrict(mod, algebra)
    m = re.fullmatch(r"P\((-?\d+),(\d+)\)", s)
    if m:
        mod = stunted_projective(int(m.group(1)), int(m.group(2)))
        return mod if algebra.is_full else restrict(mod, algebra)
    with open(s) as fh:
        mod = doc_to_module(__import__("json").load(fh))
    if mod.algebra != algebra and not algebra.is_full:
        mod = restrict(mod, algebra)
    return mod


def _map_doc(f, name):
    return {
        "name": name,
        "source": module_to_doc(f.source),
        "target": module_to_doc(f.target),
        "shift": f.shift,
        "matrices": {str(d): f.matrix(d).to_lists() for d in sorted(f.matrices)},
    }


def cmd_gmod(args):
    _write(dump_module(brown_gitler(args.n)), args.out)
    return 0


def cmd_pmod(args):
    _write(dump_module(stunted_projective(args.k, args.dmax)), args.out)
    return 0


def cmd_qmap(args):
    f = q_map(args.n, args.r)
    _write(dumps_canonical(_map_doc(f, "q(%d,%d)" % (args.n, args.r))), args.out)
    return 0


def cmd_qext(args):
    n, r = args.n, args.r
    seq = q_extension(n, r)
    status = 0
    if args.check:
        bad = seq.check()
        print("exact: %s" % ("yes" if bad is None else "NO (%s)" % bad))
        if bad is not None:
            status = 1
        from .amodule import extensions_equivalent, split_sequence

        nonsplit = not extensions_equivalent(seq, split_sequence(seq.sub, seq.quot))
        print("nonsplit: %s" % ("yes" if nonsplit else "no"))
        if r == n - 1:
            mah = mahowald_sequence(n).suspend(-1)
            same = extensions_equivalent(seq, mah)
            print("equivalent to the desuspended two-cell sequence: %s" % ("yes" if same else "NO"))
            if not same:
                status = 1
    _write(dump_module(rename(seq.mid, "Q(%d,%d)" % (n, r))), args.out)
    return status


def _chart_tsv(chart):
    lines = ["s\tt\tdim\tlabels"]
    for (s, t), cell in sorted(chart.cells.items()):
        if cell.dims:
            lines.append(
                "%d\t%d\t%d\t%s" % (s, t, cell.dims, ";".join(chart.labels(s, t)))
            )
    return "\n".join(lines) + "\n"


def cmd_ext(args):
    algebra = AlgebraSpec.from_name(args.algebra)
    target = _parse_module(args.target, algebra)
    source = _parse_module(args.source, algebra)
    chart = ext_chart(source, target, algebra, smax=args.smax, tmax=args.tmax)
    _write(_chart_tsv(chart), args.out)
    return 0


def cmd_dlchart(args):
    algebra = AlgebraSpec.from_name(args.algebra)
    target = _parse_module(args.target, algebra)
    charts = {
        n: g_chart(n, target, algebra, args.smax + 1, args.smax + 1)
        for n in range(args.nmax + 1)
    }
    lines = ["s\tn\tdim\tlabels"]
    dims = {}
    for n, chart in charts.items():
        for s in range(args.smax + 1):
            d = chart.dim(s, s)
            if d:
                dims[(s, n + s)] = d  # chart x-coordinate is n
                lines.append("%d\t%d\t%d\t%s" % (s, n, d, ";".join(chart.labels(s, s))))
    _write("\n".join(lines) + "\n", args.out)
    if args.svg:
        from .ext_engine import dl_on_ext, h0_on_ext_over, sq_on_ext

        edges = []
        full_target = _parse_module(args.target, AlgebraSpec.full())
        for n, chart in sorted(charts.items()):
            for s in range(args.smax):
                if not chart.dim(s, s):
                    continue
                h0 = h0_on_ext_over(chart, full_target, s, s)
                for i in range(h0.rows):
                    row = h0.row(i)
                    for j in range(h0.cols):
                        if (row >> j) & 1:
                            edges.append(
                                ("h0", (s, n + s, i), (s + 1, n + s + 1, j), "")
                            )
                for r in range(1, args.nmax - n + 1):
                    if (n + r) not in charts or not charts[n + r].dim(s + 1, s + 1):
                        continue
                    mat = dl_on_ext(
                        n, r, target, algebra, s,
                        chart_src=chart, chart_tgt=charts[n + r],
                    )
                    for i in range(mat.rows):
                        row = mat.row(i)
                        for j in range(mat.cols):
                            if (row >> j) & 1:
                                edges.append(
                                    (
                                        "Q",
                                        (s, n + s, i),
                                        (s + 1, n + r + s + 1, j),
                                        "Q%d" % r,
                                    )
                                )
        _write(render_chart_svg(dims, edges), args.svg)
    return 0


def cmd_margolis(args):
    if args.module:
        m = _parse_module(args.module, AlgebraSpec.full())
    else:
        m = rename(q_extension(args.n, args.r).mid, "Q(%d,%d)" % (args.n, args.r))
    for i in (0, 1):
        dims = margolis_homology(m, i)
        print(
            "H(%s, Q_%d): %s"
            % (m.name, i, " ".join("%d:%d" % kv for kv in sorted(dims.items())) or "0")
        )
    return 0


def cmd_freeness(args):
    algebra = AlgebraSpec.from_name(args.algebra)
    if args.module:
        m = _parse_module(args.module, AlgebraSpec.full())
    else:
        m = rename(q_extension(args.n, args.r).mid, "Q(%d,%d)" % (args.n, args.r))
    free, cert = is_free_over(m, algebra)
    print("%s free over %s: %s" % (m.name, algebra.name, "yes" if free else "no"))
    print("generators per degree: %s" % dict(sorted(cert["generators"].items())))
    if cert["first_failure"] is not None:
        print("first dimension mismatch at degree %d" % cert["first_failure"])
    return 0


def cmd_verify(args):
    ok = verify_mod.run(args.suites or ["all"])
    return 0 if ok else 1


def cmd_convert(args):
    with open(args.infile) as fh:
        m = doc_to_module(__import__("json").load(fh))
    with open(args.outfile, "w") as fh:
        fh.write(dump_module(m))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bgx",
        description="exact computations with free unstable modules, their "
        "extension families, and the operations acting on Ext charts",
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gmod", help="emit the free unstable module G(n)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_gmod)

    s = sub.add_parser("pmod", help="emit stunted projective homology")
    s.add_argument("--k", type=int, required=True, choices=(-1, 0, 1))
    s.add_argument("--dmax", type=int, default=None)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_pmod)

    s = sub.add_parser("qmap", help="emit the classifying map q(n,r)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_qmap)

    s = sub.add_parser("qext", help="emit the extension module Q(n,r)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--check", action="store_true")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_qext)

    s = sub.add_parser("ext", help="bigraded Ext chart as TSV")
    s.add_argument("--source", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--algebra", default="A")
    s.add_argument("--smax", type=int, default=4)
    s.add_argument("--tmax", type=int, default=8)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_ext)

    s = sub.add_parser("dlchart", help="diagonal family chart with operations")
    s.add_argument("--target", default="F2[2]")
    s.add_argument("--algebra", default="E1")
    s.add_argument("--nmax", type=int, default=6)
    s.add_argument("--smax", type=int, default=4)
    s.add_argument("--svg")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_dlchart)

    s = sub.add_parser("margolis", help="Margolis homology of Q(n,r) or a file")
    s.add_argument("--n", type=int)
    s.add_argument("--r", type=int)
    s.add_argument("--module")
    s.set_defaults(fn=cmd_margolis)

    s = sub.add_parser("freeness", help="freeness over E(0), E(1) or A(1)")
    s.add_argument("--n", type=int)
    s.add_argument("--r", type=int)
    s.add_argument("--module")
    s.add_argument("--algebra", default="E1")
    s.set_defaults(fn=cmd_freeness)

    s = sub.add_parser("verify", help="run acceptance suites")
    s.add_argument("suites", nargs="*", default=["all"])
    s.set_defaults(fn=cmd_verify)

    s = sub.add_parser("convert", help="validate and canonicalize a module file")
    s.add_argument("infile")
    s.add_argument("outfile")
    s.set_defaults(fn=cmd_convert)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "dmax", "x") is None:
        args.dmax = default_window()
    if args.command in ("margolis", "freeness") and not args.module:
        if args.n is None or args.r is None:
            raise ContractViolation("need --n and --r, or --module")
    try:
        return args.fn(args)
    except BgxError as exc:
        sys.stderr.write("bgx: %s: %s\n" % (type(exc).__name__, exc))
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
