"""Command-line driver: two-bridge, torus, floer, render and verify.

Exit codes: 0 ok, 1 computation failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .curves import TRANSVERSE_TOL, LiftedCurve, figure_eight, load_curves
from .errors import InvalidSpec, NonCoprime, PillowError
from .floer import ChainComplexZ4, GradedRanks, build_complex, homology
from .pillowcase import PerturbationFunction

SCHEMA = "pillowfloer/1"


@dataclass
class RunReport:
    command: str
    inputs: dict
    parameters: dict
    complex: ChainComplexZ4
    per_component: list[GradedRanks]
    total: GradedRanks
    L0: LiftedCurve | None = None
    curves: list[LiftedCurve] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        cx = self.complex.to_json()
        comps = []
        for c, cj, h in zip(self.complex.components, cx["components"], self.per_component):
            cj = dict(cj)
            cj["kind"] = c.curve.kind
            cj["chain"] = list(c.chain_ranks().ranks)
            cj["homology"] = list(h.ranks)
            for gen in cj["generators"]:
                gen["s0"], gen["s1"] = round(gen["s0"], 9), round(gen["s1"], 9)
                gen["point"] = [round(x, 9) for x in gen["point"]]
            for b in cj["bigons"]:
                b["alpha0"] = [round(x, 9) for x in b["alpha0"]]
                b["alpha1"] = [round(x, 9) for x in b["alpha1"]]
            comps.append(cj)
        return {
            "schema": SCHEMA,
            "version": __version__,
            "command": self.command,
            "inputs": self.inputs,
            "parameters": self.parameters,
            "components": comps,
            "chain": list(self.complex.chain_ranks().ranks),
            "homology": list(self.total.ranks),
            "warnings": list(self.warnings),
            "curves": [c.to_json() for c in self.curves],
        }

    def to_text(self) -> str:
        lines = [f"{self.command} {' '.join(str(v) for v in self.inputs.values())}"]
        for c, h in zip(self.complex.components, self.per_component):
            lines.append(f"  {c.label} ({c.curve.kind}): chain {c.chain_ranks()} homology {h}")
            for lab in c.labels:
                lines.append(f"    {lab:<20} gr {c.degree(lab)}")
            for b in c.bigons:
                lines.append(f"    bigon {b.source} -> {b.target} [{b.interior_class}]")
        lines.append(f"total chain {self.complex.chain_ranks()}")
        lines.append(f"H = {self.total}")
        lines.extend(f"warning: {w}" for w in self.warnings)
        return "\n".join(lines)


def _g(text: str | None) -> PerturbationFunction:
    return PerturbationFunction.parse(text or "")


def _common(args) -> dict:
    return {"eps": args.eps, "g": repr(_g(args.g)), "samples": args.samples, "kmax": args.kmax,
            "window": args.window if args.window is not None else args.kmax, "tol": args.tol}


def cmd_two_bridge(p: int, q: int, args) -> RunReport:
    from .knots.twobridge import TwoBridgeSpec, two_bridge_complex

    spec = TwoBridgeSpec(p, q)
    sigma = spec.signature() if args.signature is None else args.signature
    cx = two_bridge_complex(spec, args.eps, _g(args.g), sigma)
    per, total = homology(cx)
    params = _common(args) | {"signature": sigma, "gradings": "exact"}
    return RunReport("two-bridge", {"p": p, "q": q}, params, cx, per, total,
                     figure_eight(args.eps, _g(args.g), args.samples), [cx.components[0].curve])


def cmd_torus(p: int, q: int, r: int, s: int, args) -> RunReport:
    from .knots.invariants import signature_torus
    from .knots.torus import TorusSpec, torus_knot_homology

    spec = TorusSpec(p, q, r, s, args.epsA, args.epsB)
    sigma = signature_torus(p, q) if args.signature is None else args.signature
    rep = torus_knot_homology(spec, eps=args.eps, g=_g(args.g), signature=sigma, k_max=args.kmax,
                              samples=args.samples, window=args.window, tol=args.tol, grid=args.seed_grid)
    if args.sidecar:
        side = {"spec": {"p": p, "q": q, "r": r, "s": s, "epsA": rep.regime[0], "epsB": rep.regime[1]},
                "components": [c.sidecar() for c in rep.components]}
        Path(args.sidecar).write_text(json.dumps(side) + "\n")
    params = _common(args) | {"epsA": rep.regime[0], "epsB": rep.regime[1], "epsA_requested": args.epsA,
                              "epsB_requested": args.epsB, "g_used": repr(rep.g), "signature": sigma,
                              "seed_grid": args.seed_grid}
    return RunReport("torus", {"p": p, "q": q, "r": r, "s": s}, params, rep.complex, rep.per_component,
                     rep.total, figure_eight(args.eps, rep.g, args.samples), rep.curves, rep.warnings)


def cmd_floer(curve_file: str, args) -> RunReport:
    curves = load_curves(curve_file)
    L0 = load_curves(args.l0)[0] if args.l0 else figure_eight(args.eps, _g(args.g), args.samples)
    cx = build_complex(L0, curves, signature=args.signature, k_max=args.kmax, window=args.window, tol=args.tol)
    per, total = homology(cx)
    params = _common(args) | {"signature": args.signature, "l0": args.l0}
    warnings = [w for c in cx.components for w in c.warnings]
    return RunReport("floer", {"l1": str(curve_file)}, params, cx, per, total, L0, curves, warnings)


def cmd_render(source: str, out: str, args) -> None:
    """Draw a report (rerun from its recorded inputs) or a curve file against L0."""
    from .render import render_svg

    data = json.loads(Path(source).read_text())
    if "schema" in data:
        if data["schema"] != SCHEMA:
            raise PillowError(f"unsupported report schema {data['schema']!r}")
        rep = _rerun(data)
        render_svg(rep.L0, rep.curves, rep.complex, _title(rep), out)
        return
    curves = [LiftedCurve.from_json(c) for c in data["curves"]]
    L0 = figure_eight(args.eps, _g(args.g), args.samples)
    cx = build_complex(L0, curves, signature=args.signature, k_max=args.kmax)
    render_svg(L0, curves, cx, Path(source).name, out)


def _rerun(data: dict) -> RunReport:
    par = data["parameters"]
    ns = argparse.Namespace(eps=par["eps"], g=par.get("g_used", par["g"]), samples=par["samples"], kmax=par["kmax"],
                            window=par.get("window"), tol=par.get("tol", TRANSVERSE_TOL),
                            signature=par.get("signature"), l0=par.get("l0"))
    if data["command"] == "two-bridge":
        return cmd_two_bridge(data["inputs"]["p"], data["inputs"]["q"], ns)
    curves = [LiftedCurve.from_json(c) for c in data["curves"]]
    L0 = figure_eight(ns.eps, _g(ns.g), ns.samples)
    track = None
    if data["command"] == "torus":
        track = (lambda e: figure_eight(e, _g(ns.g), ns.samples), ns.eps)
    cx = build_complex(L0, curves, signature=ns.signature, k_max=ns.kmax, window=ns.window, tol=ns.tol,
                       track=track)
    per, total = homology(cx)
    return RunReport(data["command"], data["inputs"], par, cx, per, total, L0, curves)


def _title(rep: RunReport) -> str:
    return f"{rep.command} {' '.join(str(v) for v in rep.inputs.values())}   H = {rep.total}"


def _emit(rep: RunReport, args) -> None:
    print(rep.to_text())
    if args.json:
        Path(args.json).write_text(json.dumps(rep.to_json(), indent=1) + "\n")
    if args.svg:
        from .render import render_svg

        render_svg(rep.L0, rep.curves, rep.complex, _title(rep), args.svg)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eps", type=float, default=0.1, help="figure-eight parameter")
    common.add_argument("--g", default="", help='sine series "k:amp,..." for the isotopy of L0')
    common.add_argument("--signature", type=int, default=None, help="override the built-in signature")
    common.add_argument("--samples", type=int, default=512, help="samples on one period of L0")
    common.add_argument("--window", type=int, default=None, help="periods of L1 a bigon side may wind")
    common.add_argument("--kmax", type=int, default=2, help="periods of L0 a bigon side may wind")
    common.add_argument("--tol", type=float, default=TRANSVERSE_TOL, help="transversality tolerance")
    common.add_argument("--json", default=None, help="write the report as JSON")
    common.add_argument("--svg", default=None, help="write a picture as SVG")

    ap = argparse.ArgumentParser(prog="pillowfloer", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)
    tb = sub.add_parser("two-bridge", parents=[common], help="2-bridge knot K(p,q)")
    tb.add_argument("p", type=int)
    tb.add_argument("q", type=int)
    to = sub.add_parser("torus", parents=[common], help="torus knot with pr+qs=1")
    for name in "pqrs":
        to.add_argument(name, type=int)
    to.add_argument("--epsA", type=float, default=0.01)
    to.add_argument("--epsB", type=float, default=0.0)
    to.add_argument("--seed-grid", type=int, default=64, dest="seed_grid")
    to.add_argument("--sidecar", default=None, help="write traced (u, v, tau) samples as JSON")
    fl = sub.add_parser("floer", parents=[common], help="Floer homology of L0 and curves from a file")
    fl.add_argument("--l1", required=True, help="JSON curve file")
    fl.add_argument("--l0", default=None, help="optional JSON file replacing the figure-eight")
    rd = sub.add_parser("render", parents=[common], help="draw a report or a curve file")
    rd.add_argument("source")
    rd.add_argument("out")
    ve = sub.add_parser("verify", help="run the built-in property suites")
    ve.add_argument("suite", nargs="*", default=[], help="suite names (default: all fast suites)")
    ve.add_argument("--cases", type=int, default=200)
    ve.add_argument("--seed", type=int, default=0)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "two-bridge":
            _emit(cmd_two_bridge(args.p, args.q, args), args)
        elif args.cmd == "torus":
            _emit(cmd_torus(args.p, args.q, args.r, args.s, args), args)
        elif args.cmd == "floer":
            _emit(cmd_floer(args.l1, args), args)
        elif args.cmd == "render":
            cmd_render(args.source, args.out, args)
        elif args.cmd == "verify":
            from .verify import run_suites

            return 0 if run_suites(args.suite, cases=args.cases, seed=args.seed) else 1
    except (InvalidSpec, NonCoprime) as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    except PillowError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
