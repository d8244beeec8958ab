"""Command-line front end: every computation as a subcommand writing CSV.

Exit codes: 0 success, 2 invalid configuration, 3 convergence or domain
failure, 4 no click in the post-selection.
"""
from __future__ import annotations

import argparse
import io
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import DPANCSError, NoClickError
from .generation import generation_experiment, write_generation_csv
from .nonclassicality import sweep, write_sweep_csv
from .nonlinearity import NonlinearityFn
from .states import Family, StateSpec, build_state
from .weights import (
    klauder_targets, log_grid, moment_check, moment_targets, negative_kernel,
    negative_moment_targets, positivity_scan, tilde_kernel, weight_full, weight_klauder,
    weight_negative_m, write_moment_csv, write_weight_csv,
)

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_NO_CLICK = 0, 2, 3, 4
OUTPUT_DIR_ENV = "DPANCS_OUTPUT_DIR"
F_CHOICES = ("unity", "pt", "sqrtn", "invsqrtn", "bg")
WEIGHT_CASES = ("pt", "pt-neg", "sqrtn", "sqrtn-neg", "unity-neg", "klauder", "positive", "negative")
COMMANDS = ("state", "criteria", "weight", "moments", "generate")


@dataclass
class RunConfig:
    """Flat run description; ``to_text``/``from_text`` round-trip exactly."""

    command: str
    alpha: list[float] = field(default_factory=lambda: [1.0])
    m: list[int] = field(default_factory=lambda: [1])
    f: str = "unity"
    nu: float = 3.0
    kappa: float = 1.0
    negative: bool = False
    tol: float = 1e-12
    N: int | None = None
    case: str = "pt"
    x_min: float = 1e-2
    x_max: float = 40.0
    points: int = 200
    count: int = 12
    eta: list[float] = field(default_factory=lambda: [0.04, 0.02, 0.01])
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.f not in F_CHOICES:
            raise ValueError(f"--f must be one of {', '.join(F_CHOICES)}")
        if self.case not in WEIGHT_CASES:
            raise ValueError(f"--case must be one of {', '.join(WEIGHT_CASES)}")
        if not self.alpha or not self.m:
            raise ValueError("alpha and m lists must be nonempty")
        if self.points < 2 or self.count < 1 or self.workers < 1:
            raise ValueError("points >= 2, count >= 1 and workers >= 1 are required")
        if not 0 < self.x_min < self.x_max:
            raise ValueError("need 0 < x_min < x_max")

    def nonlinearity(self) -> NonlinearityFn:
        return make_f(self.f, self.nu, self.kappa)

    def to_text(self) -> str:
        lines = []
        for fl in fields(self):
            v = getattr(self, fl.name)
            if v is None:
                continue
            if isinstance(v, list):
                v = ",".join(repr(x) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{fl.name}={v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        return cls(**coerce(parse_kv(text)))


def parse_kv(text: str) -> dict[str, str]:
    """Flat ``key=value`` lines; blank lines and '#' comments ignored."""
    out = {}
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {i}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def _float_list(text: str) -> list[float]:
    """Comma list, or ``start:stop:num`` for an inclusive linear grid."""
    text = str(text)
    if ":" in text:
        start, stop, num = text.split(":")
        return [float(v) for v in np.linspace(float(start), float(stop), int(num))]
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text: str) -> list[int]:
    return [int(v) for v in str(text).split(",") if v.strip()]


_CONVERT = {
    "alpha": _float_list, "eta": _float_list, "m": _int_list,
    "nu": float, "kappa": float, "tol": float, "x_min": float, "x_max": float,
    "N": int, "points": int, "count": int, "workers": int,
    "negative": lambda v: str(v).lower() in ("1", "true", "yes"),
}


def coerce(raw: dict[str, str]) -> dict:
    known = {fl.name for fl in fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return {k: _CONVERT.get(k, str)(v) for k, v in raw.items()}


def make_f(kind: str, nu: float = 3.0, kappa: float = 1.0) -> NonlinearityFn:
    return {
        "unity": NonlinearityFn.unity,
        "pt": lambda: NonlinearityFn.pt(nu),
        "sqrtn": NonlinearityFn.sqrt,
        "invsqrtn": NonlinearityFn.inv_sqrt,
        "bg": lambda: NonlinearityFn.barut_girardello(kappa),
    }[kind]()


def resolve_output(path: str | None) -> Path | None:
    """Relative paths are placed under $DPANCS_OUTPUT_DIR when it is set."""
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


# -- subcommands ------------------------------------------------------------

def cmd_state(cfg: RunConfig, out):
    fam = Family.NEGATIVE_M if cfg.negative else Family.DPANCS
    m = -abs(cfg.m[0]) if cfg.negative else cfg.m[0]
    spec = StateSpec(cfg.alpha[0], m, cfg.nonlinearity(), fam)
    state = build_state(spec, N=cfg.N, tol=min(cfg.tol, 1e-14))
    state.to_csv(out, skip_zeros=True)


def cmd_criteria(cfg: RunConfig, out):
    rows = sweep(cfg.alpha, cfg.m, cfg.nonlinearity(), tol=cfg.tol, workers=cfg.workers)
    write_sweep_csv(rows, out)


def _weight_fn(cfg: RunConfig):
    m = cfg.m[0]
    case = cfg.case
    if case == "klauder":
        return weight_klauder
    f = {"pt": make_f("pt", cfg.nu), "pt-neg": make_f("pt", cfg.nu), "sqrtn": make_f("sqrtn"),
         "sqrtn-neg": make_f("sqrtn"), "unity-neg": make_f("unity")}.get(case, cfg.nonlinearity())
    if case.endswith("neg") or case == "negative":
        return lambda x: weight_negative_m(f, m, x)
    return lambda x: weight_full(f, m, x)


def cmd_weight(cfg: RunConfig, out):
    xs = log_grid(cfg.x_min, cfg.x_max, cfg.points)
    ws = np.asarray(_weight_fn(cfg)(xs), dtype=float)
    report = positivity_scan(lambda _: ws, xs) if cfg.points >= 200 else None
    write_weight_csv(xs, ws, out, report)


def cmd_moments(cfg: RunConfig, out):
    m, case = cfg.m[0], cfg.case
    if case == "klauder":
        kernel, targets = weight_klauder, klauder_targets(cfg.count)
    elif case.endswith("neg") or case == "negative":
        f = {"pt-neg": make_f("pt", cfg.nu), "sqrtn-neg": make_f("sqrtn"),
             "unity-neg": make_f("unity")}.get(case, cfg.nonlinearity())
        kernel, targets = negative_kernel(f, m), negative_moment_targets(f, m, cfg.count)
    else:
        f = {"pt": make_f("pt", cfg.nu), "sqrtn": make_f("sqrtn")}.get(case, cfg.nonlinearity())
        kernel, targets = tilde_kernel(f, m), moment_targets(f, m, cfg.count)
    write_moment_csv(moment_check(kernel, targets), out)


def cmd_generate(cfg: RunConfig, out):
    report = generation_experiment(cfg.alpha[0], cfg.nonlinearity(), cfg.m[0], cfg.eta, N=cfg.N)
    write_generation_csv(report, out)
    if report.infidelity_order is not None:
        print(f"fitted order: infidelity {report.infidelity_order:.4f}, "
              f"success probability {report.success_order:.4f}", file=sys.stderr)


COMMAND_FNS = {"state": cmd_state, "criteria": cmd_criteria, "weight": cmd_weight,
               "moments": cmd_moments, "generate": cmd_generate}


# -- argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpancs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; explicit flags override it")
    common.add_argument("--f", choices=F_CHOICES, default=argparse.SUPPRESS)
    common.add_argument("--nu", type=float, default=argparse.SUPPRESS)
    common.add_argument("--kappa", type=float, default=argparse.SUPPRESS)
    common.add_argument("--m", type=_int_list, default=argparse.SUPPRESS,
                        help="integer or comma list")
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS,
                        help=f"output file (relative paths go under ${OUTPUT_DIR_ENV})")
    common.add_argument("--print-config", action="store_true",
                        help="print the resolved configuration and exit")

    helps = {
        "state": "Fock coefficients of one state",
        "criteria": "nonclassicality sweep over alpha and m",
        "weight": "tabulate a weight function on a log grid",
        "moments": "moment-problem verification by quadrature",
        "generate": "post-selected generation fidelity versus eta",
    }
    subs = {name: sub.add_parser(name, parents=[common], help=h) for name, h in helps.items()}
    for name in ("state", "criteria", "generate"):
        subs[name].add_argument("--alpha", type=_float_list, default=argparse.SUPPRESS,
                                help="value, comma list, or start:stop:num")
    subs["state"].add_argument("--negative", action="store_true", default=argparse.SUPPRESS)
    for name in ("state", "generate"):
        subs[name].add_argument("--N", type=int, default=argparse.SUPPRESS)
    subs["criteria"].add_argument("--workers", type=int, default=argparse.SUPPRESS)
    for name in ("weight", "moments"):
        subs[name].add_argument("--case", choices=WEIGHT_CASES, default=argparse.SUPPRESS)
    subs["weight"].add_argument("--x-min", dest="x_min", type=float, default=argparse.SUPPRESS)
    subs["weight"].add_argument("--x-max", dest="x_max", type=float, default=argparse.SUPPRESS)
    subs["weight"].add_argument("--points", type=int, default=argparse.SUPPRESS)
    subs["moments"].add_argument("--count", type=int, default=argparse.SUPPRESS)
    subs["generate"].add_argument("--eta", type=_float_list, default=argparse.SUPPRESS)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(ns, "config", None):
        raw = coerce(parse_kv(Path(ns.config).read_text()))
        raw.pop("command", None)
        values.update(raw)
    for k, v in vars(ns).items():
        if k in ("config", "print_config"):
            continue
        values[k] = v
    return RunConfig(**values)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = config_from_args(ns)
    except (ValueError, TypeError, OSError) as exc:
        print(f"dpancs: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if ns.print_config:
        sys.stdout.write(cfg.to_text())
        return EXIT_OK
    buf = io.StringIO()
    try:
        COMMAND_FNS[cfg.command](cfg, buf)
    except NoClickError as exc:
        print(f"dpancs: no click: {exc}", file=sys.stderr)
        return EXIT_NO_CLICK
    except DPANCSError as exc:
        print(f"dpancs: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ValueError as exc:
        print(f"dpancs: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    target = resolve_output(cfg.out)
    if target is None:
        sys.stdout.write(buf.getvalue())
    else:
        target.write_text(buf.getvalue())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
