"""Command-line front end.

Exit status: 0 on success, 1 on bad input, 2 when a certified bound fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import unitary_group

from . import finvn, lacunary, norms
from ._parallel import ordered_map
from .fourier import FourierElement, l1_dual_norm, l2_norm
from .rep import suq2

DEFAULT_SEED = 20240101
AUDIT_TOL = 1e-12

EXIT_OK, EXIT_INPUT, EXIT_CONTRACT = 0, 1, 2


class InputError(Exception):
    """Bad user input; the message names the offending field."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int_list(text) -> list[int]:
    if isinstance(text, list):
        return [int(v) for v in text]
    return [int(v) for v in str(text).split(",") if v.strip()]


# name -> {param: (type, default, help)}
COMMANDS: dict[str, dict] = {
    "norms": {
        "op": (str, None, "central-l2 | central-l4 | central-sup | l1 | gns | fourier-l2 | fourier-l1 | theta-l2 | combo"),
        "q": (float, None, "deformation parameter"),
        "coeffs": (str, None, "central coefficients as JSON, e.g. '{\"1\": [1, 0]}'"),
        "input": (str, None, "path of a CentralPoly or FourierElement JSON file"),
        "poly": (str, None, "generator polynomial, e.g. '(1+0i)*a g*'"),
        "matrix": (str, None, "2x2 matrix A as JSON [[re, im] ...] rows, for op=combo"),
        "theta": (float, 0.0, "embedding parameter for theta-l2"),
        "trunc": (int, 64, "truncation size"),
        "theta_grid": (int, 256, "grid size in the circle parameter / torus angle"),
    },
    "gapset": {
        "q": (float, 0.5, "deformation parameter"),
        "count": (int, 8, "number of gap-set labels"),
        "n0": (int, 0, "first label of the gap set"),
        "first_n": (int, None, "restrict to the first labels"),
        "trials": (int, 10000, "random unit vectors per prefix"),
        "multistarts": (int, 16, "gradient ascents per prefix"),
    },
    "extract": {
        "n_dim": (int, 16, "matrix size N"),
        "n": (int, 2, "half the exponent p = 2n"),
        "count": (int, 8, "number of elements to select"),
        "family": (str, "matrix-units", "matrix-units | fourier-unitaries | random-gs"),
        "state": (str, None, "StateAlgebra JSON file (random rho otherwise)"),
        "rho_seed": (int, None, "seed for the random density (defaults to --seed)"),
        "diagonal": (_bool, False, "random rho diagonal in the standard basis"),
        "trials": (int, 1000, "coefficient vectors in the ratio check"),
    },
    "khintchine": {
        "n_dim": (int, 4, "matrix size N"),
        "m": (int, 6, "number of elements"),
        "p": (float, 4.0, "exponent p >= 2"),
        "batteries": (int, 1, "independent random batteries"),
        "exhaustive_up_to": (int, 12, "exact sign enumeration up to this many elements"),
        "trials": (int, 4096, "Monte Carlo sign patterns beyond the cutoff"),
    },
    "sidon-fund": {
        "q": (float, 0.5, "deformation parameter"),
        "trials": (int, 100, "random (A, V) pairs"),
        "trunc": (int, 64, "truncation size"),
        "theta_grid": (int, 256, "circle grid size"),
        "tol": (float, 0.05, "relative slack on 1 + 1/q"),
        "per_trial": (_bool, False, "emit one CSV row per trial"),
    },
    "screen-q": {
        "q": (float, 0.5, "deformation parameter"),
        "set": (_int_list, None, "comma-separated labels"),
        "upto": (int, None, "use labels 0..upto"),
        "gap_count": (int, None, "use gap_set(gap_count)"),
        "threshold": (float, math.inf, "screen threshold"),
    },
    "contrast": {
        "q": (float, 0.5, "deformation parameter"),
        "n_max": (int, 50, "largest label"),
    },
    "probe": {
        "q": (float, 0.5, "deformation parameter"),
        "count": (int, 6, "gap-set size"),
        "p": (int, 4, "2 or 4"),
        "symbol": (str, None, "JSON map label -> [re, im]; random signs if omitted"),
        "trials": (int, 1000, "sampled polynomials"),
    },
}

COMMON = {
    "seed": (int, DEFAULT_SEED, "random seed"),
    "output": (str, None, "output path (stdout if omitted)"),
    "format": (str, "json", "json | csv"),
    "no_timing": (_bool, False, "omit runtime_ms so reports are byte-identical"),
}


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    output: str | None = None
    format: str = "json"
    no_timing: bool = False


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lacuna", allow_abbrev=False,
                     description="Fourier analysis and lacunary sets on SU_q(2).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, spec in COMMANDS.items():
        p = sub.add_parser(name, allow_abbrev=False)
        if name == "norms":
            p.add_argument("op_positional", nargs="?", metavar="OP", help=spec["op"][2])
        for key, (typ, default, help_) in {**spec, **COMMON}.items():
            flag = "--" + key.replace("_", "-")
            kw = {"nargs": "?", "const": "true"} if typ is _bool else {}
            p.add_argument(flag, dest=key, default=None, type=str, help=f"{help_} (default: {default})", **kw)
        p.add_argument("--config", dest="config", default=None, help="key=value file merged under the flags")
    return parser


def _read_config(path: str) -> dict:
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise InputError(f"config: cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"config:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def make_config(args: argparse.Namespace) -> RunConfig:
    spec = {**COMMANDS[args.command], **COMMON}
    raw = {k: getattr(args, k) for k in spec}
    if args.command == "norms" and args.op_positional and raw.get("op") is None:
        raw["op"] = args.op_positional
    if args.config:
        for key, value in _read_config(args.config).items():
            if key not in spec:
                raise InputError(f"config.{key}: unknown key for command {args.command!r}")
            if raw.get(key) is None:
                raw[key] = value
    values = {}
    for key, (typ, default, _) in spec.items():
        value = raw.get(key)
        if value is None:
            values[key] = default
            continue
        try:
            values[key] = typ(value)
        except (TypeError, ValueError) as exc:
            raise InputError(f"--{key.replace('_', '-')}: {exc}") from exc
    common = {k: values.pop(k) for k in COMMON}
    if common["format"] not in ("json", "csv"):
        raise InputError("--format: must be 'json' or 'csv'")
    return RunConfig(args.command, values, **common)


# --- emission --------------------------------------------------------------

def _round(value):
    if isinstance(value, float):
        if math.isfinite(value):
            return float(f"{value:.12g}")
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {k: _round(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round(v) for v in value]
    if isinstance(value, np.generic):
        return _round(value.item())
    return value


def report_rows(report: dict) -> list[tuple]:
    """CSV rows ``(command, point, statistic, value)``."""
    rows = []
    for point, stats in report.get("table", []):
        for stat, value in stats.items():
            rows.append((report["command"], point, stat, value))
    if "table" not in report:
        for stat in ("estimate", "certified", "margin", "seed", "runtime_ms"):
            if stat in report:
                rows.append((report["command"], "", stat, report[stat]))
    return rows


def emit(report: dict, fmt: str, path: str | None = None) -> str:
    """Serialize a report; JSON keeps field order, CSV has one row per statistic."""
    report = _round(report)
    if fmt == "json":
        text = json.dumps(report, indent=2) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["command", "point", "statistic", "value"])
        for row in report_rows(report):
            writer.writerow([_fmt_csv(v) for v in row])
        text = buf.getvalue()
    else:
        raise InputError(f"--format: unknown format {fmt!r}")
    if path:
        try:
            with open(path, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise InputError(f"--output: cannot write {path}: {exc}") from exc
    return text


def _fmt_csv(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return "" if v is None else v


# --- commands --------------------------------------------------------------

def _need(params, key):
    if params.get(key) is None:
        raise InputError(f"--{key.replace('_', '-')}: required")
    return params[key]


def _load_json_arg(text: str, field_name: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"--{field_name}: malformed JSON: {exc}") from exc


def _load_json_file(path: str, field_name: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"--{field_name}: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"--{field_name}: malformed JSON: {exc}") from exc


def _central_from_params(p) -> norms.CentralPoly:
    if p.get("input"):
        data = _load_json_file(p["input"], "input")
    else:
        data = {"q": _need(p, "q"), "coeffs": _load_json_arg(_need(p, "coeffs"), "coeffs")}
    try:
        return norms.CentralPoly.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"--coeffs: {exc}") from exc


def run_norms(cfg: RunConfig) -> tuple[dict, int]:
    p = cfg.params
    op = _need(p, "op")
    extra = {}
    if op in ("central-l2", "central-l4", "central-sup", "l1"):
        f = _central_from_params(p)
        if op == "central-l2":
            value = norms.central_l2(f)
        elif op == "central-l4":
            value = norms.central_l4(f)
        elif op == "central-sup":
            value, err = norms.central_sup_norm(f, p["theta_grid"], return_bound=True)
            extra["grid_error"] = err
        else:
            value = norms.l1_central(f)
    elif op in ("fourier-l2", "fourier-l1", "theta-l2"):
        try:
            x = FourierElement.from_json(_load_json_file(_need(p, "input"), "input"))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"--input: {exc}") from exc
        if op == "fourier-l2":
            value = l2_norm(x)
        elif op == "fourier-l1":
            value = l1_dual_norm(x)
        else:
            value = norms.l2_theta_norm(x, p["theta"])
    elif op == "gns":
        try:
            poly = norms.GeneratorPoly.parse(_need(p, "poly"))
        except ValueError as exc:
            raise InputError(f"--poly: {exc}") from exc
        value = norms.gns_norm_estimate(poly, _need(p, "q"), p["trunc"], p["theta_grid"])
        extra["lower_bound"] = True
    elif op == "combo":
        rows = _load_json_arg(_need(p, "matrix"), "matrix")
        try:
            A = np.array([[complex(*e) if isinstance(e, list) else complex(e) for e in r] for r in rows])
        except (TypeError, ValueError) as exc:
            raise InputError(f"--matrix: {exc}") from exc
        value = norms.fundamental_combo_norm(A, _need(p, "q"), p["trunc"], p["theta_grid"])
    else:
        raise InputError(f"--op: unknown norm {op!r}")
    params = {k: v for k, v in p.items() if v is not None}
    rep = lacunary.LacunaReport("norms", params, float(value), seed=cfg.seed, extra=extra)
    return rep.to_json(), EXIT_OK


def run_gapset(cfg: RunConfig) -> tuple[dict, int]:
    p = cfg.params
    if not 0.0 < p["q"] <= 1.0:
        raise InputError("--q: must lie in (0, 1]")
    labels = lacunary.gap_set(p["count"], p["n0"], q=p["q"])
    rep = lacunary.central_lambda4_ratio(labels, p["first_n"], p["trials"], p["multistarts"], cfg.seed)
    rep.params["n0"] = p["n0"]
    return rep.to_json(), EXIT_OK if rep.within_certificate else EXIT_CONTRACT


def run_extract(cfg: RunConfig) -> tuple[dict, int]:
    p = cfg.params
    if p["state"]:
        try:
            A = finvn.StateAlgebra.from_json(_load_json_file(p["state"], "state"))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"--state: {exc}") from exc
    else:
        rho_seed = cfg.seed if p["rho_seed"] is None else p["rho_seed"]
        A = finvn.StateAlgebra.random(p["n_dim"], seed=rho_seed, diagonal=p["diagonal"])
    try:
        B = finvn.build_family(A, p["family"], seed=cfg.seed)
    except ValueError as exc:
        raise InputError(f"--family: {exc}") from exc
    res = finvn.greedy_lambda_select(B, p["n"], p["count"])
    audit = finvn.audit_selection(B, res)
    ratio = finvn.lambda_ratio_check(A, [B.elements[i] for i in res.indices], 2 * p["n"], p["trials"], cfg.seed)
    ok = ratio <= res.constant and audit <= 1.0 + AUDIT_TOL
    rep = lacunary.LacunaReport(
        "extract", {k: v for k, v in p.items() if v is not None}, ratio, res.constant, cfg.seed,
        extra={"selected": res.indices, "K": res.K, "log_constant": res.log_constant,
               "complete": res.complete, "audit_max_ratio": audit},
    )
    return rep.to_json(), EXIT_OK if ok else EXIT_CONTRACT


def random_family(N: int, m: int, rng: np.random.Generator) -> list:
    return list(rng.standard_normal((m, N, N)) + 1j * rng.standard_normal((m, N, N)))


def run_khintchine(cfg: RunConfig) -> tuple[dict, int]:
    p = cfg.params
    if p["p"] < 2:
        raise InputError("--p: must be >= 2")
    table, violations = [], 0
    worst_ratio = 0.0
    for b in range(p["batteries"]):
        rng = np.random.default_rng([cfg.seed, b])
        A = finvn.StateAlgebra.random(p["n_dim"], seed=int(rng.integers(2 ** 31)))
        res = finvn.khintchine_sample(A, random_family(p["n_dim"], p["m"], rng), p["p"],
                                      p["exhaustive_up_to"], p["trials"], cfg.seed)
        ratio = res.lhs / (math.sqrt(p["p"]) * res.crp)
        worst_ratio = max(worst_ratio, ratio)
        if res.exact and res.crp > res.lhs * (1 + AUDIT_TOL):
            violations += 1
        table.append([f"battery={b}", {"lhs": res.lhs, "crp": res.crp, "ratio": ratio, "exact": res.exact}])
    out = {"command": "khintchine", "params": p, "estimate": worst_ratio, "certified": None,
           "violations": violations, "seed": cfg.seed, "table": table}
    return out, EXIT_OK if violations == 0 else EXIT_CONTRACT


def _sidon_trial(args):
    q, seed, i, trunc, grid = args
    rng = np.random.default_rng([seed, i])
    A = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    V = unitary_group.rvs(2, random_state=rng)
    return lacunary.sidon_singleton_check(q, A, V, trunc, grid)


def sidon_battery(q: float, trials: int, seed: int, trunc: int = 64, theta_grid: int = 256) -> list[float]:
    return ordered_map(_sidon_trial, [(q, seed, i, trunc, theta_grid) for i in range(trials)])


def run_sidon(cfg: RunConfig) -> tuple[dict, int]:
    p = cfg.params
    if not 0.0 < p["q"] < 1.0:
        raise InputError("--q: must lie in (0, 1)")
    ratios = sidon_battery(p["q"], p["trials"], cfg.seed, p["trunc"], p["theta_grid"])
    bound = lacunary.sidon_bound(p["q"]) * (1.0 + p["tol"])
    rep = lacunary.LacunaReport("sidon-fund", dict(p), max(ratios), bound, cfg.seed).to_json()
    if p["per_trial"]:
        rep["table"] = [[f"trial={i}", {"ratio": r}] for i, r in enumerate(ratios)]
    return rep, EXIT_OK if max(ratios) <= bound else EXIT_CONTRACT


def run_screen(cfg: RunConfig) -> tuple[dict, int]:
    p = cfg.params
    if p["set"] is not None:
        labels = lacunary.IrrepSet(tuple(p["set"]))
    elif p["upto"] is not None:
        labels = lacunary.IrrepSet(tuple(range(p["upto"] + 1)))
    elif p["gap_count"] is not None:
        labels = lacunary.gap_set(p["gap_count"])
    else:
        raise InputError("--set: one of --set, --upto, --gap-count is required")
    try:
        screen = lacunary.check_q_boundedness(labels, suq2(p["q"]), p["threshold"])
    except ValueError as exc:
        raise InputError(f"--q: {exc}") from exc
    out = {"command": "screen-q", "params": {k: v for k, v in p.items() if v is not None},
           "estimate": screen.max_q, "certified": None, "seed": cfg.seed,
           "max_q": screen.max_q, "max_q_inv": screen.max_q_inv, "verdict": screen.verdict,
           "passed": screen.passed}
    return out, EXIT_OK


def run_contrast(cfg: RunConfig) -> tuple[dict, int]:
    p = cfg.params
    rows = lacunary.classical_contrast(p["n_max"], p["q"])
    return {"command": "contrast", "params": p, "seed": cfg.seed,
            "table": [[f"n={n}", {"l4_fourth_power": v}] for n, v in rows]}, EXIT_OK


def run_probe(cfg: RunConfig) -> tuple[dict, int]:
    p = cfg.params
    labels = lacunary.gap_set(p["count"], q=p["q"])
    ns = labels.single_indices()
    if p["symbol"]:
        raw = _load_json_arg(p["symbol"], "symbol")
        try:
            symbol = {int(k): norms._parse_complex(v) for k, v in raw.items()}
        except (TypeError, ValueError) as exc:
            raise InputError(f"--symbol: {exc}") from exc
    else:
        rng = np.random.default_rng(cfg.seed)
        symbol = {n: float(s) for n, s in zip(ns, rng.choice((-1.0, 1.0), size=len(ns)))}
    try:
        est = lacunary.central_multiplier_probe(labels, symbol, p["p"], p["trials"], cfg.seed)
    except ValueError as exc:
        raise InputError(f"--p: {exc}") from exc
    cmax = max((abs(symbol.get(n, 0)) for n in ns), default=0.0)
    certified = cmax if p["p"] == 2 else (lacunary.kq_constant(p["q"]) * cmax if p["q"] < 1 else None)
    rep = lacunary.LacunaReport("probe", {k: v for k, v in p.items() if v is not None}, est, certified, cfg.seed,
                                extra={"symbol": {str(k): [complex(v).real, complex(v).imag] for k, v in symbol.items()}})
    ok = certified is None or est <= certified * (1 + AUDIT_TOL)
    return rep.to_json(), EXIT_OK if ok else EXIT_CONTRACT


RUNNERS = {
    "norms": run_norms,
    "gapset": run_gapset,
    "extract": run_extract,
    "khintchine": run_khintchine,
    "sidon-fund": run_sidon,
    "screen-q": run_screen,
    "contrast": run_contrast,
    "probe": run_probe,
}


def run(cfg: RunConfig) -> tuple[dict, int]:
    t0 = time.perf_counter()
    report, status = RUNNERS[cfg.command](cfg)
    report["runtime_ms"] = None if cfg.no_timing else (time.perf_counter() - t0) * 1000.0
    return report, status


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = make_config(args)
        report, status = run(cfg)
        text = emit(report, cfg.format, cfg.output)
    except InputError as exc:
        print(f"lacuna: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not cfg.output:
        sys.stdout.write(text)
    if status == EXIT_CONTRACT:
        print("lacuna: certified bound violated", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
