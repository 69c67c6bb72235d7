"""Command-line interface.

Exit codes: 0 success, 1 validation error, 2 computation or check
failure, 3 I/O error. Settings come from (lowest to highest priority)
built-in defaults, a JSON config file (``--config`` or $BOSONGAP_CONFIG)
and explicit flags.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import binomial, capacity, codes, nogo
from .fock import TruncationConfig

EXIT_OK, EXIT_USAGE, EXIT_FAILED, EXIT_IO = 0, 1, 2, 3
CONFIG_ENV = "BOSONGAP_CONFIG"
SIG_DIGITS = 12


class UsageError(ValueError):
    pass


class CheckFailed(RuntimeError):
    """A verified property did not hold; the rows are still written."""


# ---------------------------------------------------------------- parsing

def parse_int_list(text) -> list[int]:
    """'3', '1,2,5' or '1-10' (inclusive)."""
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    if isinstance(text, int):
        return [text]
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1) if not part.startswith("-") else (part, part)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise UsageError(f"empty integer list: {text!r}")
    return out


def parse_grid(text) -> list[float]:
    """'a,b,c', 'lin:a:b:n' or 'log:a:b:n'."""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    text = str(text).strip()
    try:
        if text.startswith(("lin:", "log:")):
            kind, a, b, n = text.split(":")
            a, b, n = float(a), float(b), int(n)
            if n < 1:
                raise UsageError(f"grid needs at least one point: {text!r}")
            if kind == "log":
                if a <= 0 or b <= 0:
                    raise UsageError(f"log grid endpoints must be positive: {text!r}")
                return [float(v) for v in np.geomspace(a, b, n)]
            return [float(v) for v in np.linspace(a, b, n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"cannot parse grid {text!r}: {exc}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


SUBCOMMANDS = {
    "bounds": dict(g="1-10", sigma_grid="log:0.01:3:50", modes=1),
    "threshold": dict(modes="1-5", g=1),
    "binomial": dict(g=9, sigma_grid="log:0.001:0.3:40", d_min=2, d_max=50, phi_points=60, quad_nodes=64),
    "capacity": dict(g="1,10,60", **{"lambda": 0.5}, sigma_grid="log:0.0001:1:64", gamma_grid="lin:0:1:64"),
    "verify": dict(check="lemma4", trials=100, trials_2mode=20, sigma=None, cutoff=None, g=None,
                   gamma_grid="0.05,0.2,0.5", modes=None),
    "construct": dict(g=2, loss=1, gain=0, k_max=None, convention="sqrt"),
    "klcheck": dict(g=2, loss=1, gain=0, k_max=None, convention="sqrt", code=None, binomial=None, tol=1e-10),
}
COMMON = dict(format="csv", out=None, jobs=1, seed=0, paper_literal=False, dry_run=False, json_errors=False)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file (default: $%s)" % CONFIG_ENV)
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--jobs", type=int, help="upper bound on worker processes")
    common.add_argument("--seed", type=int)
    common.add_argument("--paper-literal", action="store_true", default=None,
                        help="also report the typeset threshold/geometric formulas")
    common.add_argument("--dry-run", action="store_true", default=None,
                        help="validate and print the resolved plan without computing")
    common.add_argument("--json-errors", action="store_true", default=None)
    common.add_argument("--g", help="gap, or integer list like 1-10")
    common.add_argument("--sigma", type=float)
    common.add_argument("--sigma-grid")
    common.add_argument("--gamma", type=float)
    common.add_argument("--gamma-grid")
    common.add_argument("--lambda", dest="lambda", type=float)
    common.add_argument("--modes", help="mode count N, or list like 1-5")
    common.add_argument("--cutoff", type=int, help="per-mode Fock cutoff n_max")
    common.add_argument("--d-min", type=int)
    common.add_argument("--d-max", type=int)
    common.add_argument("--phi-points", type=int)
    common.add_argument("--quad-nodes", type=int)

    parser = _Parser(prog="bosongap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("bounds", parents=[common], help="no-go bound grid over (g, sigma)")
    sub.add_parser("threshold", parents=[common], help="g*sigma threshold per mode count")
    sub.add_parser("binomial", parents=[common], help="binomial-code achievability vs no-go")
    sub.add_parser("capacity", parents=[common], help="hashing-rate lower bounds over (sigma, gamma)")
    p = sub.add_parser("verify", parents=[common], help="randomized numerical checks")
    p.add_argument("--check", choices=("lemma4", "reduction", "coherent"))
    p.add_argument("--trials", type=int)
    p.add_argument("--trials-2mode", type=int)
    for name in ("construct", "klcheck"):
        p = sub.add_parser(name, parents=[common],
                           help="kernel code for ladder errors" if name == "construct" else "Knill-Laflamme check")
        p.add_argument("--loss", type=int, help="correct a^l for l <= LOSS")
        p.add_argument("--gain", type=int, help="correct (a^dagger)^m for m <= GAIN")
        p.add_argument("--k-max", type=int)
        p.add_argument("--convention", choices=("sqrt", "literal"))
        if name == "klcheck":
            p.add_argument("--code", help="code JSON file to check")
            p.add_argument("--binomial", type=int, metavar="D", help="check the binomial code with this D")
            p.add_argument("--tol", type=float)
    return parser


def resolve_config(args: argparse.Namespace, environ=None) -> dict:
    environ = os.environ if environ is None else environ
    cfg = dict(COMMON)
    cfg.update(SUBCOMMANDS[args.command])
    path = args.config or environ.get(CONFIG_ENV)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise UsageError(f"config file {path} must hold a JSON object")
        # a config may hold shared keys plus per-subcommand sections
        scoped = file_cfg.get(args.command, {})
        merged = {k: v for k, v in file_cfg.items() if k not in SUBCOMMANDS}
        merged.update(scoped if isinstance(scoped, dict) else {})
        for k, v in merged.items():
            cfg[k.replace("-", "_")] = v
    for k, v in vars(args).items():
        if k in ("command", "config") or v is None:
            continue
        cfg[k] = v
    cfg["command"] = args.command
    return cfg


# ---------------------------------------------------------------- output

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, f".{SIG_DIGITS}g")
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return float(format(v, f".{SIG_DIGITS}g")) if math.isfinite(v) else None
    return v


def render(rows: list[dict], columns, fmt: str) -> str:
    if fmt == "json":
        data = [{c: _json_value(r[c]) for c in columns} for r in rows]
        return json.dumps(data, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _emit(text: str, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- validation helpers

def _positive(name, v, strict=True):
    if v is None or not math.isfinite(v) or (v <= 0 if strict else v < 0):
        raise UsageError(f"--{name.replace('_', '-')} must be {'>' if strict else '>='} 0, got {v}")


def _ints(cfg, key, lo=1):
    vals = parse_int_list(cfg[key])
    if any(v < lo for v in vals):
        raise UsageError(f"--{key.replace('_', '-')} values must be >= {lo}, got {vals}")
    return vals


def _single_int(cfg, key, lo=1):
    vals = _ints(cfg, key, lo)
    if len(vals) != 1:
        raise UsageError(f"--{key} takes a single value here, got {vals}")
    return vals[0]


def _sigma_grid(cfg, strict=True):
    grid = [cfg["sigma"]] if cfg.get("sigma") is not None else parse_grid(cfg["sigma_grid"])
    for s in grid:
        _positive("sigma", s, strict)
    return grid


# ---------------------------------------------------------------- subcommands

def plan_bounds(cfg):
    gs, sig, N = _ints(cfg, "g"), _sigma_grid(cfg), _single_int(cfg, "modes")
    cols = ["g", "sigma", "N", "epsilon_lattice", "epsilon_geometric", "tail_bound"]
    if cfg["paper_literal"]:
        cols.append("epsilon_geometric_literal")
    return dict(g=gs, sigma=sig, N=N, columns=cols, rows=len(gs) * len(sig))


def cmd_bounds(cfg):
    plan = plan_bounds(cfg)
    rows = []
    for g in plan["g"]:
        for s in plan["sigma"]:
            lat = nogo.epsilon_g_sigma(g, s, plan["N"])
            row = dict(g=g, sigma=s, N=plan["N"], epsilon_lattice=lat.value,
                       epsilon_geometric=nogo.epsilon_geometric(g, s, plan["N"]).value,
                       tail_bound=lat.truncation_error)
            if cfg["paper_literal"]:
                row["epsilon_geometric_literal"] = nogo.epsilon_geometric(g, s, plan["N"], True).value
            rows.append(row)
    return rows, plan["columns"]


def plan_threshold(cfg):
    Ns, g = _ints(cfg, "modes"), _single_int(cfg, "g")
    cols = ["N", "g", "g_sigma_thres", "sigma_thres"]
    if cfg["paper_literal"]:
        cols.append("g_sigma_thres_literal")
    return dict(N=Ns, g=g, columns=cols, rows=len(Ns))


def cmd_threshold(cfg):
    plan = plan_threshold(cfg)
    rows = []
    for N in plan["N"]:
        row = dict(N=N, g=plan["g"], g_sigma_thres=nogo.g_sigma_thres(N),
                   sigma_thres=nogo.sigma_thres(plan["g"], N))
        if cfg["paper_literal"]:
            row["g_sigma_thres_literal"] = nogo.g_sigma_thres(N, paper_literal=True)
        rows.append(row)
    return rows, plan["columns"]


def plan_binomial(cfg):
    g = _single_int(cfg, "g")
    params = binomial.AchievabilityParams(int(cfg["d_min"]), int(cfg["d_max"]),
                                          int(cfg["phi_points"]), int(cfg["quad_nodes"]))
    sig = _sigma_grid(cfg)
    return dict(g=g, sigma=sig, params=params, columns=list(binomial.REGION_COLUMNS), rows=len(sig))


def cmd_binomial(cfg):
    plan = plan_binomial(cfg)
    rows = binomial.region_sweep(plan["g"], plan["sigma"], plan["params"], jobs=int(cfg["jobs"]))
    return rows, plan["columns"]


def plan_capacity(cfg):
    gs = _ints(cfg, "g")
    lam = float(cfg["lambda"])
    if not 0 <= lam <= 1:
        raise UsageError(f"--lambda must lie in [0, 1], got {lam}")
    sig = _sigma_grid(cfg, strict=False)
    gam = [cfg["gamma"]] if cfg.get("gamma") is not None else parse_grid(cfg["gamma_grid"])
    if any(not 0 <= c <= 1 for c in gam):
        raise UsageError("--gamma values must lie in [0, 1]")
    return dict(g=gs, lam=lam, sigma=sig, gamma=gam, columns=list(capacity.CAPACITY_COLUMNS),
                rows=len(gs) * len(sig) * len(gam))


def cmd_capacity(cfg):
    plan = plan_capacity(cfg)
    rows = []
    for g in plan["g"]:
        rows += capacity.capacity_sweep(g, plan["lam"], plan["sigma"], plan["gamma"], jobs=int(cfg["jobs"]))
    return rows, plan["columns"]


LEMMA4_COLUMNS = ["trial", "modes", "g", "sigma", "n_max", "norm_pm", "norm_pmi", "bound", "holds"]
REDUCTION_COLUMNS = ["g", "gamma", "xi_matrix", "xi_closed", "xi_error", "g_to_g", "g_lost",
                     "twog_to_twog", "twog_to_g", "twog_lost", "ok"]
COHERENT_COLUMNS = ["p", "I_nats", "closed_form", "hashing_nats", "argmax_r", "gradient_at_half", "ok"]


def plan_verify(cfg):
    check = cfg["check"]
    if check == "lemma4":
        if cfg.get("sigma") is not None:
            _positive("sigma", cfg["sigma"])
        gs = parse_int_list(cfg["g"] or "2-8")
        if min(gs) < 1:
            raise UsageError("--g values must be >= 1")
        if int(cfg["trials_2mode"]) > 0 and max(gs) > 10:
            raise UsageError("two-mode trials need g <= 10 to fit the 400-dimensional cap")
        cutoff = int(cfg["cutoff"] or 120)
        if cutoff < 2 * max(gs):
            raise UsageError(f"--cutoff {cutoff} too small for g up to {max(gs)}")
        trials, trials2 = int(cfg["trials"]), int(cfg["trials_2mode"])
        if trials < 0 or trials2 < 0:
            raise UsageError("trial counts must be >= 0")
        return dict(check=check, g=gs, cutoff=cutoff, trials=trials, trials_2mode=trials2,
                    sigma=cfg.get("sigma"), seed=int(cfg["seed"]), columns=LEMMA4_COLUMNS,
                    rows=trials + trials2)
    if check == "reduction":
        gs = parse_int_list(cfg["g"] or "1,2,3,5")
        if min(gs) < 1:
            raise UsageError("--g values must be >= 1")
        gam = [cfg["gamma"]] if cfg.get("gamma") is not None else parse_grid(cfg["gamma_grid"])
        if any(not 0 <= c <= 1 for c in gam):
            raise UsageError("--gamma values must lie in [0, 1]")
        return dict(check=check, g=gs, gamma=gam, cutoff=cfg.get("cutoff"),
                    columns=REDUCTION_COLUMNS, rows=len(gs) * len(gam))
    ps = [0.05, 0.1, 0.25, 0.45]
    return dict(check=check, p=ps, columns=COHERENT_COLUMNS, rows=len(ps))


def lemma4_suite(seed: int, trials: int, trials_2mode: int, gs, cutoff: int = 120,
                 sigma: float | None = None) -> list[dict]:
    rng = np.random.default_rng(seed)
    rows = []
    specs = [1] * trials + [2] * trials_2mode
    for t, modes in enumerate(specs):
        g = int(rng.choice(gs))
        if modes == 1:
            n_max = int(rng.integers(2 * g, cutoff + 1))
        else:
            n_max = int(rng.integers(2 * g - 1, 20))  # dimension (n_max+1)^2 <= 400
        s = float(rng.uniform(0.1, 2.0)) if sigma is None else float(sigma)
        code = codes.random_gapped_code(rng, g, modes, n_max)
        chk = nogo.verify_lemma4(code, s)
        rows.append(dict(trial=t, modes=modes, g=g, sigma=s, n_max=n_max, norm_pm=chk.norm_pm,
                         norm_pmi=chk.norm_pmi, bound=chk.bound, holds=chk.holds))
    return rows


def cmd_verify(cfg):
    plan = plan_verify(cfg)
    if plan["check"] == "lemma4":
        rows = lemma4_suite(plan["seed"], plan["trials"], plan["trials_2mode"], plan["g"],
                            plan["cutoff"], plan["sigma"])
        ok = all(r["holds"] for r in rows)
    elif plan["check"] == "reduction":
        rows = []
        for g in plan["g"]:
            n_max = max(2 * g, int(plan["cutoff"] or 0))
            for c in plan["gamma"]:
                rep = capacity.verify_reduction(g, c, TruncationConfig(n_max, 1))
                rows.append({k: getattr(rep, k) for k in REDUCTION_COLUMNS})
        ok = all(r["ok"] for r in rows)
    else:
        rows = []
        for p in plan["p"]:
            chk = capacity.verify_argmax_half(p)
            val = capacity.coherent_info_diag(p, 0.5)
            closed = capacity.coherent_info_closed_form(p)
            hashing = capacity.LN2 * capacity.hashing_rate(p)
            good = chk.ok and abs(val - closed) < 1e-10 and abs(val - hashing) < 1e-10
            rows.append(dict(p=p, I_nats=val, closed_form=closed, hashing_nats=hashing,
                             argmax_r=chk.argmax_r, gradient_at_half=chk.gradient_at_half, ok=good))
        ok = all(r["ok"] for r in rows)
    return rows, plan["columns"], ok


def _error_set(cfg) -> codes.ErrorSet:
    L, G = int(cfg["loss"]), int(cfg["gain"])
    if L < 0 or G < 0:
        raise UsageError("--loss and --gain must be >= 0")
    return codes.ladder_error_set(L, G)


def plan_construct(cfg):
    g = _single_int(cfg, "g")
    errs = _error_set(cfg)
    k_max = cfg.get("k_max")
    if k_max is not None and int(k_max) < 1:
        raise UsageError("--k-max must be >= 1")
    return dict(g=g, loss=int(cfg["loss"]), gain=int(cfg["gain"]), errors=errs.labels,
                k_max=k_max, convention=cfg["convention"])


CODE_COLUMNS = ["codeword", "index", "re", "im"]


def _code_rows(code):
    d = codes.code_to_dict(code)
    rows = []
    for label, cw in zip(("0_L", "1_L"), d["codewords"]):
        for idx, re, im in cw:
            rows.append(dict(codeword=label, index=idx if isinstance(idx, int) else ";".join(map(str, idx)),
                             re=re, im=im))
    return rows


def cmd_construct(cfg):
    plan = plan_construct(cfg)
    code = codes.kernel_code(_error_set(cfg), plan["g"], plan["k_max"], plan["convention"])
    return code


KL_COLUMNS = ["source", "g", "errors", "max_offdiagonal_violation", "max_deformation_violation", "tol", "passed"]


def plan_klcheck(cfg):
    plan = plan_construct(cfg)
    tol = float(cfg["tol"])
    _positive("tol", tol)
    plan.update(tol=tol, code=cfg.get("code"), binomial=cfg.get("binomial"), columns=KL_COLUMNS, rows=1)
    if plan["binomial"] is not None and int(plan["binomial"]) < 0:
        raise UsageError("--binomial D must be >= 0")
    return plan


def cmd_klcheck(cfg):
    plan = plan_klcheck(cfg)
    errs = _error_set(cfg)
    if plan["code"]:
        code, source = codes.load_code(plan["code"]), plan["code"]
    elif plan["binomial"] is not None:
        code, source = codes.binomial_codewords(int(plan["binomial"]), plan["g"]), f"binomial(D={plan['binomial']})"
    else:
        code, source = codes.kernel_code(errs, plan["g"], plan["k_max"], plan["convention"]), "kernel"
    rep = codes.kl_check(code, errs, plan["tol"])
    row = dict(source=source, g=code.g, errors=";".join(errs.labels) or "none",
               max_offdiagonal_violation=rep.max_offdiagonal_violation,
               max_deformation_violation=rep.max_deformation_violation, tol=rep.tol, passed=rep.passed)
    return [row], KL_COLUMNS, rep.passed


PLANS = dict(bounds=plan_bounds, threshold=plan_threshold, binomial=plan_binomial, capacity=plan_capacity,
             verify=plan_verify, construct=plan_construct, klcheck=plan_klcheck)


def run(cfg: dict) -> int:
    command = cfg["command"]
    if cfg["format"] not in ("csv", "json"):
        raise UsageError(f"--format must be csv or json, got {cfg['format']!r}")
    if int(cfg["jobs"]) < 1:
        raise UsageError("--jobs must be >= 1")
    plan = PLANS[command](cfg)
    if cfg["dry_run"]:
        shown = {k: (repr(v) if isinstance(v, binomial.AchievabilityParams) else v) for k, v in plan.items()}
        sys.stdout.write(json.dumps({"command": command, "plan": shown, "out": cfg["out"],
                                     "format": cfg["format"]}, indent=2, default=str) + "\n")
        return EXIT_OK
    ok = True
    if command == "construct":
        code = cmd_construct(cfg)
        if cfg["format"] == "json":
            text = json.dumps(codes.code_to_dict(code), indent=2) + "\n"
        else:
            text = render(_code_rows(code), CODE_COLUMNS, "csv")
    else:
        result = globals()[f"cmd_{command}"](cfg)
        if len(result) == 3:
            rows, cols, ok = result
        else:
            rows, cols = result
        text = render(rows, cols, cfg["format"])
    _emit(text, cfg["out"])
    if not ok:
        raise CheckFailed(f"{command}: at least one checked property failed")
    return EXIT_OK


def _report(exc: Exception, code: int, as_json: bool) -> int:
    if as_json:
        payload = {"error": {"code": code, "type": type(exc).__name__, "message": str(exc)}}
        sys.stderr.write(json.dumps(payload) + "\n")
    else:
        sys.stderr.write(f"bosongap: error: {exc}\n")
    return code


def main(argv=None, environ=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    as_json = "--json-errors" in argv
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args, environ)
        as_json = bool(cfg.get("json_errors"))
        return run(cfg)
    except (UsageError, ValueError, TypeError) as exc:
        return _report(exc, EXIT_USAGE, as_json)
    except OSError as exc:
        return _report(exc, EXIT_IO, as_json)
    except (CheckFailed, ArithmeticError) as exc:
        return _report(exc, EXIT_FAILED, as_json)


if __name__ == "__main__":
    sys.exit(main())
