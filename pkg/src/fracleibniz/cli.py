"""Command-line driver: verification campaigns and the Galerkin solver.

Every command writes one CSV report (header row, metadata row, result
rows) and exits 0 only if every checked row passed.  Exit codes: 0 pass,
1 some check failed, 2 usage error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import __version__, galerkin, numfrac, polyfrac, psimatrix, sharpness, specfn
from .errors import PreconditionError, SearchExhaustedError

WORKERS_ENV = "FRACLEIBNIZ_WORKERS"
PASS, FAIL, INFO, ERROR = "pass", "fail", "info", "error"
COMMANDS = (
    "psd-sweep",
    "poly-gap",
    "series-leibniz",
    "sampled-ineq",
    "sharpness",
    "solve",
    "energy",
    "convergence",
    "special-fn",
)


@dataclass
class RunConfig:
    command: str
    alpha_grid: tuple[float, ...]
    seed: int = 0
    output: str = "-"
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Row:
    key: tuple
    params: tuple[tuple[str, object], ...]
    value: float | str
    threshold: float | str
    status: str


def parse_grid(text: str) -> tuple[float, ...]:
    """``start:end:step`` (inclusive, endpoint tolerance 1e-12) or a comma list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid {text!r} must be start:end:step")
        start, end, step = (float(p) for p in parts)
        if not step > 0 or end < start:
            raise ValueError(f"grid {text!r} needs step > 0 and end >= start")
        count = int(math.floor((end - start) / step + 1e-12 / step)) + 1
        values = [round(start + i * step, 12) for i in range(count)]
        if abs(values[-1] - end) > 1e-12 and values[-1] + step <= end + 1e-12:
            values.append(end)
        return tuple(values)
    values = tuple(float(v) for v in text.split(",") if v.strip())
    if not values:
        raise ValueError("grid must be nonempty")
    return values


def _alpha_grid(text: str) -> tuple[float, ...]:
    try:
        grid = parse_grid(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if any(not 0.0 < a < 1.0 for a in grid):
        raise argparse.ArgumentTypeError("alpha values must lie in (0, 1)")
    return grid


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return parse_grid(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (tuple, list)):
        return "(" + " ".join(_fmt(x) for x in v) + ")"
    return str(v)


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _map(fn: Callable, tasks: list) -> list:
    """Run tasks in a process pool; results come back in task order."""
    workers = min(worker_count(), len(tasks))
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _chunk_rngs(seed: int, count: int, chunk: int) -> list[tuple[int, int, np.random.SeedSequence]]:
    # one child seed per fixed-size chunk, independent of worker count
    n_chunks = (count + chunk - 1) // chunk
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    return [(c * chunk, min(count, (c + 1) * chunk), children[c]) for c in range(n_chunks)]


# --- psd-sweep ---------------------------------------------------------------------


def _psd_cell(task) -> list[Row]:
    n_max, alpha = task
    rows = []
    for cell in psimatrix.psd_sweep_alpha(n_max, alpha):
        rows.append(
            Row(
                (alpha, cell.n),
                (("n", cell.n), ("alpha", alpha), ("a_pd", cell.a_pd), ("b_pd", cell.b_pd)),
                min(cell.a_min_pivot, cell.b_min_pivot),
                0.0,
                _status(cell.passed),
            )
        )
    return rows


def cmd_psd_sweep(cfg: RunConfig) -> list[Row]:
    n_max = cfg.params["n_max"]
    rows = [r for chunk in _map(_psd_cell, [(n_max, a) for a in cfg.alpha_grid]) for r in chunk]
    if cfg.params.get("lemmas", True):
        m = min(n_max, 12)
        for a in cfg.alpha_grid:
            margin, _ = psimatrix.phi_product_margin(max(m, 2), a)
            rows.append(Row((a, 1000), (("check", "phi_product"), ("alpha", a), ("n_max", m)), margin, 1e-14, _status(margin > 1e-14)))
            worst = math.inf
            for n in range(2, m + 1):
                lhs, rhs = psimatrix.border_inequality_sides(n, a)
                worst = min(worst, (lhs - rhs) / abs(rhs))
            rows.append(Row((a, 1001), (("check", "border"), ("alpha", a), ("n_max", m)), worst, -1e-12, _status(worst >= -1e-12)))
    return rows


# --- poly-gap -------------------------------------------------------------------------


def _poly_gap_chunk(task) -> list[Row]:
    lo, hi, ss, deg_max, alphas, ts = task
    rng = np.random.Generator(np.random.PCG64(ss))
    ts = np.asarray(ts)
    rows = []
    for idx in range(lo, hi):
        deg = int(rng.integers(0, deg_max + 1))
        P = polyfrac.random_polynomial(rng, deg)
        worst_gap = math.inf
        worst_qf = 0.0
        for a in alphas:
            for kind, gf in (("rl", polyfrac.gap_rl), ("caputo", polyfrac.gap_caputo)):
                g = np.asarray(gf(P, a, ts))
                s = np.asarray(polyfrac.gap_scale(P, a, ts, kind))
                q = np.asarray(psimatrix.quadratic_form_gap(P, a, ts, kind))
                worst_gap = min(worst_gap, float(np.min(g / s)))
                den = np.maximum(np.maximum(np.abs(g), np.abs(q)), 1e-300)
                worst_qf = max(worst_qf, float(np.max(np.abs(g - q) / den)))
        rows.append(Row((idx, 0), (("poly", idx), ("degree", deg), ("check", "gap")), worst_gap, -1e-10, _status(worst_gap >= -1e-10)))
        rows.append(Row((idx, 1), (("poly", idx), ("degree", deg), ("check", "quadratic_form")), worst_qf, 1e-9, _status(worst_qf <= 1e-9)))
    return rows


def cmd_poly_gap(cfg: RunConfig) -> list[Row]:
    p = cfg.params
    ts = parse_grid(p["t_grid"])
    tasks = [(lo, hi, ss, p["deg_max"], cfg.alpha_grid, ts) for lo, hi, ss in _chunk_rngs(cfg.seed, p["count"], 50)]
    rows = [r for chunk in _map(_poly_gap_chunk, tasks) for r in chunk]
    gaps = [r.value for r in rows if dict(r.params)["check"] == "gap"]
    rows.append(Row((math.inf, 0), (("summary", "min_gap"), ("count", p["count"])), min(gaps), -1e-10, _status(min(gaps) >= -1e-10)))
    return rows


# --- series-leibniz ---------------------------------------------------------------------


def _leibniz_chunk(task) -> list[Row]:
    lo, hi, ss, deg_max, alphas = task
    rng = np.random.Generator(np.random.PCG64(ss))
    rows = []
    for idx in range(lo, hi):
        f = polyfrac.random_polynomial(rng, int(rng.integers(0, deg_max + 1)))
        g = polyfrac.random_polynomial(rng, int(rng.integers(0, deg_max + 1)))
        a = float(alphas[int(rng.integers(0, len(alphas)))])
        series = polyfrac.leibniz_series_rl(f, g, a)
        direct = polyfrac.rl_deriv(polyfrac.multiply(f, g), a)
        d = polyfrac.expansion_discrepancy(series, direct)
        rows.append(Row((idx,), (("pair", idx), ("deg_f", f.degree), ("deg_g", g.degree), ("alpha", a)), d, 1e-10, _status(d <= 1e-10)))
    return rows


def cmd_series_leibniz(cfg: RunConfig) -> list[Row]:
    p = cfg.params
    tasks = [(lo, hi, ss, p["deg_max"], cfg.alpha_grid) for lo, hi, ss in _chunk_rngs(cfg.seed, p["count"], 50)]
    return [r for chunk in _map(_leibniz_chunk, tasks) for r in chunk]


# --- sampled-ineq ------------------------------------------------------------------------

TEST_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": lambda t: np.exp(-t),
    "bump": lambda t: np.exp(-((t - 1.0) ** 2)),
    "poly8": lambda t: polyfrac.from_monomial([1.0, -2.0, 0.5, 1.5, -1.0, 0.3, 0.2, -0.1, 0.01], 0.0)(t),
}


def _sampled_cell(task) -> list[Row]:
    name, alpha, kind, N, t1 = task
    func = TEST_FUNCTIONS[name]

    def report(M: int) -> numfrac.GapReport:
        f = numfrac.SampledFunction.from_callable(func, 0.0, t1, M)
        return numfrac.check_inequality_sampled(f, alpha, kind)

    rep = report(N)
    eps = numfrac.calibrate_allowance(lambda M: max(0.0, -report(M).min_gap), N, alpha, floor=1e-12 * rep.scale)
    return [
        Row(
            (name, alpha, kind),
            (("function", name), ("alpha", alpha), ("kind", kind), ("N", N), ("t_min", rep.t)),
            rep.min_gap,
            -eps,
            _status(rep.min_gap >= -eps),
        )
    ]


def cmd_sampled_ineq(cfg: RunConfig) -> list[Row]:
    p = cfg.params
    kinds = ("caputo", "rl") if p["kind"] == "both" else (p["kind"],)
    tasks = [(name, a, k, p["N"], p["t1"]) for name in p["functions"] for a in cfg.alpha_grid for k in kinds]
    return [r for chunk in _map(_sampled_cell, tasks) for r in chunk]


# --- sharpness ----------------------------------------------------------------------------


def _sharpness_cell(task) -> list[Row]:
    lam, alpha, kind, k_cap = task
    if kind == "caputo":
        ce = sharpness.caputo_counterexample(lam, alpha)
    else:
        try:
            ce = sharpness.rl_counterexample(lam, alpha, k_cap)
        except SearchExhaustedError as exc:
            params = (("lambda", lam), ("alpha", alpha), ("kind", kind), ("reason", str(exc)))
            return [Row((kind, lam, alpha), params, "", 1e-12, FAIL)]
    rel = float(ce.gap()) / ce.scale()
    interval = ce.valid_interval if ce.valid_interval is not None else ""
    params = (
        ("lambda", lam),
        ("alpha", alpha),
        ("kind", kind),
        ("case", ce.case),
        ("k", ce.k),
        ("interval", interval),
        ("witness_t", ce.witness_t),
        ("gap", float(ce.gap())),
    )
    return [Row((kind, lam, alpha), params, rel, 1e-12, _status(ce.verify()))]


def cmd_sharpness(cfg: RunConfig) -> list[Row]:
    p = cfg.params
    kinds = ("caputo", "rl") if p["kind"] == "both" else (p["kind"],)
    tasks = [(lam, a, k, p["k_cap"]) for lam in p["lambdas"] for a in cfg.alpha_grid for k in kinds]
    return [r for chunk in _map(_sharpness_cell, tasks) for r in chunk]


# --- solve / energy / convergence ------------------------------------------------------------


def _data_1d(name: str):
    table = {
        "none": None,
        "sin": np.sin,
        "one": lambda x: np.ones_like(x),
        "x(pi-x)": lambda x: x * (math.pi - x),
    }
    if name not in table:
        raise ValueError(f"unknown 1d data {name!r}; choose from {sorted(table)}")
    return table[name]


def _data_2d(name: str):
    table = {
        "none": None,
        "shear": lambda x, y: (np.sin(y), np.zeros_like(x)),
        "vortex": lambda x, y: (np.cos(x) * np.sin(y), -np.sin(x) * np.cos(y)),
        "gradient": lambda x, y: (np.cos(x) * np.sin(y), np.sin(x) * np.cos(y)),
    }
    if name not in table:
        raise ValueError(f"unknown 2d data {name!r}; choose from {sorted(table)}")
    return table[name]


def _problem_from(cfg: RunConfig, alpha: float) -> galerkin.SpectralProblem:
    p = cfg.params
    data = _data_1d if p["basis"] == "dirichlet_laplace_1d" else _data_2d
    return galerkin.build_problem(p["basis"], p["n"], p["rho"], alpha, p["T"], data(p["forcing"]), data(p["initial"]))


def cmd_solve(cfg: RunConfig) -> list[Row]:
    p = cfg.params
    rows = []
    for a in cfg.alpha_grid:
        prob = _problem_from(cfg, a)
        traj = galerkin.solve_galerkin(prob, p["N"])
        h2 = traj.h_norm2()
        v2 = traj.v_norm2(prob.lambdas)
        stride = max(1, p["N"] // p["report_points"])
        for k in range(0, p["N"] + 1, stride):
            rows.append(Row((a, 0, k), (("alpha", a), ("t", float(traj.grid[k])), ("quantity", "h_norm2")), float(h2[k]), "", INFO))
            rows.append(Row((a, 1, k), (("alpha", a), ("t", float(traj.grid[k])), ("quantity", "v_norm2")), float(v2[k]), "", INFO))
        l1 = galerkin.solve_mode_l1(prob.mu, prob.u0, prob.f, a, traj.grid)
        diff = float(np.max(np.abs(l1[:, -1] - traj.coeffs[:, -1])))
        rows.append(Row((a, 2, 0), (("alpha", a), ("t", prob.T), ("quantity", "closed_vs_l1")), diff, p["tol"], _status(diff <= p["tol"])))
    return rows


def _energy_problem(task) -> list[Row]:
    idx, ss, n_max, lam_max, alphas, N = task
    rng = np.random.Generator(np.random.PCG64(ss))
    i_max = max(1, int(math.isqrt(int(lam_max))))
    n = int(rng.integers(1, min(n_max, i_max) + 1))
    alpha = float(alphas[int(rng.integers(0, len(alphas)))])
    rho = float(rng.uniform(0.1, 2.0))
    lam = np.arange(1, n + 1, dtype=float) ** 2
    u0 = rng.uniform(-1.0, 1.0, n)
    f = rng.uniform(-1.0, 1.0, n)
    prob = galerkin.SpectralProblem(alpha, rho, 1.0, lam, f, u0)
    rep = galerkin.check_energy(galerkin.solve_galerkin(prob, N), prob)
    base = (("problem", idx), ("n", n), ("alpha", alpha), ("rho", rho))
    rows = [
        Row((idx, 0), base + (("check", "energy"),), rep.energy_slack, -rep.allowance, _status(rep.energy_slack >= -rep.allowance)),
        Row((idx, 1), base + (("check", "young"),), rep.young_slack, -rep.allowance, _status(rep.young_slack >= -rep.allowance)),
    ]
    free = galerkin.SpectralProblem(alpha, rho, 1.0, lam, np.zeros(n), u0)
    traj = galerkin.solve_galerkin(free, N)
    dE = galerkin.energy_derivative(traj, free)
    h = traj.h_norm2()
    scale = 1.0 + float(np.max(h)) * N**alpha
    eps = numfrac.calibrate_allowance(
        lambda M: max(0.0, float(np.max(galerkin.energy_derivative(galerkin.solve_galerkin(free, M), free)))),
        N, alpha, floor=1e-12 * scale,
    )
    worst = float(np.max(dE[1:]))
    rows.append(Row((idx, 2), base + (("check", "unforced_decay"),), worst, eps, _status(worst <= eps)))
    gron = float(np.max(h) - h[0])
    rows.append(Row((idx, 3), base + (("check", "unforced_bound"),), gron, 1e-12 * (1 + h[0]), _status(gron <= 1e-12 * (1 + h[0]))))
    return rows


def cmd_energy(cfg: RunConfig) -> list[Row]:
    p = cfg.params
    seeds = np.random.SeedSequence(cfg.seed).spawn(p["count"])
    tasks = [(i, seeds[i], p["n_max"], p["lambda_max"], cfg.alpha_grid, p["N"]) for i in range(p["count"])]
    return [r for chunk in _map(_energy_problem, tasks) for r in chunk]


def cmd_convergence(cfg: RunConfig) -> list[Row]:
    p = cfg.params
    ns = p["ns"]
    rows = []
    for a in cfg.alpha_grid:
        n_top = ns[-1]
        i = np.arange(1, n_top + 1, dtype=float)
        f = i ** (-p["decay"])
        prob = galerkin.SpectralProblem(a, p["rho"], p["T"], i**2, f, np.zeros(n_top))
        rep = galerkin.check_convergence(prob, ns, p["N"])
        for n, d in zip(rep.ns, rep.distances):
            rows.append(Row((a, n), (("alpha", a), ("n", n), ("decay", p["decay"])), d, "", INFO))
        rows.append(
            Row((a, math.inf), (("alpha", a), ("check", "nonincreasing")), float(rep.nonincreasing), 1.0, _status(rep.nonincreasing))
        )
    return rows


# --- special-fn -----------------------------------------------------------------------------


def cmd_special_fn(cfg: RunConfig) -> list[Row]:
    p = cfg.params
    rows = []
    xs = np.linspace(0.5, 100.0, 400)
    worst = max(abs(specfn.gamma(x + 1) / (x * specfn.gamma(x)) - 1.0) for x in xs if x < 170)
    rows.append(Row(("a",), (("check", "gamma_recurrence"),), worst, 1e-12, _status(worst <= 1e-12)))
    worst = max(abs(specfn.digamma(x + 1) - specfn.digamma(x) - 1.0 / x) for x in xs)
    rows.append(Row(("b",), (("check", "digamma_recurrence"),), worst, 1e-12, _status(worst <= 1e-12)))
    x = np.linspace(0.0, 20.0, 201)
    ref = np.array([math.exp(v * v) * math.erfc(v) for v in x])
    ml = specfn.mittag_leffler(0.5, 1.0, -x)
    worst = float(np.max(np.abs(ml - ref) / ref))
    rows.append(Row(("c",), (("check", "mittag_leffler_erfc"),), worst, 1e-10, _status(worst <= 1e-10)))
    s_grid = np.linspace(0.0, 1.0, 11)
    bad = sum(not specfn.gautschi_check(n, s) for n in range(1, p["gautschi_n"] + 1) for s in s_grid)
    rows.append(Row(("d",), (("check", "gautschi"), ("n_max", p["gautschi_n"])), float(bad), 0.0, _status(bad == 0)))
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed)))
    valid_bad = 0
    for _ in range(p["alzer_count"]):
        xval, a, b = alzer_valid_instance(rng)
        valid_bad += not specfn.alzer_check(xval, a, b)
    rows.append(Row(("e",), (("check", "alzer_valid"), ("count", p["alzer_count"])), float(valid_bad), 0.0, _status(valid_bad == 0)))
    missed = 0
    for j in range(p["alzer_invalid"]):
        xval, a, b = alzer_invalid_instance(rng, j)
        try:
            specfn.alzer_check(xval, a, b)
            missed += 1
        except PreconditionError:
            pass
    rows.append(Row(("f",), (("check", "alzer_rejects"), ("count", p["alzer_invalid"])), float(missed), 0.0, _status(missed == 0)))
    return rows


def alzer_valid_instance(rng: np.random.Generator):
    """Random (x, a, b) with sorted nonnegative a, b, equal totals and a majorised by b.

    a = (1 - theta) b + theta c, where c puts the whole mass of b on its last
    entry; partial sums of a never exceed those of b.
    """
    n = int(rng.integers(1, 7))
    b = np.sort(rng.uniform(0.0, 3.0, n))
    c = np.zeros(n)
    c[-1] = b.sum()
    theta = float(rng.uniform(0.0, 1.0))
    a = np.sort((1.0 - theta) * b + theta * c)
    x = float(rng.uniform(0.05, 20.0))
    return x, a.tolist(), b.tolist()


def alzer_invalid_instance(rng: np.random.Generator, j: int):
    """A violating instance; j cycles through the five failure categories."""
    x, a, b = alzer_valid_instance(rng)
    while len(a) < 2 or b[-1] - b[0] < 1e-3:
        x, a, b = alzer_valid_instance(rng)
    kind = j % 5
    if kind == 0:  # unsorted
        a = [a[-1] + 1.0] + a[1:]
    elif kind == 1:  # negative entry
        a = [-1.0] + a[1:]
    elif kind == 2:  # roles swapped: partial sums violated
        a, b = b, a
        if np.allclose(a, b):
            b = [0.0] * (len(b) - 1) + [sum(b)]
    elif kind == 3:  # unequal totals
        b = b[:-1] + [b[-1] + 1.0]
    else:  # length mismatch
        a = a + [a[-1]]
    return x, a, b


# --- driver ----------------------------------------------------------------------------------

HANDLERS = {
    "psd-sweep": cmd_psd_sweep,
    "poly-gap": cmd_poly_gap,
    "series-leibniz": cmd_series_leibniz,
    "sampled-ineq": cmd_sampled_ineq,
    "sharpness": cmd_sharpness,
    "solve": cmd_solve,
    "energy": cmd_energy,
    "convergence": cmd_convergence,
    "special-fn": cmd_special_fn,
}


def render_csv(cfg: RunConfig, rows: Iterable[Row]) -> str:
    rows = sorted(rows, key=lambda r: tuple(_sort_key(k) for k in r.key))
    width = max([len(r.params) for r in rows] + [3])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["command"] + [f"param_{i}" for i in range(1, width + 1)] + ["value", "threshold", "status"])
    meta = [f"version={__version__}", f"seed={cfg.seed}", "config=" + json.dumps(_config_echo(cfg), sort_keys=True)]
    w.writerow(["#meta"] + meta + [""] * (width - len(meta)) + ["", "", ""])
    for r in rows:
        params = [f"{k}={_fmt(v)}" for k, v in r.params] + [""] * (width - len(r.params))
        w.writerow([cfg.command] + params + [_fmt(r.value), _fmt(r.threshold), r.status])
    return buf.getvalue()


def _sort_key(k):
    # mixed-type keys: numbers before strings, both ordered naturally
    if isinstance(k, (int, float, np.integer, np.floating)):
        return (0, float(k), "")
    return (1, 0.0, str(k))


def _config_echo(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d["alpha_grid"] = list(cfg.alpha_grid)
    d.pop("output", None)
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}


def _write(cfg: RunConfig, text: str) -> None:
    if cfg.output == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the process exit code."""
    try:
        rows = HANDLERS[cfg.command](cfg)
    except Exception as exc:  # noqa: BLE001 - reported as a diagnostic row
        detail = f"{type(exc).__name__}: {exc}"
        tb = traceback.format_exc(limit=3).strip().splitlines()[-1]
        rows = [Row(("error",), (("error", detail), ("where", tb)), "", "", ERROR)]
        _write(cfg, render_csv(cfg, rows))
        return 3
    _write(cfg, render_csv(cfg, rows))
    return 1 if any(r.status == FAIL for r in rows) else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracleibniz", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-o", "--output", default="-", help="CSV path, '-' for stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, alpha_default, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.add_argument("--alpha-grid", "--alpha", dest="alpha_grid", type=_alpha_grid, default=_alpha_grid(alpha_default))
        return sp

    sp = add("psd-sweep", "0.05:0.95:0.05", "exact positive-definiteness of A_n and B_n")
    sp.add_argument("--n-max", type=_positive_int, default=40)
    sp.add_argument("--no-lemmas", dest="lemmas", action="store_false")

    sp = add("poly-gap", "0.1:0.9:0.1", "fuzz the polynomial Leibniz inequality")
    sp.add_argument("--count", type=_positive_int, default=1000)
    sp.add_argument("--deg-max", type=int, default=12)
    sp.add_argument("--t-grid", default="0.05:5:0.05")

    sp = add("series-leibniz", "0.1:0.9:0.1", "fractional Leibniz series vs direct derivative")
    sp.add_argument("--count", type=_positive_int, default=200)
    sp.add_argument("--deg-max", type=int, default=6)

    sp = add("sampled-ineq", "0.25,0.5,0.75", "discrete inequality on sampled functions")
    sp.add_argument("--functions", type=lambda s: tuple(s.split(",")), default=("sin", "exp", "bump", "poly8"))
    sp.add_argument("--kind", choices=("caputo", "rl", "both"), default="both")
    sp.add_argument("--N", type=_positive_int, default=2048)
    sp.add_argument("--t1", type=float, default=3.0)

    sp = add("sharpness", "0.5", "counterexamples for lambda != 2")
    sp.add_argument("--lambda", dest="lambdas", type=_float_list, default=(1.0, 1.5, 2.5))
    sp.add_argument("--kind", choices=("caputo", "rl", "both"), default="both")
    sp.add_argument("--k-cap", type=_positive_int, default=2000)

    sp = add("solve", "0.5", "Galerkin solution norms and closed-form vs L1 check")
    sp.add_argument("--basis", choices=galerkin.BASES, default="dirichlet_laplace_1d")
    sp.add_argument("--n", type=_positive_int, default=16)
    sp.add_argument("--rho", type=float, default=1.0)
    sp.add_argument("--T", type=float, default=1.0)
    sp.add_argument("--N", type=_positive_int, default=1024)
    sp.add_argument("--forcing", default="sin")
    sp.add_argument("--initial", default="none")
    sp.add_argument("--report-points", type=_positive_int, default=16)
    sp.add_argument("--tol", type=float, default=1e-3)

    sp = add("energy", "0.1:0.9:0.1", "discrete energy inequality on random problems")
    sp.add_argument("--count", type=_positive_int, default=50)
    sp.add_argument("--n-max", type=_positive_int, default=32)
    sp.add_argument("--lambda-max", type=float, default=1000.0)
    sp.add_argument("--N", type=_positive_int, default=1024)

    sp = add("convergence", "0.5", "Galerkin truncation distances")
    sp.add_argument("--ns", type=_int_list, default=(4, 8, 16, 32, 64))
    sp.add_argument("--decay", type=float, default=1.0)
    sp.add_argument("--rho", type=float, default=1.0)
    sp.add_argument("--T", type=float, default=1.0)
    sp.add_argument("--N", type=_positive_int, default=256)

    sp = add("special-fn", "0.5", "special-function identities and inequalities")
    sp.add_argument("--gautschi-n", type=_positive_int, default=10000)
    sp.add_argument("--alzer-count", type=_positive_int, default=500)
    sp.add_argument("--alzer-invalid", type=_positive_int, default=100)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(ns).items() if k not in ("command", "alpha_grid", "seed", "output")}
    return RunConfig(ns.command, tuple(ns.alpha_grid), ns.seed, ns.output, params)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    cfg = config_from_args(ns)
    if cfg.command == "solve" and cfg.params["N"] < 2:
        parser.error("--N must be at least 2")
    if cfg.command == "convergence" and (len(cfg.params["ns"]) < 2 or list(cfg.params["ns"]) != sorted(set(cfg.params["ns"]))):
        parser.error("--ns needs at least two strictly increasing levels")
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
