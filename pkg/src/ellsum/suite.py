"""Seeded verification sweeps over (n, N, draw) grids and their reports."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .errors import ConfigError, EllsumError, GenericityFailure
from .invariants import WnElement, apply_wn, e_explicit, e_table, reference_point
from .jackson import (
    a5_shift_identity,
    a6_shift_identity,
    anchor_params,
    en_e0_check,
    expansion_coefficients,
    f_minus,
    f_plus,
    h_r,
    h_r_expectation,
    j_recursion_check,
    lattice_weights,
    nabla_expectation,
    phi_i,
    two_term_check,
    two_term_coefficients,
)
from .kernel import DEFAULT_PRECISION, Nome, Precision, elliptic_gamma, theta, theta_factorial, theta_pm
from .sampling import NOME_MODULUS, cell_rng, draw_parameter_set, random_complex, random_point
from .summation import Balancing, lhs_sum, rhs_product

SCHEMA = 1
MODES = ("kernel", "summation", "invariants", "two-term", "recursion")
FORMATS = ("json", "csv")

DEFAULT_TOLERANCES = {
    "kernel.ladder": 1e-11,
    "kernel.quasi_period": 1e-11,
    "kernel.riemann": 1e-11,
    "summation.identity": 1e-9,
    "summation.base_case": 1e-12,
    "invariants.interpolation": 1e-11,
    "invariants.dual": 1e-11,
    "invariants.wn_invariance": 1e-11,
    "invariants.quasi_period": 1e-11,
    "jackson.vanishing": 1e-11,
    "jackson.coefficients": 1e-12,
    "jackson.h_r_pointwise": 1e-10,
    "jackson.h_r_mean": 1e-10,
    "jackson.nabla": 1e-10,
    "jackson.en_e0": 1e-9,
    "two_term.relation": 1e-9,
    "recursion.step": 1e-9,
    "recursion.telescope": 1e-9,
    "recursion.endpoint": 1e-12,
    "recursion.a5_shift": 1e-9,
    "recursion.a6_shift": 1e-9,
}

# points per draw for the pointwise checks
POINTS_PER_DRAW = 3


@dataclass(frozen=True)
class SuiteConfig:
    mode: str = "all"
    n_range: tuple = (1, 2, 3)
    N_range: tuple = (0, 1, 2, 3, 4)
    draws: int = 20
    seed: int = 42
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    precision: Precision = DEFAULT_PRECISION
    output_path: str | None = None
    format: str = "json"
    p_zero: bool = False
    timing: bool = False

    def __post_init__(self):
        if self.mode not in MODES + ("all",):
            raise ConfigError("mode", f"unknown mode {self.mode!r}; choose from {', '.join(MODES + ('all',))}")
        if self.format not in FORMATS:
            raise ConfigError("format", f"unknown format {self.format!r}")
        if not self.n_range or any(not isinstance(n, int) or n < 1 for n in self.n_range):
            raise ConfigError("n", f"n values must be integers >= 1, got {self.n_range}")
        if not self.N_range or any(not isinstance(N, int) or N < 0 for N in self.N_range):
            raise ConfigError("N", f"N values must be integers >= 0, got {self.N_range}")
        if not isinstance(self.draws, int) or self.draws < 1:
            raise ConfigError("draws", f"draws must be >= 1, got {self.draws}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed", f"seed must be a 64-bit nonnegative integer, got {self.seed}")
        for key, tol in self.tolerances.items():
            if key not in DEFAULT_TOLERANCES:
                raise ConfigError(key, f"unknown check name {key!r}")
            if not (isinstance(tol, (int, float)) and tol > 0 and math.isfinite(tol)):
                raise ConfigError(key, f"tolerance must be a positive number, got {tol!r}")

    @property
    def modes(self) -> tuple:
        return MODES if self.mode == "all" else (self.mode,)

    def tolerance(self, check: str) -> float:
        return self.tolerances.get(check, DEFAULT_TOLERANCES[check])


# -- individual checks ---------------------------------------------------------

def _rel(x, y):
    scale = max(abs(x), abs(y))
    return 0.0 if scale == 0 else abs(x - y) / scale


def _kernel_checks(rng, prec):
    p = random_complex(rng, *NOME_MODULUS)
    q = random_complex(rng, *NOME_MODULUS)
    nome = Nome(p, q)
    z = random_complex(rng, 0.6, 1.6)
    g = elliptic_gamma(z, nome, prec)
    ladder = max(_rel(elliptic_gamma(q**k * z, nome, prec) / g, theta_factorial(z, k, nome, prec))
                 for k in range(1, 5))
    quasi = max(_rel(theta(p * z, p, prec), -theta(z, p, prec) / z),
                _rel(theta(1 / z, p, prec), -theta(z, p, prec) / z))
    x, y, u, v = (random_complex(rng, 0.6, 1.6) for _ in range(4))
    lhs = theta_pm(x, u, p, prec) * theta_pm(y, v, p, prec) - theta_pm(x, v, p, prec) * theta_pm(y, u, p, prec)
    rhs = y / u * theta_pm(x, y, p, prec) * theta_pm(u, v, p, prec)
    params = {"p": p, "q": q}
    return params, [("kernel.ladder", {}, ladder), ("kernel.quasi_period", {}, quasi),
                    ("kernel.riemann", {}, _rel(lhs, rhs))]


def _summation_checks(ps, prec):
    lhs, rhs = lhs_sum(ps, prec), rhs_product(ps, prec)
    check = "summation.base_case" if ps.N == 0 else "summation.identity"
    return [(check, {}, abs(lhs - rhs) / abs(rhs))]


def _invariant_checks(ps, rng, prec):
    n, p = ps.n, ps.p
    ip, _ = anchor_params(ps, (0, 1), prec)
    out = []
    interp = 0.0
    refs = [reference_point(ip, s) for s in range(n + 1)]
    for s, zeta in enumerate(refs):
        tab = e_table(ip, zeta, prec)
        for r in range(n + 1):
            delta = 1.0 if r == s else 0.0
            interp = max(interp, abs(tab[r] - delta), abs(e_explicit(ip, r, zeta, prec) - delta))
    out.append(("invariants.interpolation", {}, interp))

    dual = wn = quasi = 0.0
    for _ in range(POINTS_PER_DRAW):
        z = random_point(rng, n)
        tab = e_table(ip, z, prec)
        r = int(rng.integers(0, n + 1))
        dual = max(dual, abs(e_explicit(ip, r, z, prec) - tab[r]) / abs(tab[r]))
        w = WnElement.random(n, rng)
        moved = e_table(ip, apply_wn(w, z), prec)
        wn = max(wn, max(_rel(a, b) for a, b in zip(moved, tab)))
        i = int(rng.integers(0, n))
        zp = tuple(x * p if k == i else x for k, x in enumerate(z))
        shifted = e_table(ip, zp, prec)
        quasi = max(quasi, max(_rel(a, b / (p * z[i] ** 2)) for a, b in zip(shifted, tab)))
    out += [("invariants.dual", {}, dual), ("invariants.wn_invariance", {}, wn),
            ("invariants.quasi_period", {}, quasi)]

    values = []
    for s, zeta in enumerate(refs):
        for i in range(n):
            fm, fp = f_minus(ps, zeta, i, prec), f_plus(ps, zeta, i, prec)
            values.append((fm, True))
            values.append((fp, i not in (s - 1, n - 1)))
    largest = max(abs(v) for v, _ in values)
    out.append(("jackson.vanishing", {}, max(abs(v) for v, zero in values if zero) / largest))

    coeff = pointwise = mean = nab = 0.0
    weights = lattice_weights(ps, prec)
    for r in range(1, n + 1):
        c = two_term_coefficients(ps, r, (0, 1), prec)
        frr, frr1 = expansion_coefficients(ps, r, (0, 1), prec)
        # c_rr and c_rr1 enter h_r together; at N = 0 c_nn vanishes identically
        size = max(abs(c.c_rr), abs(c.c_rr1))
        coeff = max(coeff, abs(c.c_rr - frr) / size, abs(c.c_rr1 - frr1) / size)
        if c.c_r is not None:
            coeff = max(coeff, _rel(c.c_r * c.c_rr, c.c_rr1))
        for _ in range(POINTS_PER_DRAW):
            z = random_point(rng, n)
            tab = e_table(ip, z, prec)
            pointwise = max(pointwise, _rel(h_r(ps, ip, r, z, prec), c.c_rr * tab[r] + c.c_rr1 * tab[r - 1]))
        mean = max(mean, h_r_expectation(ps, ip, r, prec, weights).residual)
        for i in range(n):
            nab = max(nab, nabla_expectation(ps, phi_i(ps, ip, r, i, prec), i, prec, weights).residual)
    out += [("jackson.coefficients", {}, coeff), ("jackson.h_r_pointwise", {}, pointwise),
            ("jackson.h_r_mean", {}, mean), ("jackson.nabla", {}, nab),
            ("jackson.en_e0", {}, en_e0_check(ps, (0, 1), prec, weights).residual)]
    return out


def _two_term_checks(ps, prec):
    weights = lattice_weights(ps, prec)
    return [("two_term.relation", {"r": r}, two_term_check(ps, r, (0, 1), prec, weights).residual)
            for r in range(1, ps.n + 1)]


def _recursion_checks(ps, prec):
    rep = j_recursion_check(ps, prec)
    six = a6_shift_identity(ps, prec)
    five = a5_shift_identity(ps, prec)
    return [("recursion.step", {}, rep.step.residual),
            ("recursion.telescope", {}, max(rep.telescope.residual, rep.closed.residual)),
            ("recursion.endpoint", {}, rep.endpoint),
            ("recursion.a5_shift", {}, max(r.residual for r in five)),
            ("recursion.a6_shift", {}, max(r.residual for r in six))]


_BALANCING = {"summation": Balancing.SUM_Q, "invariants": Balancing.INV_ONE,
              "two-term": Balancing.INV_ONE, "recursion": Balancing.SUM_Q}


def _ps_params(ps):
    return {"a": list(ps.a), "t": ps.t, "p": ps.p, "q": ps.q}


def applicable(mode: str, N: int) -> bool:
    """Whether ``mode`` has anything to check at truncation level ``N``."""
    return not (mode == "recursion" and N < 1)


def run_cell(cfg: SuiteConfig, mode: str, n: int, N: int, draw: int) -> list:
    """All records of one ``(mode, n, N, draw)`` cell; a pure function of its arguments."""
    prec = cfg.precision
    rng = cell_rng(cfg.seed, MODES.index(mode), n, N, draw)
    base = {"mode": mode, "n": n, "N": N, "draw": draw}
    start = time.perf_counter()
    try:
        if mode == "kernel":
            params, results = _kernel_checks(rng, prec)
        else:
            ps = draw_parameter_set(rng, n, N, _BALANCING[mode], p_zero=cfg.p_zero and mode == "summation",
                                    prec=prec)
            params = _ps_params(ps)
            if mode == "summation":
                results = _summation_checks(ps, prec)
            elif mode == "invariants":
                results = _invariant_checks(ps, rng, prec)
            elif mode == "two-term":
                results = _two_term_checks(ps, prec)
            else:
                results = _recursion_checks(ps, prec)
    except GenericityFailure as exc:
        return [dict(base, check=f"{mode}.draw", status="skipped", reason=str(exc))]
    except EllsumError as exc:
        # a near-pole or truncation failure inside an accepted draw is a failed check
        return [dict(base, check=f"{mode}.error", status="fail", reason=f"{type(exc).__name__}: {exc}")]
    elapsed = time.perf_counter() - start
    records = []
    for check, extra, residual in results:
        tol = cfg.tolerance(check)
        ok = residual <= tol
        rec = dict(base, check=check, **extra)
        rec.update(status="pass" if ok else "fail", residual=residual, tolerance=tol, params=params)
        if cfg.timing:
            rec["wall_time"] = elapsed / len(results)
        records.append(rec)
    return records


def grid(cfg: SuiteConfig) -> list:
    """Cells in report order: mode, then n, then N, then draw."""
    return [(mode, n, N, d) for mode in cfg.modes for n in cfg.n_range for N in cfg.N_range
            if applicable(mode, N) for d in range(cfg.draws)]


def worker_count() -> int:
    raw = os.environ.get("ELLSUM_THREADS", "1")
    try:
        count = int(raw)
    except ValueError:
        raise ConfigError("ELLSUM_THREADS", f"expected an integer, got {raw!r}") from None
    if count < 1:
        raise ConfigError("ELLSUM_THREADS", f"must be >= 1, got {count}")
    return count


def _run_task(args):
    return run_cell(*args)


@dataclass
class VerificationReport:
    config: SuiteConfig
    records: list

    @property
    def summary(self) -> dict:
        counts = {"pass": 0, "fail": 0, "skipped": 0}
        for rec in self.records:
            counts[rec["status"]] += 1
        residuals = [rec["residual"] for rec in self.records if "residual" in rec]
        return {
            "records": len(self.records),
            "passed": counts["pass"],
            "failed": counts["fail"],
            "skipped": counts["skipped"],
            "max_residual": max(residuals) if residuals else None,
            "seed": self.config.seed,
            "mode": self.config.mode,
        }

    @property
    def ok(self) -> bool:
        return self.summary["failed"] == 0

    def to_json(self) -> str:
        # one record per line keeps large reports diffable
        head = {"schema": SCHEMA, "config": _config_echo(self.config), "summary": _encode(self.summary)}
        lines = ["{"] + [f" {json.dumps(k)}: {json.dumps(v)}," for k, v in head.items()]
        recs = [json.dumps(_encode(rec)) for rec in self.records]
        lines.append(' "records": [')
        lines += [f"  {r}," for r in recs[:-1]] + [f"  {r}" for r in recs[-1:]]
        lines += [" ]", "}"]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["mode", "check", "n", "N", "draw", "r", "status", "residual", "tolerance", "reason"]
        if self.config.timing:
            cols.append("wall_time")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols + ["params"])
        for rec in self.records:
            row = [_scalar(rec.get(c, "")) for c in cols]
            row.append(json.dumps(_encode(rec["params"])) if "params" in rec else "")
            writer.writerow(row)
        return buf.getvalue()

    def render(self) -> str:
        return self.to_json() if self.config.format == "json" else self.to_csv()


def _sci(x: float) -> str:
    return f"{x:.16e}"


def _scalar(v):
    return _sci(v) if isinstance(v, float) else v


def _encode(obj):
    """Complex values become ``[re, im]``; residuals and tolerances become 17-digit strings."""
    if isinstance(obj, dict):
        return {k: (_sci(v) if k in ("residual", "tolerance", "max_residual") and isinstance(v, float)
                    else _encode(v)) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _config_echo(cfg: SuiteConfig) -> dict:
    return {
        "mode": cfg.mode,
        "n": list(cfg.n_range),
        "N": list(cfg.N_range),
        "draws": cfg.draws,
        "seed": cfg.seed,
        "p0": cfg.p_zero,
        "eps_trunc": cfg.precision.eps_trunc,
        "deterministic_sum": not cfg.precision.compensated,
        "tolerances": {k: _sci(float(cfg.tolerance(k))) for k in DEFAULT_TOLERANCES},
    }


def run_suite(cfg: SuiteConfig, workers: int | None = None) -> VerificationReport:
    """Run every applicable cell and collect the records in grid order.

    ``workers`` defaults to ``ELLSUM_THREADS`` (1 if unset).  Cells are
    independent, so the report does not depend on the worker count.
    """
    workers = worker_count() if workers is None else workers
    tasks = [(cfg, *cell) for cell in grid(cfg)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        chunks = [_run_task(t) for t in tasks]
    return VerificationReport(cfg, [rec for chunk in chunks for rec in chunk])

