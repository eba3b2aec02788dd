"""Normalised iteration of Minkowski valuations and the probes built on it."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import body as bd
from .discriminant import area_density
from .errors import NumericalValidityError, RepresentationMismatch, ZeroBody
from .harmonics import gegenbauer_rule
from .valuation import Kernel, apply_valuation, is_monotone

COLUMNS = ("step", "gamma", "d_H", "d_2", "sup_density_err", "tv", "psi", "contraction_est")
STOP_TOL = 1e-12


def normalize(K: bd.Body, i: int):
    """``(lam K, lam)`` with ``pi_0 s_i(lam K) = 1`` (``i >= 2``) or ``pi_0 h = 1`` (``i = 1``)."""
    q = K.mean() if i == 1 else area_density(K, i).mean
    if not q > 0:
        raise ZeroBody(f"normalising quantity {q:.3e} is not positive")
    lam = 1.0 / q if i == 1 else q ** (-1.0 / i)
    return K.scaled(lam), lam


def unit_ball_like(K: bd.Body) -> bd.Body:
    if isinstance(K, bd.GridBody):
        return bd.ball(1.0, grid=K.grid, max_degree=K.max_degree)
    return bd.ZonalBody(K.dim_n, bd.constant_profile(1.0), K.max_degree, t_nodes=K.t_nodes)


def inner_product(K: bd.Body, L: bd.Body) -> float:
    """``int h_K h_L`` by the quadrature of the representation."""
    K.check_compatible(L)
    if isinstance(K, bd.GridBody):
        if not K.grid.same_as(L.grid):
            raise RepresentationMismatch("bodies live on different grids")
        return K.grid.integrate(K.values * L.values)
    rule = gegenbauer_rule(K.dim_n, max(K.rule.design_degree, L.rule.design_degree),
                           tuple(K.profile.breakpoints) + tuple(L.profile.breakpoints))
    return rule.sphere_integral(K.profile.value(rule.nodes) * L.profile.value(rule.nodes))


def _volume(K: bd.Body, j: int) -> float:
    return bd.intrinsic_volume(K, j, "density" if j <= K.dim_n - 1 else "support")


def psi_ratio(K: bd.Body, kernel: Kernel, i: int, image: bd.Body | None = None) -> float:
    """``V_{i+1}(Phi_i K) / V_{i+1}(K)^i`` (normalised kernel)."""
    image = image if image is not None else apply_valuation(K, kernel, i)
    return _volume(image, i + 1) / _volume(K, i + 1) ** i


def fixed_point_residual(K: bd.Body, kernel: Kernel, i: int) -> float:
    """``min_alpha ||h(Phi_i^2 K) - alpha h_K||_2 / ||h_K||_2`` (closed-form least squares)."""
    K2 = apply_valuation(apply_valuation(K, kernel, i), kernel, i)
    kk, k2k, k22 = inner_product(K, K), inner_product(K2, K), inner_product(K2, K2)
    alpha = max(k2k / kk, 0.0)
    res2 = k22 - 2 * alpha * k2k + alpha * alpha * kk
    # the expansion above cancels badly near zero; fall back to the direct integral
    if res2 < 1e-8 * k22:
        if isinstance(K, bd.GridBody):
            res2 = K.grid.integrate((K2.values - alpha * K.values) ** 2)
        else:
            rule = K.rule
            d = K2.profile.value(rule.nodes) - alpha * K.profile.value(rule.nodes)
            res2 = rule.sphere_integral(d * d)
    return math.sqrt(max(res2, 0.0) / kk)


@dataclass
class IterationTrace:
    """Per-step record of a normalised iteration (row 0 is the normalised input)."""

    rows: list = field(default_factory=list)
    log_gamma: list = field(default_factory=list)
    stop_reason: str = "completed"
    meta: dict = field(default_factory=dict)
    final_body: object = field(default=None, repr=False)

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        j = COLUMNS.index(name)
        return np.array([r[j] for r in self.rows], dtype=float)

    def fitted_ratio(self, name: str = "d_2", floor: float = 1e-13) -> float:
        """Least-squares geometric ratio over the last half of the trace.

        Entries below ``floor`` (quadrature noise) are dropped; returns NaN if
        fewer than two usable entries remain.
        """
        y = self.column(name)
        steps = self.column("step")
        half = len(y) // 2
        y, steps = y[half:], steps[half:]
        keep = y > floor
        if keep.sum() < 2:
            return math.nan
        return float(np.exp(np.polyfit(steps[keep], np.log(y[keep]), 1)[0]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([r[0]] + [f"{v:.17g}" for v in r[1:]])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = dict(self.meta)
        doc.update({"format": 1, "columns": list(COLUMNS),
                    "rows": [[float(v) if isinstance(v, float) else v for v in r] for r in self.rows],
                    "log_gamma": self.log_gamma, "stop_reason": self.stop_reason})
        return json.dumps(doc, sort_keys=True, allow_nan=True)


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def iterate(K: bd.Body, kernel: Kernel, i: int, steps: int, mode: str = "general",
            warmup: int = 0, stop_tol: float = STOP_TOL, seed=None) -> IterationTrace:
    """Iterate ``K_{m+1} = xi_{m+1} Phi_i K_m`` with per-step normalisation.

    ``mode="degree1"`` (requires ``i = 1`` and a monotone kernel) scales once
    by ``1/pi_0 h_K`` and reports ``gamma_m`` relative to the raw kernel, so
    that ``1/gamma_m = (w(K)/2) (int g)^m``.  ``mode="general"`` reports
    ``gamma_m`` relative to the normalised kernel: ``K_m = gamma_m Phi^m K``,
    accumulated as ``log gamma_m = log xi_m + i log gamma_{m-1}``.

    Row ``m`` records ``K_m``; ``psi`` uses ``Phi_i K_m``.  Stops early when
    ``d_2 < stop_tol`` or when an image fails validation (recorded in
    ``stop_reason``).  ``warmup`` steps run before row 0 and count towards gamma.
    """
    if mode not in ("general", "degree1"):
        raise ValueError(f"unknown mode {mode!r}")
    if not 1 <= i <= K.dim_n - 1:
        raise ValueError(f"degree must be in 1..{K.dim_n - 1}")
    if mode == "degree1":
        if i != 1:
            raise ValueError("degree1 mode needs i = 1")
        if kernel.profile is not None and not is_monotone(kernel):
            raise ValueError("degree1 mode needs a monotone kernel (box_n g >= 0)")
    ball = unit_ball_like(K)
    trace = IterationTrace(meta={
        "mode": mode, "degree": i, "dim_n": K.dim_n, "K_max": K.max_degree,
        "grid": list(K.grid.shape) if isinstance(K, bd.GridBody) else None,
        "kernel": kernel.name, "kernel_hash": _digest(kernel.to_json()),
        "body_hash": _digest(bd.to_json(K)), "seed": seed, "warmup": warmup,
        "requested_steps": steps})
    raw_shift = math.log(kernel.raw_a0) if mode == "degree1" else 0.0
    cur, lam = normalize(K, i)
    log_g = math.log(lam)

    def advance(body, log_g):
        image = apply_valuation(body, kernel, i)
        nxt, xi = normalize(image, i)
        if mode == "degree1":
            log_g = math.log(xi) + log_g - raw_shift
        else:
            log_g = math.log(xi) + i * log_g
        return image, nxt, log_g

    try:
        for _ in range(warmup):
            _, cur, log_g = advance(cur, log_g)
    except NumericalValidityError as exc:
        trace.stop_reason = f"{type(exc).__name__} during warmup: {exc}"
        return trace

    prev_d2 = math.nan
    for m in range(steps + 1):
        s = area_density(cur, i)
        d2 = bd.lp_distance(cur, ball, 2)
        row = [m, math.exp(log_g) if abs(log_g) < 700 else (math.inf if log_g > 0 else 0.0),
               bd.hausdorff_distance(cur, ball), d2, s.sup_error(1.0), s.tv_to_constant(1.0),
               math.nan, d2 / prev_d2 if m and prev_d2 > 0 else math.nan]
        trace.rows.append(row)
        trace.log_gamma.append(log_g)
        if d2 < stop_tol:
            trace.stop_reason = "converged"
            break
        if m == steps:
            break
        try:
            image, nxt, new_log = advance(cur, log_g)
        except NumericalValidityError as exc:
            trace.stop_reason = f"{type(exc).__name__}: {exc}"
            break
        row[6] = psi_ratio(cur, kernel, i, image)
        cur, log_g, prev_d2 = nxt, new_log, d2
    trace.final_body = cur
    return trace
