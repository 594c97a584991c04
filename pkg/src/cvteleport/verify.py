"""Acceptance checks: every release criterion as a callable returning a
structured result, shared by the CLI ``verify`` command and the test suite.

One criterion sub-check is known to be unattainable at the pinned
parameters: the sampled resource kernel of a squeezing-1.0 state truncated
at n_max=40 deviates from the infinite-dimensional Gaussian closed form by
2 * P(0) * tanh(1)^40 ~ 4.4e-5 at the origin, which sits above the 1e-5
target (the floor scales with the Schmidt amplitude tail tanh(r)^n_max, not
the norm leakage tanh(r)^(2 n_max); n_max >= 46 would clear it).  That
sub-check is therefore marked *expected to fail* and its expectation is
strict: measuring anything else is reported as a real failure.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .channel import (
    ChannelConfig,
    apply_channel,
    apply_thermal_form,
    fidelity_via_kernel,
    gaussian_kernel,
    grid_for,
    kernel_from,
    noisy_nbar,
)
from .densecoding import (
    empirical_mutual_information,
    mutual_information_gaussian,
    noisy_dense_coding,
    simulate_transmission,
)
from .epr import EprVector, epr_overlaps, kernel_values, tmsv
from .errors import TruncationError
from .fock import (
    DensityMatrix,
    cat_state,
    coherent_state,
    fidelity,
    fock_state,
    mix_two_mode,
    momentum_operator,
    partial_trace,
    position_operator,
    random_density_matrix,
    thermal_state,
    trace_distance,
    two_mode_pure,
    vacuum,
)
from .gaussian import (
    apply_gaussian_channel,
    coherent_gaussian,
    gaussian_fidelity,
)
from .grids import PhaseGrid, default_extent
from .teleport import average_output

__all__ = ["CheckResult", "CRITERIA", "run_criterion", "run_all", "format_line", "list_lines"]


@dataclass
class CheckResult:
    cid: str
    title: str
    passed: bool
    metrics: Dict[str, float] = field(default_factory=dict)
    detail: str = ""
    seconds: float = 0.0
    expected_failure: bool = False

    @property
    def ok(self) -> bool:
        """True when nothing unexpected happened (pass, or known-red failing)."""
        return self.passed or self.expected_failure


def _timed(fn: Callable[..., CheckResult], *args, **kwargs) -> CheckResult:
    start = time.perf_counter()
    result = fn(*args, **kwargs)
    result.seconds = time.perf_counter() - start
    return result


def _input_states(n_max: int) -> Dict[str, DensityMatrix]:
    return {
        "vacuum": vacuum(n_max),
        "fock1": fock_state(1, n_max),
        "coherent0.8": coherent_state(0.8, n_max),
        "evencat1.0": cat_state(1.0, 0.0, n_max),
    }


def _resources(n_max: int):
    return {
        "tmsv0.3": tmsv(0.3, n_max),
        "tmsv0.8": tmsv(0.8, n_max),
        "mix": mix_two_mode(
            [tmsv(0.3, n_max), tmsv(0.8, n_max)], [0.6, 0.4]
        ),
    }


# --------------------------------------------------------------------------
# criteria


def check_main_theorem(n_max: int = 40, resolution: int = 121) -> CheckResult:
    """Protocol average equals the kernel channel on a shared grid."""
    tol = 1e-3
    cfg = ChannelConfig(resolution=resolution)
    metrics: Dict[str, float] = {}
    worst = 0.0
    for rname, W in _resources(n_max).items():
        for sname, rho in _input_states(n_max).items():
            grid = grid_for(cfg, 1.0, rho)
            kernel = kernel_from(W, grid)
            via_channel = apply_channel(kernel, rho, cfg)
            via_protocol = average_output(rho, W, cfg, grid=grid)
            td = trace_distance(via_channel, via_protocol)
            metrics[f"td[{sname},{rname}]"] = td
            metrics[f"deficit[{sname},{rname}]"] = via_channel.leakage
            worst = max(worst, td)
    metrics["max_trace_distance"] = worst
    return CheckResult(
        "criterion-1",
        "protocol average vs displacement channel (4 inputs x 3 resources)",
        worst <= tol,
        metrics,
        f"max trace distance {worst:.3e} (tol {tol:.0e})",
    )


_KERNEL_FLOOR_NOTE = (
    "truncated Schmidt tail puts a floor of 2*P(0)*tanh(r)^n_max on the "
    "closed-form deviation; at r=1.0, n_max=40 that floor is 4.4e-5 > 1e-5, "
    "so this sub-check cannot pass as stated (n_max >= 46 would clear it)"
)


def check_kernel_closed_form(n_max: int = 40, resolution: int = 121) -> CheckResult:
    """Sampled resource kernel vs the Gaussian closed form."""
    tol = 1e-5
    metrics: Dict[str, float] = {}
    failures = []
    for r in (0.0, 0.5, 1.0):
        nbar = math.exp(-2.0 * r)
        grid = PhaseGrid.centered(default_extent(nbar), resolution)
        pts = grid.points()
        sampled = kernel_values(tmsv(r, n_max), pts)
        closed = np.exp(-(pts[:, 0] ** 2 + pts[:, 1] ** 2) / (2 * nbar)) / (
            2 * math.pi * nbar
        )
        dev = float(np.abs(sampled - closed).max())
        metrics[f"max_dev[r={r}]"] = dev
        if dev > tol:
            failures.append(r)
    floor = 2.0 * (math.e**2 / (2 * math.pi)) * math.tanh(1.0) ** n_max
    expected = failures == [1.0] and abs(metrics["max_dev[r=1.0]"] - floor) < floor
    passed = not failures
    detail = f"max deviations {metrics} (tol {tol:.0e})"
    if expected:
        detail = (
            f"r=1.0 deviation {metrics['max_dev[r=1.0]']:.3e} matches the "
            f"truncation floor {floor:.3e}; {_KERNEL_FLOOR_NOTE}"
        )
    return CheckResult(
        "criterion-2",
        "sampled kernel matches Gaussian closed form (r in 0, 0.5, 1.0)",
        passed,
        metrics,
        detail,
        expected_failure=expected,
    )


def check_thermalizing_identity(n_max: int = 40) -> CheckResult:
    """Vacuum in -> thermal out; coherent in -> displaced thermal out."""
    tol = 1e-3
    metrics: Dict[str, float] = {}
    for r in (0.3, 0.8):
        nbar = math.exp(-2.0 * r)
        out = apply_channel(gaussian_kernel(nbar), vacuum(n_max))
        metrics[f"td_vacuum[r={r}]"] = trace_distance(out, thermal_state(nbar, n_max))
    nbar = math.exp(-1.0)
    out = apply_channel(gaussian_kernel(nbar), coherent_state(0.8, n_max))
    target = apply_thermal_form([(1.0, 0.8)], nbar, n_max)
    metrics["td_coherent[r=0.5]"] = trace_distance(out, target)
    worst = max(metrics.values())
    return CheckResult(
        "criterion-3",
        "thermalizing identity: vacuum and coherent inputs",
        worst <= tol,
        metrics,
        f"max trace distance {worst:.3e} (tol {tol:.0e})",
    )


def check_coherent_fidelity_law(n_max: int = 40, resolution: int = 121) -> CheckResult:
    """Four fidelity routes agree with 1/(1 + exp(-2r)) over the sweep."""
    tol = 1e-3
    alpha = 0.8
    cfg = ChannelConfig(resolution=resolution)
    psi = coherent_state(alpha, n_max)
    metrics: Dict[str, float] = {}
    worst_err = 0.0
    worst_spread = 0.0
    for r in np.arange(0.0, 1.5001, 0.25):
        nbar = math.exp(-2.0 * r)
        analytic = 1.0 / (1.0 + nbar)
        W = tmsv(float(r), n_max)
        grid = grid_for(cfg, 1.0, psi)
        kernel = kernel_from(W, grid)
        f_quad = fidelity_via_kernel(kernel, psi, cfg)
        f_state = fidelity(psi.normalized(), apply_channel(kernel, psi, cfg))
        f_oracle = fidelity(psi.normalized(), average_output(psi, W, cfg, grid=grid))
        g = coherent_gaussian(alpha)
        f_gauss = gaussian_fidelity(g, apply_gaussian_channel(g, nbar))
        routes = np.array([f_quad, f_state, f_oracle, f_gauss])
        spread = float(routes.max() - routes.min())
        err = float(np.abs(routes - analytic).max())
        metrics[f"err[r={r:.2f}]"] = err
        worst_err = max(worst_err, err)
        worst_spread = max(worst_spread, spread)
        if r == 0.0:
            metrics["F_at_r0"] = float(routes[0])
    metrics["max_route_spread"] = worst_spread
    metrics["max_analytic_error"] = worst_err
    boundary_ok = abs(metrics["F_at_r0"] - 0.5) <= tol
    passed = worst_err <= tol and worst_spread <= tol and boundary_ok
    return CheckResult(
        "criterion-4",
        "coherent fidelity law 1/(1+exp(-2r)) via four routes",
        passed,
        metrics,
        f"max error {worst_err:.3e}, max spread {worst_spread:.3e} (tol {tol:.0e})",
    )


def check_noisy_substitution(n_max: int = 40) -> CheckResult:
    """Lossy resource: vacuum teleports to thermal with the substituted nbar."""
    tol = 1e-3
    r, transmission = 0.35, 0.7
    nbar = noisy_nbar(r, transmission)
    out = apply_channel(gaussian_kernel(nbar), vacuum(n_max))
    td = trace_distance(out, thermal_state(nbar, n_max))
    return CheckResult(
        "criterion-5",
        "noisy-resource substitution nbar = 1 - (1 - exp(-2r)) T",
        td <= tol,
        {"nbar": nbar, "trace_distance": td},
        f"nbar {nbar:.6f}, trace distance {td:.3e} (tol {tol:.0e})",
    )


def check_measurement_invariants(n_max: int = 40) -> CheckResult:
    """Reduced-trace identity, completeness quadrature, variance law."""
    metrics: Dict[str, float] = {}
    # reduced trace of the ideal-resource projector: identity / (2 pi)
    reduced = partial_trace(EprVector(n_max).projector(), "B")
    dev = float(np.abs(reduced.data - np.eye(n_max) / (2 * math.pi)).max())
    metrics["reduced_identity_dev"] = dev
    ok = dev <= 1e-14

    # completeness: integral of |<Phi(x,p)|psi>|^2 recovers the norm
    rng = np.random.default_rng(20240811)
    support = 8
    grid = PhaseGrid.centered(default_extent(1.0, support), 161)
    for trial in range(3):
        psi = np.zeros((n_max, n_max), dtype=np.complex128)
        block = rng.standard_normal((support, support)) + 1j * rng.standard_normal(
            (support, support)
        )
        psi[:support, :support] = block / np.linalg.norm(block)
        state = two_mode_pure(psi)
        overlaps = epr_overlaps(state, grid.points())
        total = float(np.dot(grid.weights(), np.abs(overlaps) ** 2))
        metrics[f"completeness[{trial}]"] = total
        ok = ok and abs(total - 1.0) <= 1e-3

    # TMSV joint-quadrature variance law
    x_op = position_operator(n_max)
    p_op = momentum_operator(n_max)
    eye = np.eye(n_max)
    x_minus = np.kron(x_op, eye) - np.kron(eye, x_op)
    p_plus = np.kron(p_op, eye) + np.kron(eye, p_op)
    for r in (0.3, 0.8, 1.0):
        W = tmsv(r, n_max)
        dense = W.dense()
        tr = W.trace
        var_x = float(np.trace(dense @ (x_minus @ x_minus)).real) / tr
        var_p = float(np.trace(dense @ (p_plus @ p_plus)).real) / tr
        target = math.exp(-2.0 * r)
        metrics[f"var_dev[r={r}]"] = max(abs(var_x - target), abs(var_p - target))
        ok = ok and metrics[f"var_dev[r={r}]"] <= 1e-6
    detail = (
        f"reduced-trace dev {dev:.1e}; completeness and variance laws inside tolerance"
        if ok
        else f"metrics {metrics}"
    )
    return CheckResult(
        "criterion-6",
        "measurement-operator invariants (reduced trace, completeness, variances)",
        ok,
        metrics,
        detail,
    )


def check_dense_coding(n_max: int = 40) -> CheckResult:
    """Error statistics, mutual information accuracy and monotonicity."""
    metrics: Dict[str, float] = {}
    # empirical error covariance from 1e5 transmissions of a real resource
    r_cov = 0.5
    W = tmsv(r_cov, n_max)
    target = math.exp(-2.0 * r_cov)
    received = np.asarray(
        simulate_transmission(W, np.zeros((100_000, 2)), seed=20240807)
    )
    var_x = float(received[:, 0].var())
    var_p = float(received[:, 1].var())
    cross = float(np.mean(received[:, 0] * received[:, 1]))
    metrics["cov_rel_err"] = max(abs(var_x - target), abs(var_p - target)) / target
    metrics["cross_cov"] = cross
    ok = metrics["cov_rel_err"] <= 0.05 and abs(cross) <= 0.05 * target

    # MI estimate vs closed form at the reference operating point
    signal_var, r_mi = 2.0, 1.0
    nbar = math.exp(-2.0 * r_mi)
    closed = mutual_information_gaussian(signal_var, nbar)
    empirical = empirical_mutual_information(
        noisy_dense_coding(r_mi, 1.0), signal_var, 100_000, seed=7
    )
    metrics["mi_closed"] = closed
    metrics["mi_empirical"] = empirical
    ok = ok and abs(empirical - closed) <= 0.1

    # monotonicity in squeezing at fixed signal power
    previous = -math.inf
    for r in (0.25, 0.5, 1.0):
        value = empirical_mutual_information(
            noisy_dense_coding(r, 1.0), signal_var, 40_000, seed=100 + int(r * 100)
        )
        metrics[f"mi[r={r}]"] = value
        ok = ok and value > previous
        previous = value
    return CheckResult(
        "criterion-7",
        "dense coding: error covariance, MI accuracy, MI monotonicity",
        ok,
        metrics,
        f"cov rel err {metrics['cov_rel_err']:.3f}, "
        f"|MI err| {abs(empirical - closed):.3f} bits",
    )


def check_channel_structure(n_max: int = 40, resolution: int = 121) -> CheckResult:
    """Trace deficits, output positivity, exact identity branch."""
    metrics: Dict[str, float] = {}
    cfg = ChannelConfig(resolution=resolution)
    worst_deficit = 0.0
    ok = True
    try:
        for rname, W in _resources(n_max).items():
            for sname, rho in _input_states(n_max).items():
                grid = grid_for(cfg, 1.0, rho)
                out = apply_channel(kernel_from(W, grid), rho, cfg)
                worst_deficit = max(worst_deficit, out.leakage)
    except TruncationError as exc:
        return CheckResult(
            "criterion-8",
            "channel structure: deficits, positivity, identity branch",
            False,
            metrics,
            f"truncation leakage diagnostic: {exc}",
        )
    metrics["max_trace_deficit"] = worst_deficit
    ok = ok and worst_deficit <= 1e-3

    rng = np.random.default_rng(20240808)
    kernel = gaussian_kernel(0.5)
    cfg_small = ChannelConfig(resolution=61)
    floor = 0.0
    for _ in range(20):
        rho = random_density_matrix(n_max, rng)
        out = apply_channel(kernel, rho, cfg_small)
        floor = min(floor, out.eigen_floor())
    metrics["positivity_floor"] = floor
    ok = ok and floor >= -1e-9

    rho = coherent_state(0.7, n_max)
    out = apply_channel(gaussian_kernel(0.0), rho)
    identity_dev = float(np.abs(out.data - rho.data).max())
    metrics["identity_dev"] = identity_dev
    ok = ok and identity_dev == 0.0
    return CheckResult(
        "criterion-8",
        "channel structure: deficits, positivity, identity branch",
        ok,
        metrics,
        f"max deficit {worst_deficit:.3e}, eigen floor {floor:.2e}, "
        f"identity dev {identity_dev:.1e}",
    )


CRITERIA = {
    "criterion-1": ("protocol average vs displacement channel", check_main_theorem),
    "criterion-2": ("sampled kernel vs Gaussian closed form", check_kernel_closed_form),
    "criterion-3": ("thermalizing identity", check_thermalizing_identity),
    "criterion-4": ("coherent fidelity law, four routes", check_coherent_fidelity_law),
    "criterion-5": ("noisy-resource substitution", check_noisy_substitution),
    "criterion-6": ("measurement-operator invariants", check_measurement_invariants),
    "criterion-7": ("dense coding statistics", check_dense_coding),
    "criterion-8": ("channel structure properties", check_channel_structure),
}


def run_criterion(cid: str, n_max: int = 40) -> CheckResult:
    if cid not in CRITERIA:
        raise KeyError(f"unknown criterion {cid!r}")
    return _timed(CRITERIA[cid][1], n_max=n_max)


def run_all(n_max: int = 40, only: Optional[List[str]] = None) -> List[CheckResult]:
    cids = list(CRITERIA) if not only else list(only)
    return [run_criterion(cid, n_max=n_max) for cid in cids]


def format_line(result: CheckResult) -> str:
    if result.passed:
        status = "PASS "
    elif result.expected_failure:
        status = "XFAIL"
    else:
        status = "FAIL "
    return (
        f"[{status}] {result.cid}: {result.title} -- {result.detail} "
        f"({result.seconds:.1f}s)"
    )


def list_lines() -> List[str]:
    return [f"{cid}: {title}" for cid, (title, _) in CRITERIA.items()]
