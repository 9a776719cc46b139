# Certification
#> Everything here works from a function, its indices and the enumerations
#> alone; nothing the builder measured is trusted. Sup norms are taken on
#> boundary control grids of L_m = {|z| <= m} pulled onto the window, at a
#> phase that interleaves with every fit grid.

import logging
import math
from collections.abc import Callable
from typing_extensions import Self

import numpy as np
from pydantic import BaseModel, Field, model_validator

from tuniv.approx import Disk, FittedPolynomial, sample_disk_boundary
from tuniv.builder import Task, UniversalSeries, Witness
from tuniv.config import Settings, config_hash
from tuniv.curves import Coverage, CurveFamily, distance_to_curve, parameter_grid
from tuniv.enumeration import (
    anchor_point,
    anchor_points,
    boundary_point,
    poly,
    scale,
    scales,
    subfamily_parameter,
)
from tuniv.errors import UsageError
from tuniv.polynomials import Polynomial
from tuniv.types import ComplexValue, Natural

log = logging.getLogger(__name__)

#> candidate anchors measured per batch in verify_target
SCAN_BATCH = 64
#> control points screened before a window is measured in full
COARSE_SAMPLES = 64
#> samples per turn when following an accumulating curve
TURN_SAMPLES = 64


#!------------------ Records ------------------!#


class MembershipIndices(BaseModel):
    m: Natural
    j: Natural
    p: Natural
    s: Natural
    t: Natural
    l: Natural
    k: Natural
    n: Natural

    @classmethod
    def parse(cls, text: str) -> "MembershipIndices":
        """Read "m,j,p,s,t,l,k,n"."""
        parts = [part.strip() for part in text.split(",")]
        if len(parts) != 8:
            raise UsageError(f"expected 8 comma-separated indices m,j,p,s,t,l,k,n, got {text!r}")
        try:
            values = [int(part) for part in parts]
        except ValueError as exc:
            raise UsageError(f"indices must be integers: {text!r}") from exc
        return cls(**dict(zip("mjpstlkn", values)))

    def __str__(self) -> str:
        return ",".join(str(getattr(self, name)) for name in "mjpstlkn")


class MembershipVerdict(BaseModel):
    passed: bool
    margin: float | None = Field(default=None, description="1/s minus the measured error")
    error: float | None = None
    anchor_distance: float
    a: float
    b: ComplexValue
    reason: str | None = None


class Certificate(BaseModel):
    task: int | None = None
    stream: str | None = None
    indices: MembershipIndices | None = None
    m: int
    s: int
    t: int
    k: int
    n: int
    a: float
    b: ComplexValue
    zeta: ComplexValue
    error: float | None
    anchor_distance: float
    margin: float | None
    control_samples: int
    control_phase: float
    verifier_hash: str
    passed: bool
    reason: str | None = None

    @model_validator(mode="after")
    def check_margin(self) -> Self:
        if self.error is None or self.margin is None:
            return self
        if not math.isclose(self.margin, 1.0 / self.s - self.error, abs_tol=1e-15):
            raise ValueError("margin must equal 1/s - error")
        return self


class NotFound(BaseModel):
    task: int | None = None
    k_max: int
    n_max: int
    best_margin: float | None = Field(
        default=None, description="largest 1/s - error seen; a coarse-grid upper bound for screened windows"
    )
    best_k: int | None = None
    best_n: int | None = None
    reason: str


#!------------------ Measurement ------------------!#


def _control_grid(m: int, settings: Settings, n_control: int | None) -> tuple[np.ndarray, int]:
    count = n_control or settings.verify.control_samples
    if count < 64:
        raise UsageError("certificates are measured on at least 64 control samples")
    phase = 2.0 * math.pi * settings.verify.control_phase / count
    return sample_disk_boundary(Disk(radius=m), count, phase), count


def window_error(f: Callable, target: Callable, a: float, b: complex, z: np.ndarray) -> float:
    """max over z of |f(a z + b) - target(z)|."""
    difference = np.asarray(f(a * z + b), dtype=complex) - np.asarray(target(z), dtype=complex)
    return float(np.max(np.abs(np.broadcast_to(difference, z.shape))))


def _verdict(f, target, a, b, zeta, m, s, t, z) -> MembershipVerdict:
    anchor_distance = abs(b - zeta)
    if a * m + abs(b) >= 1:
        return MembershipVerdict(
            passed=False,
            anchor_distance=anchor_distance,
            a=a,
            b=b,
            reason=f"window a*m + |b| = {a * m + abs(b):.6g} leaves the unit disc",
        )
    error = window_error(f, target, a, b, z)
    margin = 1.0 / s - error
    reasons = []
    if not margin > 0:
        reasons.append(f"error {error:.3e} is not below 1/s = {1.0 / s:.3e}")
    if not anchor_distance < 1.0 / t:
        reasons.append(f"|b - zeta| = {anchor_distance:.3e} is not below 1/t = {1.0 / t:.3e}")
    return MembershipVerdict(
        passed=not reasons,
        margin=margin,
        error=error,
        anchor_distance=anchor_distance,
        a=a,
        b=b,
        reason="; ".join(reasons) or None,
    )


def _window_of(idx: MembershipIndices, family: CurveFamily, settings: Settings) -> tuple[float, complex, complex, float]:
    alpha = float(subfamily_parameter(family, idx.p, idx.l, settings.search))
    zeta = boundary_point(idx.p)
    return scale(idx.k), anchor_point(family, alpha, zeta, idx.n), zeta, alpha


#!------------------ Predicates ------------------!#


def membership(
    f: Callable,
    idx: MembershipIndices,
    family: CurveFamily,
    n_control: int | None = None,
    settings: Settings | None = None,
) -> MembershipVerdict:
    """Is f in the basic open set named by (m,j,p,s,t,l,k,n)?"""
    settings = settings or Settings()
    z, _ = _control_grid(idx.m, settings, n_control)
    a, b, zeta, _ = _window_of(idx, family, settings)
    target = poly(idx.j).to_polynomial()
    return _verdict(f, target, a, b, zeta, idx.m, idx.s, idx.t, z)


def _curve_parameters(family: CurveFamily, zeta: complex, n: int, settings: Settings) -> np.ndarray:
    """Parameters locating z_alpha; an accumulating curve is followed past its n-th pass."""
    grid = parameter_grid(family.curve_interval, settings.search.curve_samples)
    if family.coverage is not Coverage.ACCUMULATING:
        return grid
    theta = math.atan2(zeta.imag, zeta.real) % (2 * math.pi)
    turns = theta / (2 * math.pi) + n + 1
    passes = np.linspace(0.0, 2 * math.pi * turns, int(math.ceil(turns)) * TURN_SAMPLES + 1)[1:]
    return np.concatenate([grid, passes])


def relaxed_membership(
    f: Callable,
    idx: MembershipIndices,
    h: int,
    family: CurveFamily,
    n_control: int | None = None,
    settings: Settings | None = None,
    anchor: complex | None = None,
) -> MembershipVerdict:
    """membership with the anchor allowed anywhere within 1/h of C_pl.
    Without an explicit anchor the on-curve b_n is used and lies on C_pl."""
    settings = settings or Settings()
    if h < 1:
        raise UsageError("h must be a natural number")
    z, _ = _control_grid(idx.m, settings, n_control)
    a, on_curve, zeta, alpha = _window_of(idx, family, settings)
    if anchor is None:
        b, gap = on_curve, 0.0
    else:
        b = complex(anchor)
        gap = distance_to_curve(family, alpha, b, _curve_parameters(family, zeta, idx.n, settings))
    verdict = _verdict(f, poly(idx.j).to_polynomial(), a, b, zeta, idx.m, idx.s, idx.t, z)
    if gap < 1.0 / h:
        return verdict
    reason = f"anchor lies {gap:.3e} from the curve, not within 1/h = {1.0 / h:.3e}"
    return verdict.model_copy(
        update={"passed": False, "reason": "; ".join(filter(None, [verdict.reason, reason]))}
    )


def openness_margin(
    f: Callable,
    idx: MembershipIndices,
    family: CurveFamily,
    n_control: int | None = None,
    settings: Settings | None = None,
) -> float:
    """1/s minus the window error; f + e stays a member for |e| below it."""
    verdict = membership(f, idx, family, n_control, settings)
    if not verdict.passed:
        raise UsageError(f"f is not a member for indices {idx}: {verdict.reason}")
    return verdict.margin


#!------------------ Certificates ------------------!#


def _certificate(
    f: Callable,
    task: Task,
    k: int,
    n: int,
    a: float,
    b: complex,
    settings: Settings,
    n_control: int | None,
    *,
    task_index: int | None = None,
    stream: str | None = None,
    reason: str | None = None,
) -> Certificate:
    z, count = _control_grid(task.m, settings, n_control)
    verdict = _verdict(f, task.target(), a, b, task.boundary, task.m, task.s, task.t, z)
    indices = None
    if task.j is not None and task.p is not None and task.l is not None:
        indices = MembershipIndices(m=task.m, j=task.j, p=task.p, s=task.s, t=task.t, l=task.l, k=k, n=n)
    error = verdict.error
    return Certificate(
        task=task_index,
        stream=stream,
        indices=indices,
        m=task.m,
        s=task.s,
        t=task.t,
        k=k,
        n=n,
        a=a,
        b=b,
        zeta=task.boundary,
        error=error,
        anchor_distance=verdict.anchor_distance,
        margin=verdict.margin,
        control_samples=count,
        control_phase=settings.verify.control_phase,
        verifier_hash=config_hash(settings.verify),
        passed=verdict.passed and reason is None,
        reason="; ".join(filter(None, [reason, verdict.reason])) or None,
    )


def certify_indices(
    f: Callable,
    idx: MembershipIndices,
    family: CurveFamily,
    n_control: int | None = None,
    settings: Settings | None = None,
) -> Certificate:
    """membership, written up as a certificate."""
    settings = settings or Settings()
    task = Task(m=idx.m, j=idx.j, s=idx.s, t=idx.t, p=idx.p, l=idx.l)
    a, b, _, _ = _window_of(idx, family, settings)
    return _certificate(f, task, idx.k, idx.n, a, b, settings, n_control)


def verify_target(
    f: Callable,
    task: Task,
    family: CurveFamily,
    k_max: int | None = None,
    n_max: int | None = None,
    n_control: int | None = None,
    settings: Settings | None = None,
    task_index: int | None = None,
) -> Certificate | NotFound:
    """First (k, n) in k-major order whose window certifies the task."""
    settings = settings or Settings()
    k_max = k_max or settings.search.k_max
    n_max = n_max or settings.search.n_max
    z, _ = _control_grid(task.m, settings, n_control)
    zeta = task.boundary
    alpha = task.curve_parameter(family, settings)
    anchors = anchor_points(family, alpha, zeta, n_max)
    with np.errstate(invalid="ignore"):
        near = np.flatnonzero(np.abs(anchors - zeta) < 1.0 / task.t)
    target = np.asarray(task.target()(z), dtype=complex)
    target = np.broadcast_to(target, z.shape)
    radii = np.abs(anchors[near])

    #> a subset of the control grid; its sup error bounds the full one from below
    stride = max(1, z.size // COARSE_SAMPLES)
    coarse, coarse_target = z[::stride], target[::stride]

    def window_errors(a, points, wanted, batch):
        windows = a * points[None, :] + anchors[batch][:, None]
        values = np.broadcast_to(np.asarray(f(windows), dtype=complex), windows.shape)
        return np.max(np.abs(values - wanted[None, :]), axis=1)

    best: tuple[float, int, int] | None = None
    for k, a in enumerate(scales(k_max), start=1):
        candidates = near[a * task.m + radii < 1]
        for start in range(0, candidates.size, SCAN_BATCH):
            batch = candidates[start : start + SCAN_BATCH]
            bounds = 1.0 / task.s - window_errors(a, coarse, coarse_target, batch)
            hopeful = bounds > 0
            if not hopeful.any():
                top = int(np.argmax(bounds))
                if best is None or bounds[top] > best[0]:
                    best = (float(bounds[top]), k, int(batch[top]) + 1)
                continue
            batch = batch[hopeful]
            margins = 1.0 / task.s - window_errors(a, z, target, batch)
            top = int(np.argmax(margins))
            if best is None or margins[top] > best[0]:
                best = (float(margins[top]), k, int(batch[top]) + 1)
            for index in batch[margins > 0]:
                n = int(index) + 1
                b = anchor_point(family, alpha, zeta, n)
                certificate = _certificate(
                    f, task, k, n, float(a), b, settings, n_control, task_index=task_index
                )
                if certificate.passed:
                    log.info("task %s certified at k=%d n=%d", task_index, k, n)
                    return certificate
    log.info("task %s: no certificate within k <= %d, n <= %d", task_index, k_max, n_max)
    return NotFound(
        task=task_index,
        k_max=k_max,
        n_max=n_max,
        best_margin=best[0] if best else None,
        best_k=best[1] if best else None,
        best_n=best[2] if best else None,
        reason="no admissible window passes" if best else "no admissible window in the search box",
    )


def certify_witness(
    f: Callable,
    witness: Witness,
    task: Task,
    family: CurveFamily,
    n_control: int | None = None,
    settings: Settings | None = None,
) -> Certificate:
    """Re-measure a recorded witness after reproducing a and b from its indices."""
    settings = settings or Settings()
    alpha = task.curve_parameter(family, settings)
    a = scale(witness.k)
    b = anchor_point(family, alpha, task.boundary, witness.n)
    reason = None
    if a != witness.a or b != witness.b:
        reason = f"witness (a, b) does not reproduce from k={witness.k}, n={witness.n}"
    return _certificate(
        f,
        task,
        witness.k,
        witness.n,
        a,
        b,
        settings,
        n_control,
        task_index=witness.task,
        stream=witness.stream,
        reason=reason,
    )


def certify_series(
    series: UniversalSeries, n_control: int | None = None, settings: Settings | None = None
) -> list[Certificate]:
    if series.witnesses and series.family is None:
        raise UsageError("the series does not record its curve family")
    stray = [w.task for w in series.witnesses if not 0 <= w.task < len(series.tasks)]
    if stray:
        raise UsageError(f"witnesses name tasks {stray} but the series records {len(series.tasks)}")
    certificates = [
        certify_witness(series, witness, series.tasks[witness.task], series.family, n_control, settings)
        for witness in series.witnesses
    ]
    failed = [c for c in certificates if not c.passed]
    if failed:
        log.warning("%d of %d certificates failed", len(failed), len(certificates))
    return certificates


#!------------------ Snapping ------------------!#


def derivative_of(f: Callable, z):
    if isinstance(f, Polynomial):
        return f.derivative()(z)
    if isinstance(f, (FittedPolynomial, UniversalSeries)):
        return f.derivative(z)
    raise UsageError("a Lipschitz bound needs a polynomial or series with a known derivative")


def snap_radius(
    f: Callable,
    a: float,
    b: complex,
    task: Task,
    n_control: int | None = None,
    settings: Settings | None = None,
) -> float:
    """delta with Lip * delta < 1/(2s) on the window enlarged by d/2, where d
    is the distance from the window to the unit circle; delta <= d/2."""
    settings = settings or Settings()
    distance = 1.0 - abs(b) - a * task.m
    if distance <= 0:
        raise UsageError("the window a*L_m + b is not inside the unit disc")
    enlarged = Disk(center=b, radius=a * task.m + distance / 2)
    count = n_control or settings.verify.control_samples
    lipschitz = float(np.max(np.abs(derivative_of(f, sample_disk_boundary(enlarged, count)))))
    if lipschitz == 0:
        return distance / 2
    return min(distance / 2, 0.99 / (2 * task.s * lipschitz))


def snap_witness(
    f: Callable,
    a: float,
    b: complex,
    task: Task,
    family: CurveFamily,
    n_control: int | None = None,
    settings: Settings | None = None,
) -> tuple[int, int, Certificate] | NotFound:
    """Move a working window (a, b) onto the enumerated scales and anchors.

    Requires the window to reach 1/(2s) with |b - zeta| < 1/t. The snapped
    witness is the first a_k within delta/(2m) of a and the first anchor within
    delta/2 of b that still lies within 1/t of zeta; it is certified at 1/s.
    """
    settings = settings or Settings()
    z, _ = _control_grid(task.m, settings, n_control)
    zeta = task.boundary
    if a <= 0 or a * task.m + abs(b) >= 1:
        raise UsageError("the window a*L_m + b is not inside the unit disc")
    error = window_error(f, task.target(), a, b, z)
    if not error < 1.0 / (2 * task.s) or not abs(b - zeta) < 1.0 / task.t:
        raise UsageError(
            f"(a, b) does not meet the snapping hypothesis: error {error:.3e} "
            f"(needs < {1.0 / (2 * task.s):.3e}), |b - zeta| = {abs(b - zeta):.3e} "
            f"(needs < {1.0 / task.t:.3e})"
        )
    delta = snap_radius(f, a, b, task, n_control, settings)

    k_max, n_max = settings.search.k_max, settings.search.n_max
    close = np.flatnonzero(np.abs(scales(k_max) - a) < delta / (2 * task.m))
    alpha = task.curve_parameter(family, settings)
    anchors = anchor_points(family, alpha, zeta, n_max)
    with np.errstate(invalid="ignore"):
        near = np.flatnonzero((np.abs(anchors - b) < delta / 2) & (np.abs(anchors - zeta) < 1.0 / task.t))
    if not close.size or not near.size:
        return NotFound(
            k_max=k_max,
            n_max=n_max,
            reason=f"no enumerated window within delta={delta:.3e} of (a, b)",
        )
    k, n = int(close[0]) + 1, int(near[0]) + 1
    certificate = _certificate(f, task, k, n, scale(k), anchor_point(family, alpha, zeta, n), settings, n_control)
    log.info("snapped (a, b) to k=%d n=%d with delta %.3e", k, n, delta)
    return k, n, certificate
