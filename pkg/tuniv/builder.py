# Series construction
#> A universal series is assembled one correction at a time. Each task gets
#> a window a_k * L_m + b on a subfamily curve near its boundary point, and a
#> correction q fitted so that
#>   * on the window, series + q approximates the pulled-back target to 1/(2s)
#>   * on the frozen region, |q| stays below tau_i = T * 2^-i
#> The frozen region holds every earlier window, so the tau_i add up to at
#> most T <= 1/(4s) of damage on any completed task.

import logging
from collections.abc import Callable, Sequence
from typing import Any, Literal

from typing_extensions import Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from tuniv.approx import (
    Disk,
    FitReport,
    FittedPolynomial,
    PieceTarget,
    fit_simultaneous,
    zero_target,
)
from tuniv.config import Settings
from tuniv.curves import CurveFamily
from tuniv.enumeration import (
    anchor_point,
    anchor_points,
    boundary_point,
    poly,
    scales,
    subfamily_parameter,
)
from tuniv.errors import BuildAborted, DomainError, PlacementError, UsageError
from tuniv.polynomials import Polynomial
from tuniv.types import ComplexValue, Natural

log = logging.getLogger(__name__)

#> |zeta| must equal 1 to this accuracy
UNIT_CIRCLE_TOL = 1e-15

Stream = Literal["g", "h"]


#!------------------ Tasks ------------------!#


class Task(BaseModel):
    """One universality goal: approximate the target on L_m = {|z| <= m} to 1/s
    through a window anchored within 1/t of the boundary point."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    m: Natural = 1
    j: Natural | None = Field(default=None, description="index of the target p_j")
    coefficients: tuple[ComplexValue, ...] | None = None
    function: Callable[[np.ndarray], Any] | None = Field(default=None, exclude=True)
    s: Natural
    t: Natural
    p: Natural | None = Field(default=None, description="index of the boundary point zeta_p")
    zeta: ComplexValue | None = None
    l: Natural | None = Field(default=None, description="index of the subfamily curve C_pl")
    alpha: float | None = Field(default=None, description="explicit curve parameter")
    label: str = ""

    @model_validator(mode="after")
    def check_task(self) -> Self:
        targets = [self.j is not None, self.coefficients is not None, self.function is not None]
        if sum(targets) != 1:
            raise ValueError("give exactly one of j, coefficients or function as the target")
        if (self.p is None) == (self.zeta is None):
            raise ValueError("give exactly one of p or zeta")
        if self.zeta is not None and abs(abs(self.zeta) - 1.0) > UNIT_CIRCLE_TOL:
            raise ValueError(f"zeta={self.zeta} is not on the unit circle")
        if (self.l is None) == (self.alpha is None):
            raise ValueError("name the curve either by l or by alpha")
        if self.l is not None and self.p is None:
            raise ValueError("a subfamily curve C_pl needs the boundary index p")
        return self

    @property
    def boundary(self) -> complex:
        return boundary_point(self.p) if self.p is not None else complex(self.zeta)

    def target(self) -> Callable:
        if self.function is not None:
            return self.function
        if self.coefficients is not None:
            return Polynomial(self.coefficients)
        return poly(self.j).to_polynomial()

    def curve_parameter(self, family: CurveFamily, settings: Settings | None = None) -> float:
        settings = settings or Settings()
        if self.alpha is not None:
            if not family.param_interval.contains(self.alpha):
                raise DomainError(f"alpha={self.alpha} is not a curve of the {family.kind} family")
            return float(self.alpha)
        return float(subfamily_parameter(family, self.p, self.l, settings.search))


def window_target(target: Callable, a: float, b: complex) -> Callable:
    """z -> target((z - b) / a), the target moved onto the window."""

    def pulled_back(z):
        return target((np.asarray(z) - b) / a)

    return pulled_back


#!------------------ Records ------------------!#


class Placement(BaseModel):
    k: int
    n: int
    a: float
    b: ComplexValue
    alpha: float
    zeta: ComplexValue
    delta: float
    window: Disk
    anchor_distance: float


class Witness(BaseModel):
    task: int = Field(description="position of the task in its task list")
    stream: Stream | None = None
    k: int
    n: int
    p: int | None = None
    l: int | None = None
    alpha: float
    a: float
    b: ComplexValue
    zeta: ComplexValue
    window: Disk
    delta: float
    achieved_error: float
    anchor_distance: float
    degree: int
    frozen_radius: float = Field(description="frozen radius before this step")
    step: int


class Ledger(BaseModel):
    """Perturbation budget. tau[i-1] is the frozen tolerance of step i."""

    tail_budget: float = 0.0
    tau: list[float] = []
    slack: list[float] = Field(default=[], description="1/(4s) per completed step")
    consumed: list[float] = Field(default=[], description="sum of later tau per completed step")

    @property
    def remaining(self) -> list[float]:
        return [s - c for s, c in zip(self.slack, self.consumed)]


#!------------------ Series ------------------!#


Term = FittedPolynomial | Polynomial


def _term_derivative(term: Term, z):
    if isinstance(term, Polynomial):
        return term.derivative()(z)
    return term.derivative(z)


class UniversalSeries(BaseModel):
    """Finite sum of corrections with the witnesses it was built for."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    terms: list[Term] = []
    witnesses: list[Witness] = []
    ledger: Ledger = Ledger()
    family: CurveFamily | None = None
    tasks: list[Task] = []

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        total = np.zeros_like(z)
        for term in self.terms:
            total = total + term(z)
        return complex(total) if total.ndim == 0 else total

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        total = np.zeros_like(z)
        for term in self.terms:
            total = total + _term_derivative(term, z)
        return complex(total) if total.ndim == 0 else total

    def negated(self) -> "UniversalSeries":
        return self.model_copy(update={"terms": [term.negated() for term in self.terms]})

    @property
    def degrees(self) -> list[int]:
        return [term.degree for term in self.terms]


class BuildState(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    terms: list[Term] = []
    frozen_radius: float = Field(ge=0, lt=1)
    frozen: list[Disk] = []
    witnesses: list[Witness] = []
    ledger: Ledger = Ledger()
    step: int = 0

    def partial(self, z):
        z = np.asarray(z, dtype=complex)
        total = np.zeros_like(z)
        for term in self.terms:
            total = total + term(z)
        return total

    def frozen_distance(self, zeta: complex) -> float:
        if not self.frozen:
            return abs(zeta)
        return min(disk.distance_to(zeta) for disk in self.frozen)


def initial_state(tasks: Sequence[Task], settings: Settings | None = None) -> BuildState:
    settings = settings or Settings()
    radius = settings.build.initial_frozen_radius
    budget = min((1.0 / (4 * task.s) for task in tasks), default=0.0)
    return BuildState(
        frozen_radius=radius,
        frozen=[Disk(radius=radius)] if radius > 0 else [],
        ledger=Ledger(tail_budget=budget),
    )


#!------------------ Placement ------------------!#


def place_window(
    state: BuildState, task: Task, family: CurveFamily, settings: Settings | None = None
) -> Placement:
    """Anchor first, then scale.

    delta is half the distance from zeta to the frozen region. The anchor is
    the first b_n with |b_n - zeta| < min(1/t, delta/2) inside the disc; the
    scale the first a_k < min(delta/(2m), (1 - |b|)/(2m)).
    """
    settings = settings or Settings()
    if not state.frozen_radius < 1:
        raise UsageError("the frozen region already reaches the unit circle")
    zeta = task.boundary
    alpha = task.curve_parameter(family, settings)
    delta = state.frozen_distance(zeta) / 2
    if delta <= 0:
        raise PlacementError(f"zeta={zeta} lies in the frozen region")

    proximity = min(1.0 / task.t, delta / 2)
    anchors = anchor_points(family, alpha, zeta, settings.search.n_max)
    with np.errstate(invalid="ignore"):
        admissible = (np.abs(anchors - zeta) < proximity) & (np.abs(anchors) < 1)
    if not admissible.any():
        raise PlacementError(
            f"no anchor among the first {settings.search.n_max} points of curve "
            f"alpha={alpha:.6g} comes within {proximity:.3g} of zeta={zeta:.6g}"
        )
    n_index = int(np.argmax(admissible))
    b = anchor_point(family, alpha, zeta, n_index + 1)

    bound = min(delta / (2 * task.m), (1 - abs(b)) / (2 * task.m))
    candidates = scales(settings.search.k_max)
    small = candidates < bound
    if not small.any():
        raise PlacementError(f"no scale a_k < {bound:.3g} among the first {settings.search.k_max}")
    k_index = int(np.argmax(small))
    a = float(candidates[k_index])
    return Placement(
        k=k_index + 1,
        n=n_index + 1,
        a=a,
        b=b,
        alpha=alpha,
        zeta=zeta,
        delta=delta,
        window=Disk(center=b, radius=a * task.m),
        anchor_distance=abs(b - zeta),
    )


#!------------------ Steps ------------------!#


def _frozen_after(state: BuildState, placement: Placement, settings: Settings) -> tuple[float, list[Disk]]:
    reach = max(state.frozen_radius, abs(placement.b) + placement.window.radius)
    radius = reach + (1 - reach) / 4
    if settings.build.frozen_policy == "disk":
        return radius, [Disk(radius=radius)]
    window = placement.window
    margin = min((1 - abs(window.center) - window.radius) / 4, placement.delta / 2)
    return radius, [*state.frozen, window.enlarged(margin)]


def build_step(
    state: BuildState,
    task: Task,
    family: CurveFamily,
    settings: Settings | None = None,
    *,
    task_index: int | None = None,
    stream: Stream | None = None,
    offset: Callable | None = None,
) -> tuple[BuildState, FitReport]:
    """Place the task's window and fit its correction. offset is added to the
    partial sum when forming the function the task is certified against."""
    settings = settings or Settings()
    step = state.step + 1
    placement = place_window(state, task, family, settings)
    tau = state.ledger.tail_budget * 2.0**-step

    def current(z):
        values = state.partial(z)
        return values + offset(z) if offset is not None else values

    pulled_back = window_target(task.target(), placement.a, placement.b)
    window_piece = PieceTarget(
        region=placement.window,
        target=lambda z: pulled_back(z) - current(z),
        tolerance=1.0 / (2 * task.s),
        fit_samples=settings.fit.fit_samples,
        control_samples=settings.fit.control_samples,
        label="window",
    )
    frozen_pieces = [
        PieceTarget(
            region=disk,
            target=zero_target,
            tolerance=tau,
            fit_samples=settings.fit.fit_samples,
            control_samples=settings.fit.control_samples,
            label="frozen",
        )
        for disk in state.frozen
    ]
    correction, report = fit_simultaneous(
        [window_piece, *frozen_pieces],
        settings.fit.max_degree,
        settings.fit.schedule,
        settings.fit,
    )
    if not report.success:
        raise BuildAborted(
            f"step {step}: no correction of degree <= {settings.fit.max_degree} reaches "
            f"the tolerances (window error {report.piece_errors[0]:.3e}, "
            f"allowed {settings.fit.fit_fraction * window_piece.tolerance:.3e})",
            partial=state,
            report=report,
        )

    radius, frozen = _frozen_after(state, placement, settings)
    witness = Witness(
        task=task_index if task_index is not None else len(state.witnesses),
        stream=stream,
        k=placement.k,
        n=placement.n,
        p=task.p,
        l=task.l,
        alpha=placement.alpha,
        a=placement.a,
        b=placement.b,
        zeta=placement.zeta,
        window=placement.window,
        delta=placement.delta,
        achieved_error=report.piece_errors[0],
        anchor_distance=placement.anchor_distance,
        degree=correction.degree,
        frozen_radius=state.frozen_radius,
        step=step,
    )
    ledger = Ledger(
        tail_budget=state.ledger.tail_budget,
        tau=[*state.ledger.tau, tau],
        slack=[*state.ledger.slack, 1.0 / (4 * task.s)],
        consumed=[c + tau for c in state.ledger.consumed] + [0.0],
    )
    log.info(
        "step %d: k=%d n=%d window |b|=%.6f a=%.3g, degree %d, frozen radius %.4f -> %.4f",
        step, placement.k, placement.n, abs(placement.b), placement.a,
        correction.degree, state.frozen_radius, radius,
    )
    new_state = BuildState(
        terms=[*state.terms, correction],
        frozen_radius=radius,
        frozen=frozen,
        witnesses=[*state.witnesses, witness],
        ledger=ledger,
        step=step,
    )
    return new_state, report


def _series_from(state: BuildState, family: CurveFamily, tasks: Sequence[Task]) -> UniversalSeries:
    return UniversalSeries(
        terms=list(state.terms),
        witnesses=list(state.witnesses),
        ledger=state.ledger,
        family=family,
        tasks=list(tasks),
    )


def build_universal(
    tasks: Sequence[Task], family: CurveFamily, settings: Settings | None = None
) -> UniversalSeries:
    settings = settings or Settings()
    state = initial_state(tasks, settings)
    for index, task in enumerate(tasks):
        try:
            state, _ = build_step(state, task, family, settings, task_index=index)
        except BuildAborted as exc:
            exc.partial = _series_from(exc.partial, family, tasks[:index])
            raise
    log.info("built %d corrections for %d tasks", len(state.terms), len(tasks))
    return _series_from(state, family, tasks)


#!------------------ Decomposition ------------------!#


def _terms_of(f: UniversalSeries | Term) -> list[Term]:
    return list(f.terms) if isinstance(f, UniversalSeries) else [f]


def _streams_from(
    state: BuildState,
    f_terms: Sequence[Term],
    family: CurveFamily,
    tasks_g: Sequence[Task],
    tasks_h: Sequence[Task],
) -> tuple[UniversalSeries, UniversalSeries]:
    """g = u and h = u - f, each with its own witnesses and task list."""
    g = UniversalSeries(
        terms=list(state.terms),
        witnesses=[w for w in state.witnesses if w.stream == "g"],
        ledger=state.ledger,
        family=family,
        tasks=list(tasks_g),
    )
    h = UniversalSeries(
        terms=[*state.terms, *(term.negated() for term in f_terms)],
        witnesses=[w for w in state.witnesses if w.stream == "h"],
        ledger=state.ledger,
        family=family,
        tasks=list(tasks_h),
    )
    return g, h


def decompose(
    f: UniversalSeries | Term,
    tasks_g: Sequence[Task],
    tasks_h: Sequence[Task],
    family: CurveFamily,
    settings: Settings | None = None,
) -> tuple[UniversalSeries, UniversalSeries]:
    """Write f = g - h with g and h each built for their own tasks.

    One stream of corrections u serves both: g-tasks are fitted against u,
    h-tasks against u - f. Then g = u and h = u - f term by term.
    An abort carries the (g, h) pair built so far as its partial.
    """
    settings = settings or Settings()
    f_terms = _terms_of(f)

    def minus_f(z):
        z = np.asarray(z, dtype=complex)
        total = np.zeros_like(z)
        for term in f_terms:
            total = total - term(z)
        return total

    schedule: list[tuple[Stream, int, Task]] = []
    for index in range(max(len(tasks_g), len(tasks_h))):
        if index < len(tasks_g):
            schedule.append(("g", index, tasks_g[index]))
        if index < len(tasks_h):
            schedule.append(("h", index, tasks_h[index]))

    state = initial_state([*tasks_g, *tasks_h], settings)
    for stream, index, task in schedule:
        try:
            state, _ = build_step(
                state,
                task,
                family,
                settings,
                task_index=index,
                stream=stream,
                offset=minus_f if stream == "h" else None,
            )
        except BuildAborted as exc:
            exc.partial = _streams_from(exc.partial, f_terms, family, tasks_g, tasks_h)
            raise

    g, h = _streams_from(state, f_terms, family, tasks_g, tasks_h)
    log.info("decomposed into %d shared corrections plus %d terms of -f", len(state.terms), len(f_terms))
    return g, h


def termwise_gap(f: UniversalSeries | Term, g: UniversalSeries, h: UniversalSeries, z) -> float:
    """max |g - h - f| at z, pairing the corrections g and h share term by term."""
    z = np.asarray(z, dtype=complex)
    shared = len(g.terms)
    total = np.zeros_like(z)
    for mine, theirs in zip(g.terms, h.terms[:shared]):
        total = total + (mine(z) - theirs(z))
    for term in h.terms[shared:]:
        total = total - term(z)
    total = total - np.asarray(f(z), dtype=complex)
    return float(np.max(np.abs(total)))
