"""Classical and quantum Fisher information matrices for projective measurements.

The classical matrix sums ``dP_l dP_m / P`` over measurement outcomes with
``dP_l = 2 Re[<d_l psi|Y_k><Y_k|psi>]``.  Outcomes whose probability
vanishes at the working point are indeterminate (0/0); their contribution
is the Richardson-extrapolated limit along a configurable approach
direction, except where it vanishes analytically (all first-order overlaps
zero) or the probability is identically zero along the path.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BasisMismatchError,
    IncompleteSetError,
    InternalInconsistencyError,
    LimitNonConvergentError,
    StepTooLargeError,
)
from .fock import FockBasis, enumerate_basis
from .interferometer import DerivativeBundle, Interferometer
from .linalg import hermitian_eigenvalues, spectral_norm
from .tolerances import DEFAULT_LIMIT_POLICY, DEFAULT_TOLERANCES, LimitPolicy


class ProjectorSet:
    """Rank-one projectors |Y_k><Y_k| over a shared Fock basis.

    ``vectors`` is the (K, dim) array of amplitude rows.  A set flagged
    ``complete`` must resolve the identity, which is validated at
    construction.
    """

    def __init__(self, basis: FockBasis, vectors, complete: bool,
                 tol=DEFAULT_TOLERANCES):
        vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
        if vectors.shape[1] != basis.dim:
            raise BasisMismatchError(
                f"projector length {vectors.shape[1]} != basis dimension {basis.dim}"
            )
        norms = np.linalg.norm(vectors, axis=1)
        worst = float(np.max(np.abs(norms - 1.0))) if norms.size else 0.0
        if worst > 1e-10:
            raise ValueError(f"projector normalization off by {worst:.3e}")
        if complete:
            resolution = vectors.T @ vectors.conj()
            deviation = float(np.max(np.abs(resolution - np.eye(basis.dim))))
            if deviation > tol.completeness:
                raise IncompleteSetError(
                    f"sum_k |Y_k><Y_k| deviates from identity by {deviation:.3e}"
                )
        self.basis = basis
        self.vectors = vectors
        self.complete = bool(complete)

    def __len__(self):
        return self.vectors.shape[0]

    @classmethod
    def fock(cls, basis: FockBasis) -> "ProjectorSet":
        """Photon-counting measurement: one projector per occupation."""
        return cls(basis, np.eye(basis.dim, dtype=complex), complete=True)

    def occupation_index(self, occupation) -> int:
        """Row index of the projector equal to one occupation state."""
        target = self.basis.index_of(occupation)
        column = np.abs(self.vectors[:, target])
        k = int(np.argmax(column))
        if abs(column[k] - 1.0) > 1e-10:
            raise ValueError(f"no projector equals occupation {tuple(occupation)}")
        return k

    def to_dict(self) -> dict:
        return {
            "modes": self.basis.modes,
            "photons": self.basis.photons,
            "complete": self.complete,
            "projectors": [
                [[z.real, z.imag] for z in row] for row in self.vectors
            ],
        }

    @classmethod
    def from_dict(cls, spec: dict) -> "ProjectorSet":
        basis = enumerate_basis(int(spec["photons"]), int(spec["modes"]))
        vectors = np.array(
            [[complex(re, im) for re, im in row] for row in spec["projectors"]]
        )
        return cls(basis, vectors, complete=bool(spec["complete"]))

    def dump(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "ProjectorSet":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def qfim(bundle: DerivativeBundle) -> np.ndarray:
    """Quantum Fisher information matrix of a pure-state derivative bundle."""
    d = bundle.d
    overlaps = np.empty((d, d), dtype=complex)
    for l in range(d):
        for m in range(l, d):
            overlaps[l, m] = np.vdot(bundle.dpsi[l], bundle.dpsi[m])
            overlaps[m, l] = np.conj(overlaps[l, m])
    c = np.array([np.vdot(dp, bundle.psi) for dp in bundle.dpsi])
    matrix = 4.0 * (overlaps.real + np.outer(c, c).real)
    return 0.5 * (matrix + matrix.T)


def probabilities(psi, projectors: ProjectorSet) -> np.ndarray:
    """Outcome distribution |<Y_k|psi>|^2."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (projectors.basis.dim,):
        raise BasisMismatchError("state and projector set use different bases")
    amplitudes = projectors.vectors.conj() @ psi
    return np.abs(amplitudes) ** 2


@dataclass
class FimDiagnostics:
    """Which outcomes needed special handling in a FIM evaluation."""

    singular_outcomes: list = field(default_factory=list)   # probability below floor
    shortcut_zero: list = field(default_factory=list)       # vanish analytically
    limit_evaluated: list = field(default_factory=list)     # Richardson extrapolation ran
    path_null: list = field(default_factory=list)           # dark along every probe direction
    off_axis: list = field(default_factory=list)            # needed a fallback direction
    direction_dependent: bool = False


def _overlap_data(bundle: DerivativeBundle, projectors: ProjectorSet):
    """Per-outcome overlaps with the state and each derivative state."""
    amp = projectors.vectors.conj() @ bundle.psi            # <Y_k|psi>
    damp = np.stack([projectors.vectors.conj() @ dp for dp in bundle.dpsi])
    return amp, damp                                         # damp[l, k] = <Y_k|d_l psi>


def _score_terms(amp, damp):
    """dP_l per outcome: 2 Re[<d_l psi|Y_k><Y_k|psi>]."""
    return 2.0 * (np.conj(damp) * amp[None, :]).real


def _step_term(amp_k, damp_k, floor):
    """One outcome's FIM term at a displaced point, or None below the floor."""
    p = abs(amp_k) ** 2
    if p < floor:
        return None
    dP = 2.0 * (np.conj(damp_k) * amp_k).real
    return np.outer(dP, dP) / p


def _richardson(values):
    """Two-level Richardson extrapolation for halving steps [h, h/2, h/4].

    Returns (limit, disagreement) where disagreement measures how far the
    two first-level extrapolants differ after the final combination.
    """
    g1, g2, g3 = values
    r1a = 2.0 * g2 - g1
    r1b = 2.0 * g3 - g2
    r2 = (4.0 * r1b - r1a) / 3.0
    return r2, float(np.max(np.abs(r1b - r1a)))


def limit_directions(d: int, primary) -> list:
    """Approach directions tried per outcome, the policy direction first.

    An outcome whose probability is identically zero along the primary
    direction (it lies inside the singular locus) is probed along a fixed
    generic direction and then each coordinate axis before being declared
    dark in the whole neighborhood.  Where the saturation conditions hold
    the limit is direction independent, so the fallback never changes a
    saturating value.
    """
    directions = [np.asarray(primary, dtype=float)]
    if d > 1:
        golden = 0.6180339887498949
        generic = 1.0 + golden * np.arange(d)
        directions.append(generic / np.linalg.norm(generic))
        for axis in range(d):
            e = np.zeros(d)
            e[axis] = 1.0
            directions.append(e)
    return directions


class _StepEvaluator:
    """Lazily evaluates the per-step overlap data along each direction."""

    def __init__(self, model, theta, projectors, policy, steps=None):
        self.model = model
        self.theta = theta
        self.projectors = projectors
        self.policy = policy
        self.step_sizes = tuple(steps) if steps is not None else tuple(policy.steps)
        self._cache = {}

    def steps(self, direction_index, direction):
        if direction_index not in self._cache:
            data = []
            for delta in self.step_sizes:
                bundle = self.model.derivative_bundle(self.theta + delta * direction)
                data.append(_overlap_data(bundle, self.projectors))
            self._cache[direction_index] = data
        return self._cache[direction_index]


def _singular_contribution(model, theta, projectors, outcome_indices, primary,
                           policy: LimitPolicy, strict: bool = True):
    """Limit contributions of zero-probability outcomes.

    Each outcome is extrapolated along the first direction in
    ``limit_directions`` where all steps carry signal.  Returns
    (contribution matrix, evaluated, path_null, off_axis).  With ``strict``
    the policy convergence tolerance is enforced; audits pass
    ``strict=False`` and receive possibly unconverged values.
    """
    d = model.d
    contribution = np.zeros((d, d))
    if not outcome_indices:
        return contribution, [], [], []

    directions = limit_directions(d, primary)
    evaluator = _StepEvaluator(model, theta, projectors, policy)

    evaluated, path_null, off_axis = [], [], []
    for k in outcome_indices:
        saw_partial_signal = False
        resolved = False
        for j, direction in enumerate(directions):
            terms = [
                _step_term(amp[k], damp[:, k], policy.step_floor)
                for amp, damp in evaluator.steps(j, direction)
            ]
            live = [t for t in terms if t is not None]
            if not live:
                continue
            if len(live) < len(terms):
                saw_partial_signal = True
                continue
            limit, disagreement = _richardson(terms)
            scale = max(1.0, float(np.max(np.abs(limit))))
            if disagreement > policy.convergence_tol * scale:
                if strict:
                    raise LimitNonConvergentError(
                        f"outcome {k}: Richardson extrapolants disagree by {disagreement:.3e}"
                    )
                continue
            contribution += limit
            evaluated.append(k)
            if j > 0:
                off_axis.append(k)
            resolved = True
            break
        if resolved:
            continue
        if saw_partial_signal:
            if strict:
                raise LimitNonConvergentError(
                    f"outcome {k}: probability crosses the floor along every probe direction"
                )
            path_null.append(k)
        else:
            path_null.append(k)
    return contribution, evaluated, path_null, off_axis


def fim(model: Interferometer, theta, projectors: ProjectorSet,
        policy: LimitPolicy = DEFAULT_LIMIT_POLICY):
    """Classical Fisher information matrix and singular-outcome diagnostics."""
    bundle = model.derivative_bundle(theta).validate()
    return fim_from_bundle(model, bundle, projectors, policy)


def fim_from_bundle(model: Interferometer, bundle: DerivativeBundle,
                    projectors: ProjectorSet,
                    policy: LimitPolicy = DEFAULT_LIMIT_POLICY):
    """As ``fim`` but reusing an already-evaluated derivative bundle."""
    if projectors.basis != bundle.basis:
        raise BasisMismatchError("bundle and projector set use different bases")
    if not projectors.complete:
        raise IncompleteSetError("the Fisher matrix requires a complete set")

    d = bundle.d
    amp, damp = _overlap_data(bundle, projectors)
    probs = np.abs(amp) ** 2
    scores = _score_terms(amp, damp)

    regular = probs >= policy.probability_floor
    matrix = np.zeros((d, d))
    for k in np.flatnonzero(regular):
        matrix += np.outer(scores[:, k], scores[:, k]) / probs[k]

    diagnostics = FimDiagnostics()
    diagnostics.singular_outcomes = [int(k) for k in np.flatnonzero(~regular)]

    needs_limit = []
    for k in diagnostics.singular_outcomes:
        if np.max(np.abs(damp[:, k])) < policy.derivative_floor:
            # Both dP and P vanish to high enough order that the ratio is
            # zero in the limit; skip the numerics entirely.
            diagnostics.shortcut_zero.append(k)
        else:
            needs_limit.append(k)

    if needs_limit:
        direction = policy.unit_direction(d)
        contribution, evaluated, path_null, off_axis = _singular_contribution(
            model, bundle.theta, projectors, needs_limit, direction, policy
        )
        matrix += contribution
        diagnostics.limit_evaluated = evaluated
        diagnostics.path_null = path_null
        diagnostics.off_axis = off_axis

        if policy.audit_directions and d > 1:
            for axis in range(d):
                e = np.zeros(d)
                e[axis] = 1.0
                audit, _, _, _ = _singular_contribution(
                    model, bundle.theta, projectors, needs_limit, e, policy,
                    strict=False,
                )
                if np.max(np.abs(audit - contribution)) > policy.audit_spread:
                    diagnostics.direction_dependent = True
                    break

    matrix = 0.5 * (matrix + matrix.T)
    return matrix, diagnostics


def fim_finite_difference(model: Interferometer, theta, projectors: ProjectorSet,
                          delta: float = 1e-4) -> np.ndarray:
    """Independent finite-difference evaluation of the classical matrix.

    Central differences on the outcome probabilities; requires every
    probability to clear ``10 * delta`` so the differencing is stable.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    probs = probabilities(model.output_state(theta), projectors)
    if np.min(probs) <= 10.0 * delta:
        raise StepTooLargeError(
            f"min outcome probability {np.min(probs):.3e} <= 10 * delta = {10 * delta:.1e}"
        )
    d = model.d
    dP = np.empty((d, len(projectors)))
    for l in range(d):
        step = np.zeros(d)
        step[l] = delta
        plus = probabilities(model.output_state(theta + step), projectors)
        minus = probabilities(model.output_state(theta - step), projectors)
        dP[l] = (plus - minus) / (2.0 * delta)
    matrix = np.zeros((d, d))
    for k in range(len(projectors)):
        matrix += np.outer(dP[:, k], dP[:, k]) / probs[k]
    return 0.5 * (matrix + matrix.T)


@dataclass(frozen=True)
class FisherPair:
    """Classical and quantum matrices at one working point, with their gap."""

    theta: np.ndarray
    fim: np.ndarray
    qfim: np.ndarray
    gap: float
    singular_outcomes: tuple
    direction_dependent: bool
    diagnostics: FimDiagnostics


def fisher_pair(model: Interferometer, theta, projectors: ProjectorSet,
                policy: LimitPolicy = DEFAULT_LIMIT_POLICY,
                ordering_slack: float = 1e-8) -> FisherPair:
    """Evaluate both matrices and validate the quantum-ordering invariant."""
    bundle = model.derivative_bundle(theta).validate()
    classical, diagnostics = fim_from_bundle(model, bundle, projectors, policy)
    quantum = qfim(bundle)

    difference = quantum - classical
    smallest = float(np.min(hermitian_eigenvalues(difference)))
    if smallest < -ordering_slack:
        raise InternalInconsistencyError(
            f"classical matrix exceeds the quantum bound: min eig(F_Q - F) = {smallest:.3e}"
        )
    gap = spectral_norm(difference)
    if gap > spectral_norm(quantum) + ordering_slack:
        raise InternalInconsistencyError(
            f"gap {gap:.3e} exceeds ||F_Q||_2; matrices are inconsistent"
        )
    return FisherPair(
        theta=bundle.theta,
        fim=classical,
        qfim=quantum,
        gap=gap,
        singular_outcomes=tuple(diagnostics.singular_outcomes),
        direction_dependent=diagnostics.direction_dependent,
        diagnostics=diagnostics,
    )
