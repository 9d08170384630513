"""Parametric multimode Mach-Zehnder models U(theta) = W^-1 P(theta) W.

A model fixes the splitter W, the phase-carrying modes, and a Fock probe;
per-theta evaluation touches only the diagonal phase layer between the two
cached lifted splitters.  Derivative states are exact (number-operator
insertion), never finite differences.
"""

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatchError, InternalInconsistencyError
from .fock import (
    FockBasis,
    basis_state,
    enumerate_basis,
    lift_unitary,
    number_operator,
    phase_layer,
)
from .tolerances import DEFAULT_TOLERANCES


def tritter() -> np.ndarray:
    """Balanced three-mode splitter: 3^{-1/2} e^{i 2pi/3 (1 - delta_jk)}."""
    off = np.exp(2j * np.pi / 3)
    u = np.full((3, 3), off, dtype=complex)
    np.fill_diagonal(u, 1.0)
    return u / np.sqrt(3)


def quarter() -> np.ndarray:
    """Balanced four-mode splitter: 2^{-1} (-1)^{1 - delta_jk} (real orthogonal)."""
    u = np.full((4, 4), -0.5)
    np.fill_diagonal(u, 0.5)
    return u


@dataclass(frozen=True)
class DerivativeBundle:
    """Output state and its exact phase derivatives at one working point."""

    theta: np.ndarray
    psi: np.ndarray          # normalized |psi_s>
    dpsi: tuple              # d vectors |d_l psi_s>, amplitude per radian
    basis: FockBasis

    @property
    def d(self) -> int:
        return len(self.dpsi)

    def validate(self, tol=1e-10):
        norm_error = abs(np.vdot(self.psi, self.psi).real - 1.0)
        if norm_error > tol:
            raise InternalInconsistencyError(f"|psi| deviates from 1 by {norm_error:.3e}")
        for l, dp in enumerate(self.dpsi):
            overlap = np.vdot(dp, self.psi)
            if abs(overlap.real) > tol:
                raise InternalInconsistencyError(
                    f"<d_{l} psi|psi> has real part {overlap.real:.3e}; "
                    "the normalization derivative must vanish"
                )
        return self


class Interferometer:
    """m-mode interferometer with phases inserted between W and W^-1.

    The evolution is ``lift(W^-1) . PhaseLayer(theta) . lift(W)`` applied to
    a Fock probe, with e^{+i theta_l} acting on ``phase_modes[l]``.
    """

    def __init__(self, splitter, phase_modes, probe, tol=DEFAULT_TOLERANCES.unitary):
        splitter = np.asarray(splitter, dtype=complex)
        modes = splitter.shape[0]
        if splitter.shape != (modes, modes):
            raise DimensionMismatchError("splitter must be square")
        phase_modes = tuple(int(p) for p in phase_modes)
        if len(set(phase_modes)) != len(phase_modes):
            raise ValueError("phase modes must be distinct")
        if not phase_modes or len(phase_modes) > modes - 1:
            raise ValueError("need 1 <= len(phase_modes) <= modes - 1")
        if any(not 0 <= p < modes for p in phase_modes):
            raise IndexError("phase mode out of range")
        probe = tuple(int(n) for n in probe)
        if len(probe) != modes or any(n < 0 for n in probe):
            raise ValueError("probe must list a nonnegative count per mode")

        self.modes = modes
        self.splitter = splitter
        self.phase_modes = phase_modes
        self.probe = probe
        self.basis = enumerate_basis(sum(probe), modes)
        self.lifted_splitter = lift_unitary(splitter, self.basis, tol=tol)
        self.lifted_splitter_inverse = self.lifted_splitter.conj().T
        self._split_probe = self.lifted_splitter @ basis_state(self.basis, probe)
        self._phase_occupations = np.column_stack(
            [number_operator(self.basis, p) for p in phase_modes]
        )

    @property
    def d(self) -> int:
        return len(self.phase_modes)

    def _theta(self, theta) -> np.ndarray:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != (self.d,):
            raise DimensionMismatchError(
                f"expected {self.d} phases, got shape {theta.shape}"
            )
        return theta

    def output_state(self, theta) -> np.ndarray:
        """Normalized amplitudes of U(theta) applied to the probe."""
        theta = self._theta(theta)
        layer = np.exp(1j * (self._phase_occupations @ theta))
        return self.lifted_splitter_inverse @ (layer * self._split_probe)

    def derivative_bundle(self, theta) -> DerivativeBundle:
        """Output state plus its exact derivative with respect to each phase."""
        theta = self._theta(theta)
        layer = np.exp(1j * (self._phase_occupations @ theta))
        shifted = layer * self._split_probe
        psi = self.lifted_splitter_inverse @ shifted
        dpsi = tuple(
            self.lifted_splitter_inverse
            @ (1j * self._phase_occupations[:, l] * shifted)
            for l in range(self.d)
        )
        return DerivativeBundle(theta=theta, psi=psi, dpsi=dpsi, basis=self.basis)

    def finite_difference_bundle(self, theta, delta=1e-5) -> DerivativeBundle:
        """Central-difference derivative states; test oracle only."""
        theta = self._theta(theta)
        psi = self.output_state(theta)
        dpsi = []
        for l in range(self.d):
            step = np.zeros(self.d)
            step[l] = delta
            dpsi.append((self.output_state(theta + step) - self.output_state(theta - step)) / (2 * delta))
        return DerivativeBundle(theta=theta, psi=psi, dpsi=tuple(dpsi), basis=self.basis)

    def to_dict(self) -> dict:
        return {
            "modes": self.modes,
            "splitter": [[[z.real, z.imag] for z in row] for row in self.splitter],
            "phase_modes": list(self.phase_modes),
            "probe": list(self.probe),
        }


_SPLITTER_BUILDERS = {"tritter": tritter, "quarter": quarter}


def model_from_dict(spec: dict) -> Interferometer:
    """Build a model from its description dictionary (see ``load_model``)."""
    try:
        splitter_spec = spec["splitter"]
        phase_modes = spec["phase_modes"]
        probe = spec["probe"]
    except KeyError as missing:
        raise ValueError(f"model description lacks field {missing}") from None
    if isinstance(splitter_spec, str):
        try:
            splitter = _SPLITTER_BUILDERS[splitter_spec]()
        except KeyError:
            raise ValueError(f"unknown splitter name {splitter_spec!r}") from None
    else:
        splitter = np.array(
            [[complex(re, im) for re, im in row] for row in splitter_spec]
        )
    model = Interferometer(splitter, phase_modes, probe)
    if "modes" in spec and int(spec["modes"]) != model.modes:
        raise ValueError(
            f"declared modes {spec['modes']} but splitter has {model.modes}"
        )
    return model


def load_model(path) -> Interferometer:
    """Load a model description from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def save_model(model: Interferometer, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, indent=2)


@lru_cache(maxsize=None)
def builtin_model(name: str) -> Interferometer:
    """The two balanced reference instruments.

    ``mzi3``: tritter, probe |1,1,1>, phases on modes 0 and 1.
    ``mzi4``: quarter, probe |1,1,1,1>, phases on modes 0 and 1.
    """
    if name == "mzi3":
        return Interferometer(tritter(), (0, 1), (1, 1, 1))
    if name == "mzi4":
        return Interferometer(quarter(), (0, 1), (1, 1, 1, 1))
    raise ValueError(f"unknown builtin model {name!r}; expected mzi3 or mzi4")
