"""Worked-example catalog: physical systems reduced to placement problems.

Three benchmark plants, each with its physical parameters and the linear
map between feedback coefficients b and the physical gains an engineer
would actually tune:

  oscillator  -- normalized undamped oscillator y'' + y = u(t - tau) with
                 position/velocity feedback u = -(beta y + alpha y').
  pendulum    -- inverted pendulum on a cart, linearized upright:
                 phi'' - (mass g length / 2 I) phi = (length / 2 I) F,
                 I = mass length^2 / 12, delayed PD force
                 F = -(K_p phi + K_d phi').
  windtunnel  -- third-order transonic flow model with delayed state
                 feedback through actuator gains (alpha1, alpha0, beta);
                 the loop's total delay tau splits into a fixed transport
                 part tau0 and the adjustable part tau1 = tau - tau0.

Derived quantities (a-coefficients, inertia) are always recomputed from
the physical parameters, never cached, so an overridden parameter can
never leave a stale derivative behind.
"""

from dataclasses import dataclass
from math import isfinite

import numpy as np

from .errors import InvalidInput
from .placement import PlacementResult

# id -> parameter name -> (default, unit, meaning)
_SCHEMAS = {
    "oscillator": {},
    "pendulum": {
        "mass": (10.0, "kg", "pendulum mass"),
        "length": (10.0, "m", "pendulum length"),
        "gravity": (9.81, "m/s^2", "gravitational acceleration"),
    },
    "windtunnel": {
        "kappa": (1.964, "s", "flow relaxation time"),
        "k": (-0.67036, "1/rad", "control effectiveness"),
        "tau0": (0.33, "s", "fixed transport delay"),
        "zeta": (0.4368, "", "damping ratio"),
        "omega": (3.292, "rad/s", "natural frequency"),
    },
}

# parameters that must be strictly positive / merely nonzero
_POSITIVE = {
    "pendulum": ("mass", "length", "gravity"),
    "windtunnel": ("kappa", "zeta", "omega"),
    "oscillator": (),
}
_NONZERO = {"windtunnel": ("k",), "pendulum": (), "oscillator": ()}


@dataclass(frozen=True)
class GainMap:
    """Invertible linear map between feedback coefficients b and physical
    gains, labelled for display."""

    example_id: str
    params: tuple  # (name, value) pairs of the owning example

    def _p(self) -> dict:
        return dict(self.params)

    def gain_names(self) -> tuple:
        return {
            "oscillator": ("beta", "alpha"),
            "pendulum": ("K_p", "K_d"),
            "windtunnel": ("alpha1", "alpha0", "beta", "tau1"),
        }[self.example_id]

    def to_physical(self, b, tau: float) -> dict:
        b = np.asarray(b, dtype=float)
        if self.example_id == "oscillator":
            return {"beta": float(b[0]), "alpha": float(b[1])}
        if self.example_id == "pendulum":
            p = self._p()
            inertia = p["mass"] * p["length"] ** 2 / 12.0
            c = p["length"] / (2.0 * inertia)
            return {"K_p": float(b[0] / c), "K_d": float(b[1] / c)}
        p = self._p()
        if tau < p["tau0"]:
            raise InvalidInput(
                "validation_error",
                f"delay below physical minimum tau0 = {p['tau0']}",
            )
        alpha1 = float(b[2])
        alpha0 = float(b[1] - b[2] / p["kappa"])
        beta = float((b[0] * p["kappa"] - alpha0) / p["k"])
        return {
            "alpha1": alpha1,
            "alpha0": alpha0,
            "beta": beta,
            "tau1": float(tau - p["tau0"]),
        }

    def to_b(self, gains: dict) -> np.ndarray:
        try:
            if self.example_id == "oscillator":
                return np.array([gains["beta"], gains["alpha"]], dtype=float)
            if self.example_id == "pendulum":
                p = self._p()
                inertia = p["mass"] * p["length"] ** 2 / 12.0
                c = p["length"] / (2.0 * inertia)
                return np.array([gains["K_p"] * c, gains["K_d"] * c], dtype=float)
            p = self._p()
            g2 = gains["alpha1"]
            g1 = gains["alpha0"] + gains["alpha1"] / p["kappa"]
            g0 = (gains["beta"] * p["k"] + gains["alpha0"]) / p["kappa"]
            return np.array([g0, g1, g2], dtype=float)
        except KeyError as exc:
            raise InvalidInput(
                "validation_error", f"missing physical gain {exc}"
            ) from exc


@dataclass(frozen=True)
class ExampleSystem:
    """A catalog entry: an id plus validated physical parameters.

    The open-loop coefficients a, the feedback degree m, and the gain map
    are computed on access from the stored parameters.
    """

    id: str
    params: tuple  # sorted (name, value) pairs

    def _p(self) -> dict:
        return dict(self.params)

    @property
    def a(self) -> np.ndarray:
        p = self._p()
        if self.id == "oscillator":
            return np.array([1.0, 0.0])
        if self.id == "pendulum":
            inertia = p["mass"] * p["length"] ** 2 / 12.0
            return np.array(
                [-p["mass"] * p["gravity"] * p["length"] / (2.0 * inertia), 0.0]
            )
        w, z, kap = p["omega"], p["zeta"], p["kappa"]
        return np.array(
            [w**2 / kap, w**2 + 2.0 * z * w / kap, 2.0 * z * w + 1.0 / kap]
        )

    @property
    def m(self) -> int:
        return {"oscillator": 1, "pendulum": 1, "windtunnel": 2}[self.id]

    @property
    def gain_map(self) -> GainMap:
        return GainMap(example_id=self.id, params=self.params)

    def derived(self) -> dict:
        """Quantities recomputed from the parameters, for display."""
        out = {"a": [float(v) for v in self.a], "m": self.m, "n": len(self.a)}
        if self.id == "pendulum":
            p = self._p()
            out["inertia"] = p["mass"] * p["length"] ** 2 / 12.0
        if self.id == "windtunnel":
            out["tau0"] = self._p()["tau0"]
        return out

    def to_dict(self) -> dict:
        return {"id": self.id, "params": dict(self.params), "derived": self.derived()}


def list_examples() -> dict:
    """Catalog of example ids with parameter schemas and default-derived
    quantities, JSON-ready."""
    out = {}
    for ex_id, schema in _SCHEMAS.items():
        ex = get_example(ex_id)
        out[ex_id] = {
            "params": {
                name: {"default": default, "unit": unit, "meaning": meaning}
                for name, (default, unit, meaning) in schema.items()
            },
            "derived": ex.derived(),
            "gains": list(ex.gain_map.gain_names()),
        }
    return out


def get_example(example_id: str, **overrides) -> ExampleSystem:
    """Catalog entry by id, with optional physical-parameter overrides."""
    if example_id not in _SCHEMAS:
        raise InvalidInput(
            "unknown_example",
            f"unknown example {example_id!r}; available: {sorted(_SCHEMAS)}",
        )
    schema = _SCHEMAS[example_id]
    params = {name: default for name, (default, _, _) in schema.items()}
    for name, value in overrides.items():
        if name not in schema:
            raise InvalidInput(
                "validation_error",
                f"{example_id} has no parameter {name!r}; expected {sorted(schema)}",
            )
        params[name] = float(value)
    for name, value in params.items():
        if not isfinite(value):
            raise InvalidInput("non_finite_input", f"{name} must be finite")
    for name in _POSITIVE[example_id]:
        if params[name] <= 0:
            raise InvalidInput(
                "validation_error", f"{name} must be positive, got {params[name]}"
            )
    for name in _NONZERO[example_id]:
        if params[name] == 0:
            raise InvalidInput("validation_error", f"{name} must be nonzero")
    if example_id == "windtunnel" and params["tau0"] < 0:
        raise InvalidInput(
            "validation_error", f"tau0 must be nonnegative, got {params['tau0']}"
        )
    return ExampleSystem(id=example_id, params=tuple(sorted(params.items())))


def example_to_problem(ex: ExampleSystem):
    """Reduce a catalog entry to placement inputs: (a, m, gain_map)."""
    if not isinstance(ex, ExampleSystem):
        raise InvalidInput("validation_error", "expected an ExampleSystem")
    return ex.a, ex.m, ex.gain_map


def recover_gains(ex: ExampleSystem, placement: PlacementResult) -> dict:
    """Physical gain table for a placement computed on this example's
    coefficients."""
    if not isinstance(placement, PlacementResult):
        raise InvalidInput("validation_error", "expected a PlacementResult")
    if len(placement.qp.a) != len(ex.a) or not np.allclose(
        placement.qp.a, ex.a, rtol=1e-9, atol=1e-12
    ):
        raise InvalidInput(
            "validation_error",
            "placement was not produced for this example's coefficients",
        )
    return ex.gain_map.to_physical(placement.qp.b, placement.qp.tau)
