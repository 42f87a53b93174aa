"""
Scenario presets and JSON scenario configuration.
"""
import json
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Callable, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from pydantic import ValidationError as SchemaError

from .constraints import BarrierParams
from .errors import ParseError, ValidationError
from .guidance import RendezvousSpec, resolved_horizon
from .models import DEFAULT_LIMITS, ZAGI, Limits, VehicleParams, Wind
from .path import Path, Segment, path_from_segments, straight_path
from .trajopt import LqrWeights, SolverOptions, Weights

logger = logging.getLogger(__name__)

FIELD_WIND = Wind(-4.33, 2.5, 0.0)
TURN_RADIUS = 35.0
TURN_STRAIGHT = 1200.0
STRAIGHT_LENGTH = 6000.0
DEFAULT_STEP = 0.05

# arc length margin over v0 * T kept ahead of the UGV
PATH_MARGIN = 1.5


@dataclass(frozen=True)
class Scenario:
    name: str
    path: Path
    wind: Wind = field(default_factory=Wind)
    params: VehicleParams = ZAGI
    limits: Limits = DEFAULT_LIMITS
    spec: RendezvousSpec = field(default_factory=RendezvousSpec)
    uav_pose: Tuple[float, float, Optional[float]] = (0.0, 0.0, None)
    weights: Weights = field(default_factory=Weights)
    options: SolverOptions = field(default_factory=SolverOptions)
    step: float = DEFAULT_STEP

    def __post_init__(self):
        if not self.step > 0:
            raise ValidationError("step", "grid step must be positive")

    @cached_property
    def working_path(self) -> Path:
        """The path, extended by a terminal straight when the horizon would run past its end"""
        horizon = resolved_horizon(self.spec, self.params, self.limits)
        return self.path.extended(PATH_MARGIN * self.spec.v0 * horizon)

    @property
    def uav_initial(self) -> Dict[str, float]:
        x, y, chi = self.uav_pose
        return {"x_A": x, "y_A": y, "z_A": self.spec.z0,
                "chi_A": float(self.path.chi0) if chi is None else chi, "gamma_A": 0.0, "phi_A": 0.0}

    def with_k(self, k_aggr: float) -> "Scenario":
        return replace(self, spec=replace(self.spec, k_aggr=float(k_aggr)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scenario": self.name,
            "k_aggr": self.spec.k_aggr,
            "step": self.step,
            "wind": self.wind.to_dict(),
            "params": self.params.to_dict(),
            "limits": self.limits.to_dict(),
            "spec": {k: v for k, v in self.spec.to_dict().items() if k != "k_aggr"},
            "uav": dict(zip(("x", "y", "chi"), self.uav_pose)),
            "path": self.path.to_dict(),
            "weights": self.weights.to_dict(),
            "solver": self.options.to_dict(),
        }


def preset_straight() -> Scenario:
    """Rendezvous along a straight road heading north-east in a planar wind"""
    chi = np.pi / 4.0
    return Scenario(name="straight", path=straight_path(STRAIGHT_LENGTH, chi0=chi), wind=FIELD_WIND,
                    spec=RendezvousSpec(), uav_pose=(0.0, 0.0, chi))


def preset_turn90() -> Scenario:
    """Straight, 90 degree left turn of radius 35 m, straight"""
    segments = (Segment(TURN_STRAIGHT, 0.0),
                Segment(TURN_RADIUS * np.pi / 2.0, 1.0 / TURN_RADIUS),
                Segment(TURN_STRAIGHT, 0.0))
    return Scenario(name="turn90", path=Path(segments, 0.0, 0.0, 0.0), wind=FIELD_WIND,
                    spec=RendezvousSpec(), uav_pose=(0.0, 0.0, 0.0))


PRESETS: Dict[str, Callable[[], Scenario]] = {
    "straight": preset_straight,
    "turn90": preset_turn90,
}


def get_preset(name: str) -> Scenario:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValidationError("scenario", f"unknown scenario '{name}' (choose from {', '.join(PRESETS)})")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class WindConfig(_Section):
    wx: float = 0.0
    wy: float = 0.0
    wz: float = 0.0


class ParamsConfig(_Section):
    m: Optional[float] = None
    S: Optional[float] = None
    rho: Optional[float] = None
    g: Optional[float] = None
    C_D0: Optional[float] = None
    k_DL: Optional[float] = None


class LimitsConfig(_Section):
    v_min: Optional[float] = None
    v_max: Optional[float] = None
    nlf_min: Optional[float] = None
    nlf_max: Optional[float] = None
    gamma_min: Optional[float] = None
    gamma_max: Optional[float] = None
    u1_max: Optional[float] = None
    phi_max: Optional[float] = None
    u2_max: Optional[float] = None
    u3_max: Optional[float] = None
    a_max: Optional[float] = None
    ebar_x: Optional[float] = None
    ebar_y: Optional[float] = None
    ebar_z: Optional[float] = None
    ebar_chi: Optional[float] = None


class SpecConfig(_Section):
    z0: Optional[float] = None
    s_f: Optional[float] = None
    v0: Optional[float] = None
    vf: Optional[float] = None
    t0: Optional[float] = None
    T: Optional[float] = None


class UavConfig(_Section):
    x: Optional[float] = None
    y: Optional[float] = None
    chi: Optional[float] = None


class SegmentConfig(_Section):
    length: float
    curvature: float = 0.0


class PathConfig(_Section):
    x0: float = 0.0
    y0: float = 0.0
    chi0: float = 0.0
    segments: List[SegmentConfig]


class WeightsConfig(_Section):
    Q: Optional[List[float]] = None
    R: Optional[List[float]] = None
    P1: Optional[List[float]] = None


class BarrierConfig(_Section):
    delta: Optional[float] = None
    mu: Optional[float] = None
    shrink: Optional[float] = None
    stages: Optional[int] = None
    delta_final: Optional[float] = None


class LqrRegConfig(_Section):
    Q: List[float]
    R: List[float]
    P1: Optional[List[float]] = None


class SolverConfig(_Section):
    max_newton: Optional[int] = None
    grad_tol: Optional[float] = None
    step_tol: Optional[float] = None
    barrier: Optional[BarrierConfig] = None
    lqr_reg: Optional[LqrRegConfig] = None


class ScenarioConfig(_Section):
    """Scenario document; every section is optional and overlays the chosen preset"""
    scenario: Literal["straight", "turn90"] = "straight"
    k_aggr: Optional[float] = None
    step: Optional[float] = None
    wind: Optional[WindConfig] = None
    params: Optional[ParamsConfig] = None
    limits: Optional[LimitsConfig] = None
    spec: Optional[SpecConfig] = None
    uav: Optional[UavConfig] = None
    path: Optional[PathConfig] = None
    weights: Optional[WeightsConfig] = None
    solver: Optional[SolverConfig] = None


def _overrides(section: Optional[BaseModel]) -> Dict[str, Any]:
    if section is None:
        return {}
    return {k: v for k, v in section.model_dump().items() if v is not None}


def _build(key: str, factory: Callable[[], Any]) -> Any:
    try:
        return factory()
    except ValidationError:
        raise
    except ValueError as e:
        raise ValidationError(key, str(e))


def scenario_from_config(config: ScenarioConfig) -> Scenario:
    """Overlay a validated config document onto its preset"""
    base = get_preset(config.scenario)

    wind = base.wind if config.wind is None else _build(
        "wind", lambda: Wind(config.wind.wx, config.wind.wy, config.wind.wz))
    params = _build("params", lambda: replace(base.params, **_overrides(config.params)))
    limits = _build("limits", lambda: replace(base.limits, **_overrides(config.limits)))

    spec_fields = _overrides(config.spec)
    if config.k_aggr is not None:
        spec_fields["k_aggr"] = config.k_aggr
    spec = replace(base.spec, **spec_fields).validate(limits)

    path = base.path
    if config.path is not None:
        path = _build("path", lambda: path_from_segments(
            [seg.model_dump() for seg in config.path.segments], config.path.x0, config.path.y0, config.path.chi0))

    uav = _overrides(config.uav)
    uav_pose = (uav.get("x", base.uav_pose[0]), uav.get("y", base.uav_pose[1]),
                uav.get("chi", base.uav_pose[2] if config.path is None else None))

    w = _overrides(config.weights)
    weights = base.weights
    if w:
        # a new Q without P1 gets the default terminal weights 10 Q
        P1 = w.get("P1") if "Q" in w else w.get("P1", base.weights.P1)
        weights = _build("weights", lambda: Weights(w.get("Q", base.weights.Q), w.get("R", base.weights.R), P1))

    options = base.options
    if config.solver is not None:
        solver = config.solver
        barrier = _build("solver.barrier", lambda: replace(options.barrier, **_overrides(solver.barrier)))
        lqr_reg = None if solver.lqr_reg is None else _build(
            "solver.lqr_reg", lambda: LqrWeights(solver.lqr_reg.Q, solver.lqr_reg.R, solver.lqr_reg.P1))
        plain = {k: v for k, v in _overrides(solver).items() if k not in ("barrier", "lqr_reg")}
        options = _build("solver", lambda: replace(options, barrier=barrier, lqr_reg=lqr_reg, **plain))

    step = base.step if config.step is None else config.step
    return Scenario(name=config.scenario, path=path, wind=wind, params=params, limits=limits, spec=spec,
                    uav_pose=uav_pose, weights=weights, options=options, step=step)


def load_scenario(text: str) -> Scenario:
    """Parse and validate a JSON scenario document"""
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as e:
        raise ParseError(f"scenario config is not valid JSON: {e}")
    if not isinstance(raw, dict):
        raise ParseError("scenario config must be a JSON object")
    try:
        config = ScenarioConfig.model_validate(raw)
    except SchemaError as e:
        first = e.errors()[0]
        key = ".".join(str(part) for part in first["loc"]) or "config"
        raise ValidationError(key, first["msg"])
    scenario = scenario_from_config(config)
    logger.info("Loaded scenario '%s' (k_aggr=%.2f)", scenario.name, scenario.spec.k_aggr)
    return scenario


def load_scenario_file(filename: str) -> Scenario:
    try:
        with open(filename, "r", encoding="utf-8") as f:
            return load_scenario(f.read())
    except OSError as e:
        raise ParseError(f"cannot read scenario file {filename}: {e}")
