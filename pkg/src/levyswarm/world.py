"""Grid world, hotspots, swarm state, scenario configuration and generators.

Agents move in the continuous domain [0, width] x [0, height]; the integer
cell grid exists only for heatmap binning.  Scenario generation is a pure
function of (kind, n_hotspots, seed, grid): identical inputs reproduce the
hotspot list bit for bit.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .rng import SCENARIO_STREAM, RandomSource


class ValidationError(ValueError):
    """A configuration value violates its documented invariant."""


class Algorithm(str, enum.Enum):
    ABC = "abc"
    PSO = "pso"
    HYBRID_ABC_LEVY = "hybrid-abc-levy"


_ALGORITHM_ALIASES = {
    "abc": Algorithm.ABC,
    "pso": Algorithm.PSO,
    "hybrid": Algorithm.HYBRID_ABC_LEVY,
    "hybrid-abc-levy": Algorithm.HYBRID_ABC_LEVY,
    "hybrid_abc_levy": Algorithm.HYBRID_ABC_LEVY,
    "hybridabclevy": Algorithm.HYBRID_ABC_LEVY,
}


def parse_algorithm(name) -> Algorithm:
    if isinstance(name, Algorithm):
        return name
    try:
        return _ALGORITHM_ALIASES[str(name).strip().lower()]
    except KeyError:
        raise ValidationError(
            f"unknown algorithm {name!r}; expected one of abc, pso, hybrid-abc-levy"
        ) from None


class ScenarioKind(str, enum.Enum):
    UNIFORM_RANDOM = "uniform"
    TWO_CLUSTER = "twocluster"
    CUSTOM = "custom"


@dataclass(frozen=True)
class GridConfig:
    width: int = 100
    height: int = 100

    def validate(self):
        if not (isinstance(self.width, int) and isinstance(self.height, int)):
            raise ValidationError("grid width/height must be integers")
        if self.width < 1 or self.height < 1:
            raise ValidationError(f"grid must be at least 1x1, got {self.width}x{self.height}")

    def contains(self, position) -> bool:
        x, y = float(position[0]), float(position[1])
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height


@dataclass
class Hotspot:
    position: np.ndarray
    weight: float = 1.0
    covered: bool = False

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)


@dataclass
class PsoParams:
    inertia: float = 0.7
    cognitive: float = 1.5
    social: float = 1.5


@dataclass
class AlgorithmParams:
    levy_weight: float = 3.0
    # Cauchy-tailed flights: long relocations are common enough that the
    # flight-length scale (levy_weight) matters at the 100x100 benchmark
    # scale.  Lighter tails (e.g. the textbook 1.5) make nearly every draw a
    # single-step hop, which washes out the weight sweep.
    levy_beta: float = 1.0
    explore_coeff: float = 0.02
    exploit_coeff: float = 0.02
    adaptive_lambda: bool = False
    sigma_sensitivity: float = 1.0
    pso: PsoParams = field(default_factory=PsoParams)
    stagnation_limit: int = 50
    abc_limit_neighbors: int | None = None
    # Optional proximity shaping of the objective (off by default: the plain
    # coverage sum is the benchmark objective for every algorithm).
    shaping: bool = False
    shaping_epsilon: float = 0.01
    mantegna_normalized: bool = True
    # +1 nudges a high-fitness UAV away from its better neighbor (the update
    # as written); -1 flips it to the attractive variant.
    exploit_sign: int = 1

    def validate(self):
        if not 0.0 < self.levy_beta <= 2.0:
            raise ValidationError(f"levy_beta must lie in (0, 2], got {self.levy_beta}")
        if not self.levy_weight > 0.0:
            raise ValidationError(f"levy_weight must be positive, got {self.levy_weight}")
        if self.stagnation_limit < 1:
            raise ValidationError(f"stagnation_limit must be >= 1, got {self.stagnation_limit}")
        if not self.sigma_sensitivity > 0.0:
            raise ValidationError("sigma_sensitivity must be positive")
        if self.shaping and not self.shaping_epsilon > 0.0:
            raise ValidationError("shaping_epsilon must be positive when shaping is on")
        if self.abc_limit_neighbors is not None and self.abc_limit_neighbors < 1:
            raise ValidationError("abc_limit_neighbors must be >= 1 when set")
        if self.exploit_sign not in (1, -1):
            raise ValidationError("exploit_sign must be +1 or -1")


@dataclass
class ConstraintParams:
    max_step_size: float = 5.0
    safe_zone_radius: float = 2.0
    coverage_radius: float = 3.0
    collision_radius: float = 1.0
    potential_field_gain: float = 1.0
    no_hotspot_threshold_radius: float = 15.0

    def validate(self):
        if not self.max_step_size > 0.0:
            raise ValidationError("max_step_size must be positive")
        if not self.coverage_radius > 0.0:
            raise ValidationError("coverage_radius must be positive")
        if not 0.0 < self.collision_radius <= self.safe_zone_radius:
            raise ValidationError(
                "collision_radius must satisfy 0 < collision_radius <= safe_zone_radius, "
                f"got {self.collision_radius} vs {self.safe_zone_radius}"
            )
        if not self.potential_field_gain > 0.0:
            raise ValidationError("potential_field_gain must be positive")
        if not self.no_hotspot_threshold_radius > 0.0:
            raise ValidationError("no_hotspot_threshold_radius must be positive")


@dataclass
class UavState:
    position: np.ndarray
    fitness: float = 0.0
    stagnation: int = 0
    # Reference value for the stagnation counter: the best fitness this agent
    # has observed in the run.  Doubles as the PSO personal-best fitness.
    best_fitness: float = -math.inf
    personal_best: np.ndarray | None = None
    velocity: np.ndarray | None = None
    # Active relocation waypoint: set while the agent is committed to a
    # multi-step traversal (a long Levy flight or a scout reset), cleared on
    # arrival.  The agent flies toward it at the per-step speed cap.
    transit_target: np.ndarray | None = None

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)


@dataclass
class SwarmState:
    uavs: list[UavState]
    global_best_position: np.ndarray
    global_best_fitness: float = -math.inf
    step: int = 0
    covered_count: int = 0

    def observe(self, position: np.ndarray, fitness: float):
        """Fold one fitness evaluation into the running global best."""
        if fitness > self.global_best_fitness:
            self.global_best_fitness = fitness
            self.global_best_position = np.array(position, dtype=float)

    def positions(self) -> np.ndarray:
        return np.array([u.position for u in self.uavs])


@dataclass
class ScenarioConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    hotspots: list[Hotspot] = field(default_factory=list)
    n_uavs: int = 5
    start_position: np.ndarray = field(default_factory=lambda: np.array([50.0, 0.0]))
    algorithm: Algorithm = Algorithm.HYBRID_ABC_LEVY
    params: AlgorithmParams = field(default_factory=AlgorithmParams)
    constraints: ConstraintParams = field(default_factory=ConstraintParams)
    seed: int = 0
    max_steps: int = 5000
    dt: float = 0.5
    scenario_id: str = "custom"

    def __post_init__(self):
        self.start_position = np.asarray(self.start_position, dtype=float)
        self.algorithm = parse_algorithm(self.algorithm)

    def validate(self):
        self.grid.validate()
        self.params.validate()
        self.constraints.validate()
        if not self.hotspots:
            raise ValidationError("scenario needs at least one hotspot")
        for i, h in enumerate(self.hotspots):
            if not self.grid.contains(h.position):
                raise ValidationError(
                    f"hotspot {i} at ({h.position[0]}, {h.position[1]}) lies outside the "
                    f"{self.grid.width}x{self.grid.height} grid"
                )
            if not h.weight > 0.0:
                raise ValidationError(f"hotspot {i} weight must be positive, got {h.weight}")
        if not self.grid.contains(self.start_position):
            raise ValidationError("start_position lies outside the grid")
        if self.n_uavs < 1:
            raise ValidationError(f"n_uavs must be >= 1, got {self.n_uavs}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.max_steps < 1:
            raise ValidationError(f"max_steps must be >= 1, got {self.max_steps}")
        if not self.dt > 0.0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.params.shaping:
            total_w = sum(h.weight for h in self.hotspots)
            min_w = min(h.weight for h in self.hotspots)
            if not self.params.shaping_epsilon * total_w < min_w:
                raise ValidationError(
                    "shaping term must stay below the smallest coverage increment: "
                    f"epsilon*sum(w)={self.params.shaping_epsilon * total_w:.6g} "
                    f"vs min(w)={min_w:.6g}"
                )
        return self


def make_swarm(config: ScenarioConfig) -> SwarmState:
    """All UAVs at the start position; separation happens in the run pipeline."""
    uavs = []
    for _ in range(config.n_uavs):
        uav = UavState(position=config.start_position.copy())
        if config.algorithm is Algorithm.PSO:
            uav.personal_best = config.start_position.copy()
            uav.velocity = np.zeros(2)
        uavs.append(uav)
    return SwarmState(uavs=uavs, global_best_position=config.start_position.copy())


# --- scenario generators ---------------------------------------------------

# TwoCluster geometry: an easy band near the start edge plus a compact far
# cluster, the layout on which plain ABC/PSO stall in the near band.
NEAR_BAND_FRACTION = 0.3
FAR_CENTER_FRACTION = (0.5, 0.9)
FAR_RADIUS_FRACTION = 0.1


def make_scenario(
    kind: ScenarioKind | str,
    n_hotspots: int,
    seed: int,
    grid: GridConfig = GridConfig(),
    custom_hotspots: list[Hotspot] | None = None,
    near_band_fraction: float = NEAR_BAND_FRACTION,
    far_center_fraction: tuple[float, float] = FAR_CENTER_FRACTION,
    far_radius_fraction: float = FAR_RADIUS_FRACTION,
    **config_overrides,
) -> ScenarioConfig:
    """Build a scenario of the given kind.

    uniform:    n i.i.d. uniform hotspots over the grid interior.
    twocluster: ceil(n/2) uniform in the near band y <= near_band_fraction*height,
                floor(n/2) in a disc of radius far_radius_fraction*min(w,h)
                centered at the far fractions of the grid.  Near hotspots come
                first in the list, far-cluster hotspots last.
    custom:     pass-through of custom_hotspots.
    """
    kind = ScenarioKind(kind)
    grid.validate()
    if kind is ScenarioKind.CUSTOM:
        if not custom_hotspots:
            raise ValidationError("custom scenario requires a non-empty hotspot list")
        hotspots = [replace(h, position=np.array(h.position, dtype=float)) for h in custom_hotspots]
    else:
        if n_hotspots < 1:
            raise ValidationError(f"n_hotspots must be >= 1, got {n_hotspots}")
        src = RandomSource(seed=seed, stream_id=SCENARIO_STREAM)
        w, h = float(grid.width), float(grid.height)
        if kind is ScenarioKind.UNIFORM_RANDOM:
            pts = src.uniform(0.0, 1.0, (n_hotspots, 2)) * np.array([w, h])
        else:
            n_near = (n_hotspots + 1) // 2
            n_far = n_hotspots // 2
            near = src.uniform(0.0, 1.0, (n_near, 2)) * np.array([w, near_band_fraction * h])
            center = np.array([far_center_fraction[0] * w, far_center_fraction[1] * h])
            radius = far_radius_fraction * min(w, h)
            angles = src.uniform(0.0, 2.0 * math.pi, n_far)
            radii = radius * np.sqrt(src.uniform(0.0, 1.0, n_far))
            far = center + np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
            pts = np.vstack([near, far]) if n_far else near
        hotspots = [Hotspot(position=p) for p in pts]
    config = ScenarioConfig(grid=grid, hotspots=hotspots, seed=seed, **config_overrides)
    config.validate()
    return config


def two_cluster_far_indices(n_hotspots: int) -> list[int]:
    """Indices of the far-cluster hotspots in a twocluster scenario."""
    return list(range((n_hotspots + 1) // 2, n_hotspots))


def mark_coverage(
    swarm: SwarmState,
    hotspots: list[Hotspot],
    coverage_radius: float,
    scanning: np.ndarray | None = None,
) -> list[int]:
    """Flip uncovered hotspots within coverage_radius of any scanning UAV.

    Returns the indices newly covered.  ``scanning`` masks which agents have
    an active sensor this step (default: all); agents mid-traversal of a
    committed relocation fly dark and only scan on arrival.
    """
    if not coverage_radius > 0.0:
        raise ValidationError("coverage_radius must be positive")
    positions = swarm.positions()
    if scanning is not None:
        positions = positions[np.asarray(scanning, dtype=bool)]
    newly = []
    if len(positions):
        for k, hot in enumerate(hotspots):
            if hot.covered:
                continue
            d = np.min(np.hypot(*(positions - hot.position).T))
            if d <= coverage_radius:
                hot.covered = True
                newly.append(k)
    swarm.covered_count = sum(1 for h in hotspots if h.covered)
    return newly


PRESET_KINDS = {
    "uniform20": (ScenarioKind.UNIFORM_RANDOM, 20),
    "twocluster20": (ScenarioKind.TWO_CLUSTER, 20),
}


def preset_scenario(name: str, seed: int, **config_overrides) -> ScenarioConfig:
    """Named benchmark layout; the seed drives both hotspot placement and dynamics."""
    try:
        kind, n_hotspots = PRESET_KINDS[name]
    except KeyError:
        raise ValidationError(
            f"unknown preset {name!r}; expected one of {sorted(PRESET_KINDS)}"
        ) from None
    config_overrides.setdefault("scenario_id", name)
    return make_scenario(kind, n_hotspots, seed, **config_overrides)


# --- scenario file I/O -----------------------------------------------------

_PARAM_KEYS = {
    "levy_weight", "levy_beta", "explore_coeff", "exploit_coeff", "adaptive_lambda",
    "sigma_sensitivity", "pso", "stagnation_limit", "abc_limit_neighbors",
    "shaping", "shaping_epsilon", "mantegna_normalized", "exploit_sign",
}
_CONSTRAINT_KEYS = {
    "max_step_size", "safe_zone_radius", "coverage_radius", "collision_radius",
    "potential_field_gain", "no_hotspot_threshold_radius",
}
_TOP_KEYS = {
    "grid", "hotspots", "kind", "n_hotspots", "n_uavs", "start", "algorithm",
    "params", "constraints", "seed", "max_steps", "dt", "scenario_id",
}


def scenario_from_dict(data: dict) -> ScenarioConfig:
    """Parse the scenario JSON schema; unknown keys are validation errors."""
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ValidationError(f"unknown scenario keys: {sorted(unknown)}")
    if "hotspots" not in data and "kind" not in data:
        raise ValidationError("scenario must give either 'hotspots' or ('kind', 'n_hotspots')")

    grid = GridConfig(**data.get("grid", {}))
    params_data = dict(data.get("params", {}))
    unknown = set(params_data) - _PARAM_KEYS
    if unknown:
        raise ValidationError(f"unknown params keys: {sorted(unknown)}")
    if "pso" in params_data:
        params_data["pso"] = PsoParams(**params_data["pso"])
    params = AlgorithmParams(**params_data)

    constraints_data = dict(data.get("constraints", {}))
    unknown = set(constraints_data) - _CONSTRAINT_KEYS
    if unknown:
        raise ValidationError(f"unknown constraints keys: {sorted(unknown)}")
    constraints = ConstraintParams(**constraints_data)

    overrides = dict(
        n_uavs=int(data.get("n_uavs", 5)),
        algorithm=parse_algorithm(data.get("algorithm", Algorithm.HYBRID_ABC_LEVY)),
        params=params,
        constraints=constraints,
        max_steps=int(data.get("max_steps", 5000)),
        dt=float(data.get("dt", 0.5)),
        scenario_id=str(data.get("scenario_id", "custom")),
    )
    if "start" in data:
        overrides["start_position"] = np.array(data["start"], dtype=float)
    seed = int(data.get("seed", 0))

    if "hotspots" in data:
        hotspots = []
        for i, entry in enumerate(data["hotspots"]):
            try:
                pos = np.array([entry["x"], entry["y"]], dtype=float)
            except (KeyError, TypeError):
                raise ValidationError(f"hotspot {i} must be an object with x and y") from None
            hotspots.append(Hotspot(position=pos, weight=float(entry.get("weight", 1.0))))
        config = make_scenario(
            ScenarioKind.CUSTOM, len(hotspots), seed, grid,
            custom_hotspots=hotspots, **overrides,
        )
    else:
        kind = ScenarioKind(str(data["kind"]).lower())
        config = make_scenario(kind, int(data.get("n_hotspots", 20)), seed, grid, **overrides)
    return config


def scenario_to_dict(config: ScenarioConfig) -> dict:
    return {
        "grid": {"width": config.grid.width, "height": config.grid.height},
        "hotspots": [
            {"x": float(h.position[0]), "y": float(h.position[1]), "weight": h.weight}
            for h in config.hotspots
        ],
        "n_uavs": config.n_uavs,
        "start": [float(config.start_position[0]), float(config.start_position[1])],
        "algorithm": config.algorithm.value,
        "params": {
            "levy_weight": config.params.levy_weight,
            "levy_beta": config.params.levy_beta,
            "explore_coeff": config.params.explore_coeff,
            "exploit_coeff": config.params.exploit_coeff,
            "adaptive_lambda": config.params.adaptive_lambda,
            "sigma_sensitivity": config.params.sigma_sensitivity,
            "pso": {
                "inertia": config.params.pso.inertia,
                "cognitive": config.params.pso.cognitive,
                "social": config.params.pso.social,
            },
            "stagnation_limit": config.params.stagnation_limit,
            "abc_limit_neighbors": config.params.abc_limit_neighbors,
            "shaping": config.params.shaping,
            "shaping_epsilon": config.params.shaping_epsilon,
            "mantegna_normalized": config.params.mantegna_normalized,
            "exploit_sign": config.params.exploit_sign,
        },
        "constraints": {
            "max_step_size": config.constraints.max_step_size,
            "safe_zone_radius": config.constraints.safe_zone_radius,
            "coverage_radius": config.constraints.coverage_radius,
            "collision_radius": config.constraints.collision_radius,
            "potential_field_gain": config.constraints.potential_field_gain,
            "no_hotspot_threshold_radius": config.constraints.no_hotspot_threshold_radius,
        },
        "seed": config.seed,
        "max_steps": config.max_steps,
        "dt": config.dt,
        "scenario_id": config.scenario_id,
    }


def load_scenario(path) -> ScenarioConfig:
    with open(path) as f:
        data = json.load(f)
    config = scenario_from_dict(data)
    if config.scenario_id == "custom":
        import os

        config.scenario_id = os.path.splitext(os.path.basename(str(path)))[0]
    return config


def save_scenario(config: ScenarioConfig, path):
    with open(path, "w") as f:
        json.dump(scenario_to_dict(config), f, indent=2)
        f.write("\n")
