"""Swarm optimizers: coverage fitness, ABC and PSO baselines, Levy-flight hybrid.

Each optimizer computes *tentative* post-motion positions for one step, with
every agent's net motion clamped to ``max_step_size`` about its step-start
position and projected into the grid.  Collision response (soft repulsion and
hard separation) runs afterwards in the harness, on top of these proposals.
Greedy acceptance inside a step therefore compares fitness at candidate
positions before collision response; the fitness an agent carries between
steps is always re-evaluated at its final, fully constrained position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import constraints
from .rng import RandomSource, levy_step
from .world import Algorithm, Hotspot, ScenarioConfig, SwarmState, ValidationError


class FitnessField:
    """Coverage fitness over the currently uncovered hotspots.

    value(x) = sum of weights of uncovered hotspots within coverage_radius of
    x, plus (optionally) a small proximity shaping term
    epsilon * sum_k w_k / (1 + d_k) over the uncovered hotspots, which gives
    hill-climbing acceptance rules a gradient to follow between coverage
    plateaus.  Covered hotspots contribute nothing.
    """

    __slots__ = ("positions", "weights", "coverage_radius", "shaping", "epsilon")

    def __init__(self, hotspots, coverage_radius, shaping=False, epsilon=0.01):
        uncovered = [h for h in hotspots if not h.covered]
        self.positions = (
            np.array([h.position for h in uncovered], dtype=float)
            if uncovered
            else np.zeros((0, 2))
        )
        self.weights = np.array([h.weight for h in uncovered], dtype=float)
        self.coverage_radius = float(coverage_radius)
        self.shaping = bool(shaping)
        self.epsilon = float(epsilon)

    @classmethod
    def from_config(cls, hotspots, config: ScenarioConfig) -> "FitnessField":
        return cls(
            hotspots,
            config.constraints.coverage_radius,
            shaping=config.params.shaping,
            epsilon=config.params.shaping_epsilon,
        )

    def value(self, position) -> float:
        if self.weights.size == 0:
            return 0.0
        dx = self.positions[:, 0] - float(position[0])
        dy = self.positions[:, 1] - float(position[1])
        d = np.hypot(dx, dy)
        total = float(self.weights[d <= self.coverage_radius].sum())
        if self.shaping:
            total += self.epsilon * float(np.sum(self.weights / (1.0 + d)))
        return total


def coverage_fitness(position, hotspots, coverage_radius, shaping=False, epsilon=0.01) -> float:
    """One-shot fitness evaluation; see FitnessField."""
    return FitnessField(hotspots, coverage_radius, shaping=shaping, epsilon=epsilon).value(position)


def nectar_probabilities(fitnesses) -> np.ndarray:
    """Selection weights proportional to fitness; uniform when all are zero."""
    f = np.asarray(fitnesses, dtype=float)
    if f.size == 0:
        raise ValidationError("nectar_probabilities needs at least one fitness value")
    if np.any(f < 0.0):
        raise ValidationError("fitness values must be non-negative")
    total = float(f.sum())
    if total <= 0.0:
        return np.full(f.size, 1.0 / f.size)
    return f / total


def adaptive_levy_probability(fitness: float, global_best: float, sensitivity: float) -> float:
    """Sigmoid gate in (0, 1): agents near the global best move more eagerly."""
    return 1.0 / (1.0 + math.exp(-sensitivity * (fitness - global_best)))


def roulette_pick(src: RandomSource, probabilities: np.ndarray) -> int:
    """Sample an index from a probability vector using one uniform draw."""
    u = float(src.uniform(0.0, 1.0))
    cumulative = np.cumsum(probabilities)
    return min(int(np.searchsorted(cumulative, u, side="right")), len(probabilities) - 1)


def abc_candidate(src: RandomSource, positions: np.ndarray, i: int) -> np.ndarray:
    """Classic neighbour-mixing move: x_i + phi * (x_i - x_k), phi ~ U(-1,1)^2."""
    n = len(positions)
    if n < 2:
        return positions[i].copy()
    k = int(src.integers(0, n - 1))
    if k >= i:
        k += 1
    phi = src.uniform(-1.0, 1.0, 2)
    return positions[i] + phi * (positions[i] - positions[k])


@dataclass
class StepProposal:
    """Tentative post-motion positions plus per-step event bookkeeping."""

    positions: np.ndarray
    transit_legs: int = 0
    report: constraints.ConstraintReport = None
    # Agents whose step was goal-directed (a committed relocation leg or a
    # dead-ground escape); the stagnation counter does not tick for them.
    guided: np.ndarray = None
    # Agents whose sensor is active this step.  Agents mid-traversal of a
    # committed relocation fly dark and scan only on arrival, so one long
    # flight contributes one sensing sample at its endpoint.
    scanning: np.ndarray = None

    def __post_init__(self):
        if self.guided is None:
            self.guided = np.zeros(len(self.positions), dtype=bool)
        if self.scanning is None:
            self.scanning = np.ones(len(self.positions), dtype=bool)
        if self.report is None:
            self.report = constraints.ConstraintReport()


def _constrain_motion(raw_target, anchor, config: ScenarioConfig, report=None) -> np.ndarray:
    max_step = config.constraints.max_step_size
    raw_step = raw_target - anchor
    step = constraints.clamp_step(raw_step, max_step)
    unbounded = anchor + step
    position = constraints.clamp_boundary(unbounded, config.grid)
    if report is not None:
        if not np.array_equal(step, raw_step):
            report.clamped_steps += 1
        if not np.array_equal(position, unbounded):
            report.boundary_hits += 1
    return constraints.settle_within(position, anchor, max_step)


def propose_abc(
    swarm: SwarmState, fitness: FitnessField, config: ScenarioConfig, rngs: list[RandomSource]
) -> StepProposal:
    """Employed + onlooker phases with strict greedy acceptance.

    Employed: every agent proposes a neighbour-mixing candidate and accepts it
    only on a strict fitness improvement.  Onlooker: one roulette slot per
    agent reinforces fitness-proportionally chosen agents with further
    candidates under the same acceptance rule.
    """
    anchors = swarm.positions()
    tentative = anchors.copy()
    proposal = StepProposal(positions=tentative)
    values = np.array([fitness.value(p) for p in tentative])

    for i in range(len(tentative)):
        raw = abc_candidate(rngs[i], tentative, i)
        candidate = _constrain_motion(raw, anchors[i], config, proposal.report)
        candidate_value = fitness.value(candidate)
        if candidate_value > values[i]:
            tentative[i] = candidate
            values[i] = candidate_value

    probs = nectar_probabilities(values)
    for slot in range(len(tentative)):
        s = roulette_pick(rngs[slot], probs)
        raw = abc_candidate(rngs[slot], tentative, s)
        candidate = _constrain_motion(raw, anchors[s], config, proposal.report)
        candidate_value = fitness.value(candidate)
        if candidate_value > values[s]:
            tentative[s] = candidate
            values[s] = candidate_value

    return proposal


def propose_pso(
    swarm: SwarmState, fitness: FitnessField, config: ScenarioConfig, rngs: list[RandomSource]
) -> StepProposal:
    """Inertial velocity update toward personal and global bests.

    After clamping and containment the stored velocity is rewritten to the
    displacement actually applied, so momentum never accumulates beyond what
    the constraints allow.
    """
    pso = config.params.pso
    anchors = swarm.positions()
    tentative = anchors.copy()
    proposal = StepProposal(positions=tentative)
    for i, uav in enumerate(swarm.uavs):
        r1 = rngs[i].uniform(0.0, 1.0, 2)
        r2 = rngs[i].uniform(0.0, 1.0, 2)
        velocity = (
            pso.inertia * uav.velocity
            + pso.cognitive * r1 * (uav.personal_best - uav.position)
            + pso.social * r2 * (swarm.global_best_position - uav.position)
        )
        new_position = _constrain_motion(uav.position + velocity, anchors[i], config, proposal.report)
        uav.velocity = new_position - uav.position
        tentative[i] = new_position
    return proposal


def _nearest_better_neighbor(positions: np.ndarray, values: np.ndarray, i: int) -> int | None:
    better = np.flatnonzero(values > values[i])
    if better.size == 0:
        return None
    deltas = positions[better] - positions[i]
    return int(better[np.argmin(np.hypot(deltas[:, 0], deltas[:, 1]))])


def propose_hybrid(
    swarm: SwarmState,
    fitness: FitnessField,
    config: ScenarioConfig,
    rngs: list[RandomSource],
    hotspots: list[Hotspot],
) -> StepProposal:
    """One motion step of the Levy-flight hybrid.

    A Levy draw is a flight length, not a teleport: agents travel at most
    max_step_size per step, so a draw whose boundary-clamped destination lies
    farther than one step becomes a committed waypoint the agent traverses
    over consecutive steps.  Per agent, in order: a pending relocation (long
    Levy flight or scout reset) consumes the whole step; otherwise dead-ground
    escape (full-speed move toward the nearest uncovered hotspot when none is
    within the threshold radius); otherwise a fresh Levy flight plus an
    explore/exploit nudge — agents strictly above the median fitness step away
    from their nearest better neighbour, the rest drift toward the global
    best.  An onlooker pass then draws a Bernoulli per free agent (probability
    = its nectar share of current fitness, or the sigmoid gate when
    adaptive_lambda is set) and gives selected agents a fresh one-step Levy
    move kept only under strict greedy acceptance.  All realized positions
    stay within the per-step motion budget about the agent's step-start
    position.
    """
    params = config.params
    cons = config.constraints
    anchors = swarm.positions()
    tentative = anchors.copy()
    # Balancing and nectar shares key on each agent's last realized fitness
    # (the reward credited for its previous move), not a re-evaluation at the
    # anchor: once a hotspot is marked, standing next to it scores nothing.
    values = np.array([uav.fitness for uav in swarm.uavs])
    median_value = float(np.median(values))
    proposal = StepProposal(positions=tentative)

    in_transit = np.array([uav.transit_target is not None for uav in swarm.uavs])
    for i, uav in enumerate(swarm.uavs):
        if in_transit[i]:
            continue
        escape = constraints.escape_no_hotspot_zone(
            anchors[i], hotspots, cons.no_hotspot_threshold_radius, cons.max_step_size
        )
        if escape is not None:
            proposal.report.zone_escapes += 1
            proposal.guided[i] = True
            tentative[i] = _constrain_motion(anchors[i] + escape, anchors[i], config, proposal.report)
            continue
        flight = levy_step(
            rngs[i], params.levy_weight, params.levy_beta, normalized=params.mantegna_normalized
        )
        raw = anchors[i] + flight.vector
        if values[i] > median_value:
            j = _nearest_better_neighbor(anchors, values, i)
            if j is not None:
                raw = raw + params.exploit_sign * params.exploit_coeff * (anchors[i] - anchors[j])
        else:
            raw = raw + params.explore_coeff * (swarm.global_best_position - anchors[i])
        raw = np.asarray(raw, dtype=float)
        waypoint = constraints.clamp_boundary(raw, config.grid)
        if not np.array_equal(waypoint, raw):
            proposal.report.boundary_hits += 1
        delta = waypoint - anchors[i]
        if float(np.hypot(delta[0], delta[1])) > cons.max_step_size:
            # The flight outruns one step: commit to the waypoint and start
            # traversing below.
            uav.transit_target = waypoint
            in_transit[i] = True
        else:
            tentative[i] = waypoint

    # Relocation legs: committed waypoints (long Levy flights and scout
    # resets) are approached at full speed with the sensor off, landing
    # exactly — and scanning — once the target is within one step.
    for i, uav in enumerate(swarm.uavs):
        if uav.transit_target is None:
            continue
        proposal.transit_legs += 1
        proposal.guided[i] = True
        delta = uav.transit_target - anchors[i]
        if float(np.hypot(delta[0], delta[1])) <= cons.max_step_size:
            tentative[i] = uav.transit_target.copy()
            uav.transit_target = None
        else:
            proposal.scanning[i] = False
            proposal.report.clamped_steps += 1
            tentative[i] = constraints.settle_within(
                anchors[i] + constraints.clamp_step(delta, cons.max_step_size),
                anchors[i],
                cons.max_step_size,
            )

    # Onlooker reinforcement: a Bernoulli per agent gates an extra Levy move,
    # kept only when it improves the fitness of that agent's tentative
    # position under the current uncovered set.
    probs = nectar_probabilities(values)
    for i in range(len(tentative)):
        if in_transit[i]:
            continue
        if params.adaptive_lambda:
            gate = adaptive_levy_probability(
                values[i], swarm.global_best_fitness, params.sigma_sensitivity
            )
        else:
            gate = float(probs[i])
        if float(rngs[i].uniform(0.0, 1.0)) >= gate:
            continue
        _reinforce(tentative, i, anchors, fitness, config, rngs[i], proposal.report)

    return proposal


def _reinforce(tentative, i, anchors, fitness, config, src, report=None):
    params = config.params
    flight = levy_step(
        src, params.levy_weight, params.levy_beta, normalized=params.mantegna_normalized
    )
    candidate = _constrain_motion(tentative[i] + flight.vector, anchors[i], config, report)
    if fitness.value(candidate) > fitness.value(tentative[i]):
        tentative[i] = candidate


def propose_step(
    swarm: SwarmState,
    fitness: FitnessField,
    config: ScenarioConfig,
    rngs: list[RandomSource],
    hotspots: list[Hotspot],
) -> StepProposal:
    if config.algorithm is Algorithm.ABC:
        return propose_abc(swarm, fitness, config, rngs)
    if config.algorithm is Algorithm.PSO:
        return propose_pso(swarm, fitness, config, rngs)
    return propose_hybrid(swarm, fitness, config, rngs, hotspots)
