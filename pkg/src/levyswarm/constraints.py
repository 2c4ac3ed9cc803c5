"""Movement constraints: step clamping, boundary containment, collision handling.

The per-step pipeline gives every UAV two displacement budgets of
``max_step_size`` each: one for optimizer motion, one for collision response.
Within a budget, displacement is clamped radially about an anchor point, so a
UAV never travels more than ``max_step_size`` from its pre-phase position and
never more than twice that in a full step.  Hard separation is the one action
allowed to override the budget bookkeeping — pairwise minimum distance is a
zero-tolerance invariant — but it carries a terminal fallback (revert the
offending agents to their feasible step-start positions) that keeps both
guarantees intact simultaneously.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .world import GridConfig, Hotspot, ValidationError

_TINY = 1e-12
# Below this separation a pair counts as coincident and separation directions
# fall back to the x axis (+x for the lower index, -x for the higher).
COINCIDENT_DISTANCE = 1e-9


class ConstraintError(RuntimeError):
    """The collision resolver could not restore a feasible configuration."""


@dataclass
class ConstraintReport:
    """Constraint-activity counters, accumulated over a step or a run.

    clamped_steps and boundary_hits count motion constructions (including
    candidate positions later rejected by greedy acceptance) where the clamp
    actually changed something; collision_interventions counts agent-steps the
    collision stage displaced; zone_escapes counts dead-ground redirections.
    """

    clamped_steps: int = 0
    boundary_hits: int = 0
    collision_interventions: int = 0
    zone_escapes: int = 0

    def merge(self, other: "ConstraintReport"):
        self.clamped_steps += other.clamped_steps
        self.boundary_hits += other.boundary_hits
        self.collision_interventions += other.collision_interventions
        self.zone_escapes += other.zone_escapes


def clamp_step(displacement, max_step_size: float) -> np.ndarray:
    """Scale a displacement down to at most max_step_size, preserving direction.

    The reduced vector's Euclidean norm is <= max_step_size exactly, not just
    to rounding: after the rescale, components are nudged toward zero until the
    recomputed norm passes.  Idempotent, and the identity on vectors already
    inside the limit.
    """
    if not max_step_size > 0.0:
        raise ValidationError(f"max_step_size must be positive, got {max_step_size}")
    d = np.array(displacement, dtype=float)
    norm = float(np.hypot(d[0], d[1]))
    if norm <= max_step_size:
        return d
    scaled = d * (max_step_size / norm)
    while float(np.hypot(scaled[0], scaled[1])) > max_step_size:
        scaled = np.nextafter(scaled, 0.0)
    return scaled


def settle_within(position, anchor, budget: float) -> np.ndarray:
    """Nudge a position toward its anchor until ||position - anchor|| <= budget.

    Composing `anchor + clamp_step(...)` rounds once per component, so the
    *measured* displacement of a stored position can exceed the budget by an
    ulp even though the step vector itself was clamped exactly.  This guard
    repairs that: a few nextafter moves toward the anchor (which is inside the
    grid, so containment is preserved) make the recomputed norm pass.  The
    identity for positions already within budget.
    """
    p = np.array(position, dtype=float)
    a = np.asarray(anchor, dtype=float)
    guard = 0
    while float(np.hypot(p[0] - a[0], p[1] - a[1])) > budget:
        p = np.nextafter(p, a)
        guard += 1
        if guard > 1000:
            raise ConstraintError("settle_within failed to converge")
    return p


def clamp_boundary(position, grid: GridConfig) -> np.ndarray:
    """Project a position onto the grid box [0, width] x [0, height].

    Componentwise projection onto a box is non-expansive: for any anchor
    inside the box, the projected point is no farther from the anchor than the
    raw point was, so boundary clamping never breaks a step-size budget.
    """
    p = np.array(position, dtype=float)
    return np.clip(p, 0.0, [float(grid.width), float(grid.height)])


def safe_zone_separation(positions: np.ndarray, safe_zone_radius: float) -> np.ndarray:
    """Per-agent offsets pushing pairs closer than safe_zone_radius apart.

    One pass over pairs in (i, j) order: each agent of a violating pair
    receives a push of magnitude safe_zone_radius / 2 along the line joining
    them, away from the partner (symmetric, momentum-free); pushes from
    multiple neighbours accumulate.  A coincident pair falls back to the
    x axis: +x for the lower index, -x for the higher.
    """
    positions = np.asarray(positions, dtype=float)
    n = len(positions)
    offsets = np.zeros_like(positions)
    half = 0.5 * safe_zone_radius
    for i in range(n):
        for j in range(i + 1, n):
            delta = positions[i] - positions[j]
            d = float(np.hypot(delta[0], delta[1]))
            if d >= safe_zone_radius:
                continue
            unit = delta / d if d >= COINCIDENT_DISTANCE else np.array([1.0, 0.0])
            offsets[i] += half * unit
            offsets[j] -= half * unit
    return offsets


def potential_field_repulsion(
    positions: np.ndarray,
    collision_radius: float,
    gain: float,
    max_step_size: float,
) -> np.ndarray:
    """Repulsive-field offsets for pairs inside twice the collision radius.

    A pair at distance d < R = 2*collision_radius contributes the classic
    repulsive-potential gradient gain*(1/d - 1/R)*(1/d^2) along the joining
    line, equal and opposite on the two agents.  Near-coincident pairs
    (d < 1e-9) use the same x-axis fallback as safe-zone separation with d
    floored at 1e-9.  Each agent's accumulated offset is clamped to
    max_step_size, which also caps that blow-up.
    """
    positions = np.asarray(positions, dtype=float)
    influence = 2.0 * collision_radius
    n = len(positions)
    offsets = np.zeros_like(positions)
    for i in range(n):
        for j in range(i + 1, n):
            delta = positions[i] - positions[j]
            d = float(np.hypot(delta[0], delta[1]))
            if d >= influence:
                continue
            if d >= COINCIDENT_DISTANCE:
                unit = delta / d
                d_eff = d
            else:
                unit = np.array([1.0, 0.0])
                d_eff = COINCIDENT_DISTANCE
            magnitude = gain * (1.0 / d_eff - 1.0 / influence) / d_eff**2
            offsets[i] += magnitude * unit
            offsets[j] -= magnitude * unit
    for i in range(n):
        offsets[i] = clamp_step(offsets[i], max_step_size)
    return offsets


def escape_no_hotspot_zone(
    position: np.ndarray,
    hotspots: list[Hotspot],
    threshold_radius: float,
    max_step_size: float,
) -> np.ndarray | None:
    """Full-speed displacement toward the nearest uncovered hotspot, or None.

    Fires only when no uncovered hotspot lies within threshold_radius of the
    agent — the agent is wandering dead ground — and returns a vector of
    magnitude max_step_size aimed at the nearest uncovered hotspot.  Returns
    None when some uncovered hotspot is already close, or when every hotspot
    is covered (there is nowhere useful to send the agent).
    """
    position = np.asarray(position, dtype=float)
    uncovered = [h.position for h in hotspots if not h.covered]
    if not uncovered:
        return None
    deltas = np.asarray(uncovered) - position
    dists = np.hypot(deltas[:, 0], deltas[:, 1])
    nearest = int(np.argmin(dists))
    if dists[nearest] <= threshold_radius:
        return None
    return deltas[nearest] / dists[nearest] * max_step_size


def _within_budget(point, anchor, budget):
    if budget is None:
        return point
    offset = point - anchor
    norm = float(np.hypot(offset[0], offset[1]))
    if norm <= budget:
        return point
    return anchor + clamp_step(offset, budget)


def resolve_collisions(
    positions: np.ndarray,
    grid: GridConfig,
    collision_radius: float,
    anchors: np.ndarray | None = None,
    budget: float | None = None,
    revert_to: np.ndarray | None = None,
    margin: float = 1e-6,
    max_iter: int = 200,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Push agents apart until every pair is at least collision_radius apart.

    Violating pairs are processed in index order, each agent moving half the
    shortfall (plus a small margin) away from its partner, clamped to the grid
    and, when ``anchors``/``budget`` are given, to a displacement budget about
    each agent's anchor.  Wall- or budget-pinned agents route the remaining
    shortfall through their partner.  If the loop stalls — geometry or budgets
    leave no room — agents in violating pairs are reverted to ``revert_to``
    (their feasible step-start positions), cascading until feasible.  Without
    a revert fallback a stall raises ConstraintError.

    Returns (new_positions, touched_mask, pushes_applied).
    """
    pos = np.array(positions, dtype=float)
    n = len(pos)
    target = collision_radius * (1.0 + margin)
    touched = np.zeros(n, dtype=bool)
    reverted = np.zeros(n, dtype=bool)
    pushes = 0

    def violating_pairs():
        out = []
        for i in range(n):
            for j in range(i + 1, n):
                delta = pos[i] - pos[j]
                if float(np.hypot(delta[0], delta[1])) < collision_radius:
                    out.append((i, j))
        return out

    fallback_cycle = (np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    for iteration in range(max_iter):
        pairs = violating_pairs()
        if not pairs:
            return pos, touched, pushes
        before = pos.copy()
        for i, j in pairs:
            delta = pos[i] - pos[j]
            d = float(np.hypot(delta[0], delta[1]))
            if d >= target:
                continue
            if d > _TINY:
                unit = delta / d
            else:
                unit = fallback_cycle[iteration % len(fallback_cycle)]
            need = target - d
            movers = []
            if not reverted[i]:
                movers.append((i, unit))
            if not reverted[j]:
                movers.append((j, -unit))
            if not movers:
                continue
            share = need / len(movers)
            for idx, direction in movers:
                proposal = pos[idx] + direction * share
                proposal = clamp_boundary(proposal, grid)
                if anchors is not None:
                    proposal = _within_budget(proposal, anchors[idx], budget)
                if not np.array_equal(proposal, pos[idx]):
                    pos[idx] = proposal
                    touched[idx] = True
                    pushes += 1
            # If clamping pinned one side, let the freer partner absorb the rest.
            delta = pos[i] - pos[j]
            d = float(np.hypot(delta[0], delta[1]))
            if d < target and d > _TINY:
                unit = delta / d
                for idx, direction in movers:
                    proposal = clamp_boundary(pos[idx] + direction * (target - d), grid)
                    if anchors is not None:
                        proposal = _within_budget(proposal, anchors[idx], budget)
                    if not np.array_equal(proposal, pos[idx]):
                        pos[idx] = proposal
                        touched[idx] = True
                        pushes += 1
                    delta = pos[i] - pos[j]
                    d = float(np.hypot(delta[0], delta[1]))
                    if d >= target:
                        break
        if np.max(np.abs(pos - before)) < 1e-15:
            # No progress is possible under the current pins; fall back.
            if revert_to is None:
                raise ConstraintError(
                    "cannot separate agents to the collision radius within the "
                    "grid and step budget"
                )
            for i, j in violating_pairs():
                for idx in (i, j):
                    if not reverted[idx]:
                        pos[idx] = np.array(revert_to[idx], dtype=float)
                        reverted[idx] = True
                        touched[idx] = True
    if violating_pairs():
        if revert_to is not None:
            for idx in range(n):
                if not reverted[idx]:
                    pos[idx] = np.array(revert_to[idx], dtype=float)
                    touched[idx] = True
            if not violating_pairs():
                return pos, touched, pushes
        raise ConstraintError(
            f"collision resolution did not converge in {max_iter} iterations"
        )
    return pos, touched, pushes
