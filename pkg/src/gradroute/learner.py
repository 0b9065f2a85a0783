"""Online policy-gradient learner state, one instance per router.

Per tick: the log-policy gradients of the tick's routing decisions are
folded into an exponentially discounted eligibility trace
(z <- beta*z + sum of gradients), and the globally shared tick reward is
then applied as theta <- theta + gamma * r * z. Several decisions in one
tick accumulate additively into the trace.

By default the reward of tick t multiplies the trace *after* tick-t
decisions were folded in, so a penalty incurred in the same tick as the
decision that caused it (e.g. a drop) credits that decision. Set
credit_current_tick=False to apply the reward against the pre-decision
trace instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .policy import ParamTable


class StepSchedule(Enum):
    CONSTANT = "constant"


@dataclass(frozen=True)
class LearnerConfig:
    beta: float = 0.99
    gamma: float = 1e-5
    schedule: StepSchedule = StepSchedule.CONSTANT
    credit_current_tick: bool = True

    def validate(self) -> None:
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must be in [0, 1), got {self.beta}")
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


class EligibilityTrace:
    """Discounted gradient accumulator shaped exactly like a ParamTable.

    `active` tracks rows that ever received a gradient; rows outside it
    are exactly zero, so decay and parameter updates may skip them.
    """

    __slots__ = ("rows", "active")

    def __init__(self, table: ParamTable):
        self.rows: dict[int, list[float]] = {
            y: [0.0] * table.n_links for y in table.rows
        }
        self.active: set[int] = set()

    def as_dict(self) -> dict[int, list[float]]:
        return {y: list(row) for y, row in self.rows.items()}


def begin_tick_accumulate(
    trace: EligibilityTrace,
    cfg: LearnerConfig,
    grads: Iterable[tuple[int, list[float]]],
) -> EligibilityTrace:
    """Decay the trace by beta, then add this tick's decision gradients.

    grads is a sequence of (destination, gradient-vector) pairs, one per
    routing decision this router made in the tick; an empty sequence just
    decays. Mutates and returns `trace`.
    """
    beta = cfg.beta
    if beta == 0.0:
        for y in trace.active:
            row = trace.rows[y]
            for i in range(len(row)):
                row[i] = 0.0
        trace.active.clear()
    else:
        for y in trace.active:
            row = trace.rows[y]
            for i in range(len(row)):
                row[i] *= beta
    for dest, g in grads:
        try:
            row = trace.rows[dest]
        except KeyError:
            raise ValueError(f"gradient for unknown destination row {dest}") from None
        if len(g) != len(row):
            raise ValueError(
                f"gradient length {len(g)} does not match row width {len(row)}"
            )
        for i, gi in enumerate(g):
            row[i] += gi
        trace.active.add(dest)
    return trace


def apply_reward(
    table: ParamTable, trace: EligibilityTrace, cfg: LearnerConfig, reward: float
) -> ParamTable:
    """theta <- theta + gamma * reward * z, element-wise. Mutates `table`."""
    if not math.isfinite(reward):
        raise ValueError(f"non-finite reward {reward!r}")
    if reward != 0.0:
        gr = cfg.gamma * reward
        for y in trace.active:
            zrow = trace.rows[y]
            trow = table.rows[y]
            for i, z in enumerate(zrow):
                trow[i] += gr * z
    return table


def tick_update(
    table: ParamTable,
    trace: EligibilityTrace,
    cfg: LearnerConfig,
    grads: Iterable[tuple[int, list[float]]],
    reward: float,
) -> None:
    """One full per-tick update in the configured order.

    Exactly begin_tick_accumulate followed by apply_reward (or the reverse
    when credit_current_tick is off), fused into one pass per trace row;
    the simulation calls this once per router per tick.
    """
    if not math.isfinite(reward):
        raise ValueError(f"non-finite reward {reward!r}")
    beta = cfg.beta
    gr = cfg.gamma * reward
    zrows = trace.rows
    trows = table.rows
    active = trace.active
    if cfg.credit_current_tick:
        by_dest: dict[int, list[list[float]]] = {}
        for dest, g in grads:
            by_dest.setdefault(dest, []).append(g)
        if beta == 0.0:
            for y in active:
                if y not in by_dest:
                    row = zrows[y]
                    for i in range(len(row)):
                        row[i] = 0.0
            active.clear()
        else:
            for y in active:
                if y not in by_dest:
                    zrow = zrows[y]
                    trow = trows[y]
                    for i, z in enumerate(zrow):
                        z *= beta
                        zrow[i] = z
                        trow[i] += gr * z
        for dest, glist in by_dest.items():
            zrow = zrows.get(dest)
            if zrow is None:
                raise ValueError(f"gradient for unknown destination row {dest}")
            keep = beta if dest in active else 0.0
            trow = trows[dest]
            for i in range(len(zrow)):
                z = zrow[i] * keep
                for g in glist:
                    z += g[i]
                zrow[i] = z
                trow[i] += gr * z
            active.add(dest)
    else:
        apply_reward(table, trace, cfg, reward)
        begin_tick_accumulate(trace, cfg, grads)


@dataclass
class RunningAverageReward:
    """Exact arithmetic mean of every per-tick reward seen so far."""

    count: int = 0
    total: float = 0.0

    @property
    def mean(self) -> float:
        return self.total / self.count if self.count else 0.0


def observe_reward(avg: RunningAverageReward, reward: float) -> RunningAverageReward:
    avg.count += 1
    avg.total += reward
    return avg
