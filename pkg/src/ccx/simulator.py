"""Exact stochastic simulation (Gillespie direct method).

Randomness comes from numpy's PCG64 generator (``numpy.random.default_rng``)
drawn in fixed blocks of uniforms; each step consumes two: one for the
waiting time ``-ln(1 - u1) / a0`` and one for the propensity-weighted scan
over reactions in id order. Propensities are summed in blocks of 32
reactions so a step only re-sums the blocks its firing touched. A run is
fully determined by the network, the rates and the seed.

A run stops when the network is quiescent: no non-maintenance reaction
can fire, either now or after every absence indicator of an absent
species has reappeared.
"""

from __future__ import annotations

import io
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _ssa
from .crn import Crn, RateConfig, propensity
from .diagnostics import CcxError, Diagnostic

UNIFORM_BLOCK = 4096
BLOCK = _ssa.BLOCK
STOP_REASONS = {_ssa.QUIESCENT: "quiescent", _ssa.HORIZON: "horizon", _ssa.MAX_STEPS: "max_steps"}


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    horizon: float = 5000.0
    max_steps: int = 5_000_000
    # plateau appended to the trace after a quiescent stop
    quiescence_window: float = 1.0
    rates: RateConfig = field(default_factory=RateConfig)
    observe: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if not 0 < self.quiescence_window < self.horizon:
            raise ValueError("quiescence_window must be positive and below the horizon")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class Trajectory:
    names: tuple[str, ...]
    times: np.ndarray
    counts: np.ndarray
    stop_reason: str
    stop_time: float
    steps: int
    final_state: np.ndarray
    firings: Optional[np.ndarray] = None
    firing_times: Optional[np.ndarray] = None

    def final(self) -> dict[str, int]:
        return dict(zip(self.names, (int(v) for v in self.counts[-1])))


@dataclass
class EnsembleSummary:
    runs: int
    names: tuple[str, ...]
    histograms: dict[str, Counter]
    mode: dict[str, int]
    fraction: float
    stop_reasons: Counter
    finals: list[tuple[int, ...]]

    def lines(self) -> list[str]:
        # the percentage is the share of runs whose whole final state is the mode
        pct = f"{100 * self.fraction:g}"
        return [f"{name} -> {self.mode[name]} ({pct}% of {self.runs} runs)" for name in self.names]

    def count_matching(self, expected: dict[str, int]) -> int:
        idx = [self.names.index(k) for k in expected]
        want = tuple(expected.values())
        return sum(1 for f in self.finals if tuple(f[i] for i in idx) == want)


def _observe_ids(crn: Crn, observe: Optional[Sequence[str]]) -> list[int]:
    if observe is None:
        return list(crn.observables)
    ids = []
    for name in observe:
        sid = crn.get(name)
        if sid is None:
            raise CcxError(Diagnostic(f"unknown observable '{name}'"))
        ids.append(sid)
    return ids


def _csr(rows: Sequence[Sequence[tuple[int, int]]]):
    ptr = np.zeros(len(rows) + 1, dtype=np.int64)
    for i, row in enumerate(rows):
        ptr[i + 1] = ptr[i] + len(row)
    flat = [p for row in rows for p in row]
    a = np.array([p[0] for p in flat], dtype=np.int64)
    b = np.array([p[1] for p in flat], dtype=np.int64)
    return ptr, a, b


class CompiledNetwork:
    """Array form of a network for the simulation kernel."""

    def __init__(self, crn: Crn, rates: RateConfig, observe: Sequence[int]):
        self.crn = crn
        rxns = crn.reactions
        self.rate = np.array([rates.rate(r.tier) for r in rxns], dtype=np.float64)
        self.r_ptr, self.r_sp, self.r_st = _csr([r.reactants for r in rxns])
        deltas = [sorted(r.net_change().items()) for r in rxns]
        self.d_ptr, self.d_sp, self.d_dl = _csr(deltas)
        readers: dict[int, list[int]] = {}
        for j, r in enumerate(rxns):
            for sid, _ in r.reactants:
                readers.setdefault(sid, []).append(j)
        deps = [sorted({k for sid, _ in d for k in readers.get(sid, ())}) for d in deltas]
        self.dep_ptr, self.dep_rx, _ = _csr([[(k, 0) for k in row] for row in deps])
        self.maint = np.array([r.is_maintenance for r in rxns], dtype=np.bool_)
        self.obs_idx = np.array(observe, dtype=np.int64)
        obs = set(observe)
        self.touches_obs = np.array([any(s in obs for s, _ in d) for d in deltas], dtype=np.bool_)
        binds = list(crn.indicators.values())
        self.ind_x = np.array([b.indicated for b in binds], dtype=np.int64)
        self.ind_ab = np.array([b.indicator for b in binds], dtype=np.int64)
        self.x0 = np.array(crn.initial_state(), dtype=np.int64)


def simulate(crn: Crn, config: SimConfig = SimConfig(), record_firings: bool = False,
             compiled: Optional[CompiledNetwork] = None) -> Trajectory:
    """Run one exact trajectory; deterministic given ``config.seed``."""
    names = tuple(crn.name(i) for i in _observe_ids(crn, config.observe))
    net = compiled or CompiledNetwork(crn, config.rates, _observe_ids(crn, config.observe))
    rng = np.random.default_rng(config.seed)
    x = net.x0.copy()
    a = np.zeros(len(crn.reactions), dtype=np.float64)
    _ssa.fill_propensities(a, x, net.rate, net.r_ptr, net.r_sp, net.r_st)
    bsum = np.zeros(-(-len(a) // _ssa.BLOCK), dtype=np.float64)
    _ssa.block_sums(a, bsum)
    tstate = np.zeros(1, dtype=np.float64)
    istate = np.zeros(5, dtype=np.int64)
    istate[2] = UNIFORM_BLOCK
    istate[4] = int(np.count_nonzero((a > 0) & ~net.maint))
    ubuf = np.empty(UNIFORM_BLOCK, dtype=np.float64)
    n_obs = len(net.obs_idx)
    rec_t = np.zeros(256, dtype=np.float64)
    rec_x = np.zeros((256, n_obs), dtype=np.int64)
    rec_x[0] = x[net.obs_idx]
    istate[1] = 1
    cap_f = 1024 if record_firings else 0
    fire_j = np.zeros(cap_f, dtype=np.int64)
    fire_t = np.zeros(cap_f, dtype=np.float64)
    while True:
        status = _ssa.run(
            x, a, bsum, tstate, istate,
            net.rate, net.r_ptr, net.r_sp, net.r_st, net.d_ptr, net.d_sp, net.d_dl,
            net.dep_ptr, net.dep_rx, net.maint, net.touches_obs, net.ind_x, net.ind_ab,
            float(config.horizon), int(config.max_steps),
            ubuf, net.obs_idx, rec_t, rec_x, fire_j, fire_t, record_firings,
        )
        if status == _ssa.NEED_UNIFORMS:
            ubuf = rng.random(UNIFORM_BLOCK)
            istate[2] = 0
        elif status == _ssa.NEED_RECORDS:
            rec_t = np.concatenate([rec_t, np.zeros_like(rec_t)])
            rec_x = np.concatenate([rec_x, np.zeros_like(rec_x)])
        elif status == _ssa.NEED_FIRINGS:
            fire_j = np.concatenate([fire_j, np.zeros_like(fire_j)])
            fire_t = np.concatenate([fire_t, np.zeros_like(fire_t)])
        else:
            break
    nrec = int(istate[1])
    times, counts = rec_t[:nrec].copy(), rec_x[:nrec].copy()
    reason = STOP_REASONS[status]
    stop = float(tstate[0])
    times, counts = _terminal(times, counts, reason, stop, int(istate[0]), config)
    nfire = int(istate[3])
    return Trajectory(
        names, times, counts, reason, stop, int(istate[0]), x,
        fire_j[:nfire].copy() if record_firings else None,
        fire_t[:nfire].copy() if record_firings else None,
    )


def _terminal(times, counts, reason, stop, steps, config):
    # a quiescent run gets a short plateau so plots show where it settled;
    # a run in which nothing fired stays a single initial sample
    end = stop
    if reason == "quiescent" and steps > 0:
        end = min(stop + config.quiescence_window, config.horizon)
    if end > times[-1]:
        times = np.append(times, end)
        counts = np.vstack([counts, counts[-1:]])
    return times, counts


def detect_quiescence(crn: Crn, state: Sequence[int], rates: RateConfig = RateConfig()) -> bool:
    """True iff no non-maintenance reaction can fire now or once pending indicators appear."""
    hyp = list(state)
    for b in crn.indicators.values():
        if hyp[b.indicated] == 0 and hyp[b.indicator] == 0:
            hyp[b.indicator] = 1
    return not any(
        propensity(r, hyp, rates) > 0 for r in crn.reactions if not r.is_maintenance
    )


def simulate_reference(crn: Crn, config: SimConfig = SimConfig()) -> Trajectory:
    """Straightforward pure-Python direct method used to cross-check the kernel."""
    obs = _observe_ids(crn, config.observe)
    rng = np.random.default_rng(config.seed)
    buf: list[float] = []
    x = crn.initial_state()
    t = 0.0
    steps = 0
    times, rows, firings, ftimes = [0.0], [[x[i] for i in obs]], [], []
    obs_set = set(obs)
    while True:
        props = [propensity(r, x, config.rates) for r in crn.reactions]
        blocks = [props[i:i + BLOCK] for i in range(0, len(props), BLOCK)]
        bsums = []
        for blk in blocks:
            acc = 0.0
            for p in blk:
                acc += p
            bsums.append(acc)
        a0 = 0.0
        for b in bsums:
            a0 += b
        if a0 == 0.0 or detect_quiescence(crn, x, config.rates):
            reason = "quiescent"
            break
        if steps >= config.max_steps:
            reason = "max_steps"
            break
        if not buf:
            buf = list(rng.random(UNIFORM_BLOCK))[::-1]
        u1, u2 = buf.pop(), buf.pop()
        dt = -math.log(1.0 - u1) / a0
        if t + dt > config.horizon:
            t = config.horizon
            reason = "horizon"
            break
        pick = _select_reference(blocks, bsums, u2 * a0)
        if pick < 0:
            pick = max(j for j, p in enumerate(props) if p > 0)
        rxn = crn.reactions[pick]
        for sid, d in rxn.net_change().items():
            x[sid] += d
        t = t + dt
        steps += 1
        firings.append(pick)
        ftimes.append(t)
        if obs_set & rxn.net_change().keys():
            if times[-1] == t:
                times.pop()
                rows.pop()
            times.append(t)
            rows.append([x[i] for i in obs])
    times_a = np.array(times)
    counts = np.array(rows, dtype=np.int64).reshape(len(rows), len(obs))
    times_a, counts = _terminal(times_a, counts, reason, t, steps, config)
    return Trajectory(
        tuple(crn.name(i) for i in obs), times_a, counts, reason, t, steps,
        np.array(x, dtype=np.int64), np.array(firings, dtype=np.int64), np.array(ftimes),
    )


def _select_reference(blocks, bsums, target) -> int:
    acc = 0.0
    for b, blk in enumerate(blocks):
        if acc + bsums[b] > target:
            for i, p in enumerate(blk):
                acc += p
                if acc > target:
                    return b * BLOCK + i
        else:
            acc += bsums[b]
    return -1


def run_ensemble(crn: Crn, config: SimConfig = SimConfig(), runs: int = 100) -> EnsembleSummary:
    """Run ``runs`` trajectories with seeds seed, seed+1, ... and tally final observables."""
    if runs < 1:
        raise ValueError("runs must be at least 1")
    obs = _observe_ids(crn, config.observe)
    names = tuple(crn.name(i) for i in obs)
    net = CompiledNetwork(crn, config.rates, obs)
    finals: list[tuple[int, ...]] = []
    reasons: Counter = Counter()
    for k in range(runs):
        cfg = SimConfig(config.seed + k, config.horizon, config.max_steps,
                        config.quiescence_window, config.rates, config.observe)
        traj = simulate(crn, cfg, compiled=net)
        finals.append(tuple(int(traj.final_state[i]) for i in obs))
        reasons[traj.stop_reason] += 1
    joint = Counter(finals)
    best = max(joint.values())
    mode = min(state for state, n in joint.items() if n == best)
    hists = {name: Counter(f[i] for f in finals) for i, name in enumerate(names)}
    return EnsembleSummary(runs, names, hists, dict(zip(names, mode)), best / runs, reasons, finals)


def _fmt_time(t: float) -> str:
    return np.format_float_positional(t, trim="-")


def write_trace_csv(trajectory: Trajectory, observe: Optional[Sequence[str]] = None) -> str:
    names = list(trajectory.names if observe is None else observe)
    cols = []
    for name in names:
        if name not in trajectory.names:
            raise CcxError(Diagnostic(f"unknown observable '{name}'"))
        cols.append(trajectory.names.index(name))
    out = io.StringIO()
    out.write(",".join(["time", *names]) + "\n")
    for t, row in zip(trajectory.times, trajectory.counts):
        out.write(",".join([_fmt_time(float(t)), *(str(int(row[c])) for c in cols)]) + "\n")
    return out.getvalue()
