"""
Discrete-time simulation of JASTAP neurons and networks.

A neuron sums the postsynaptic potentials (PSPs) of all spikes that reached
its synapses, squashes the sum into a membrane potential (MP) in (-1, 1) and
fires when the MP reaches its threshold, no sooner than the actual
inter-spike interval allowed by the current MP.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import NetworkError, SimulationError
from .spike_train import SpikeTrain

logger = logging.getLogger(__name__)

TWO_OVER_PI = 2.0 / math.pi
MAX_LATENCY = 40.0
# firing comparisons are done on float step times
TIME_EPS = 1e-9
# steps scanned by the first look-ahead for a firing candidate, doubled per miss
FIRST_CHUNK = 32
# grid steps of external drive computed at a time
FILL_BLOCK = 256

ArrayLike = Union[float, np.ndarray]


def peak_time(t1: float, t2: float) -> float:
    """Time at which (1 - e^(-t/t1))^2 * e^(-2t/t2) reaches its maximum"""
    return t1 * math.log((t1 + t2) / t1)


def normalize_gain(t1: float, t2: float) -> float:
    """Gain k that scales the PSP waveform to a unit peak"""
    if t1 <= 0 or t2 <= 0:
        raise NetworkError(f"PSP time constants must be positive, got t1={t1}, t2={t2}")
    # stationary point: e^(-t/t1) = t1 / (t1 + t2)
    u = t1 / (t1 + t2)
    peak = (1.0 - u) ** 2 * math.exp(-2.0 * peak_time(t1, t2) / t2)
    return 1.0 / peak


@dataclass(frozen=True)
class WaveformParams:
    """PSP shape constants; k defaults to the unit-peak gain"""
    t1: float
    t2: float
    k: Optional[float] = None

    def __post_init__(self):
        if self.t1 <= 0 or self.t2 <= 0:
            raise NetworkError(f"PSP time constants must be positive, got t1={self.t1}, t2={self.t2}")
        if self.k is None:
            object.__setattr__(self, "k", normalize_gain(self.t1, self.t2))
        elif self.k <= 0:
            raise NetworkError(f"PSP gain must be positive, got {self.k}")


def psp_value(w: WaveformParams, t: ArrayLike) -> ArrayLike:
    """PSP evoked by a spike, evaluated t ms after it arrived (0 for t <= 0)"""
    t = np.asarray(t, dtype=float)
    tp = np.maximum(t, 0.0)
    value = w.k * np.square(-np.expm1(-tp / w.t1)) * np.exp(-2.0 * tp / w.t2)
    value = np.where(t > 0, value, 0.0)
    return float(value) if value.ndim == 0 else value


def psp_support(w: WaveformParams, tol: float = 1e-6) -> float:
    """Time after which the waveform stays below tol"""
    # k * e^(-2t/t2) bounds the waveform from above
    return max(0.5 * w.t2 * math.log(w.k / tol), peak_time(w.t1, w.t2))


def membrane_potential(psp_sum: ArrayLike) -> ArrayLike:
    return TWO_OVER_PI * np.arctan(psp_sum)


def actual_isi(mp: ArrayLike, theta: ArrayLike, i_min: ArrayLike, i_max: ArrayLike,
               clamp: bool = True) -> ArrayLike:
    """Shortest inter-spike interval the neuron allows at the given MP"""
    mp = np.asarray(mp, dtype=float)
    denom = np.maximum(1.0 - mp, 1e-12)
    isi = i_max - (i_max - i_min) * TWO_OVER_PI * np.arctan((mp - theta) / denom)
    isi = np.where(mp >= 1.0, i_min, isi)
    if clamp:
        isi = np.clip(isi, i_min, i_max)
    return float(isi) if isi.ndim == 0 else isi


@dataclass(frozen=True)
class SynapseSpec:
    """Connection from an external channel (external=True) or a neuron"""
    source: int
    weight: float
    latency: float
    waveform: WaveformParams
    external: bool = False

    def __post_init__(self):
        if not -1.0 <= self.weight <= 1.0:
            raise NetworkError(f"synapse weight {self.weight} outside [-1, 1]")
        if not 0.0 <= self.latency <= MAX_LATENCY:
            raise NetworkError(f"synapse latency {self.latency} outside [0, {MAX_LATENCY}] ms")


@dataclass(frozen=True)
class NeuronSpec:
    threshold: float
    i_min: float = 1.0
    i_max: float = 10.0
    synapses: Tuple[SynapseSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "synapses", tuple(self.synapses))
        if not 0.0 <= self.threshold <= 1.0:
            raise NetworkError(f"threshold {self.threshold} outside [0, 1]")
        if not 0.0 < self.i_min < self.i_max:
            raise NetworkError(f"need 0 < i_min < i_max, got {self.i_min}, {self.i_max}")


@dataclass(frozen=True)
class Network:
    neurons: Tuple[NeuronSpec, ...]
    input_channels: int
    output_neurons: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "neurons", tuple(self.neurons))
        object.__setattr__(self, "output_neurons", tuple(self.output_neurons))
        n = len(self.neurons)
        if self.input_channels < 0:
            raise NetworkError("input channel count must be non-negative")
        if not self.output_neurons:
            raise NetworkError("network needs at least one output neuron")
        if len(set(self.output_neurons)) != len(self.output_neurons):
            raise NetworkError(f"duplicate output neurons: {self.output_neurons}")
        for out in self.output_neurons:
            if not 0 <= out < n:
                raise NetworkError(f"output neuron {out} does not exist")
        for i, neuron in enumerate(self.neurons):
            for syn in neuron.synapses:
                limit = self.input_channels if syn.external else n
                if not 0 <= syn.source < limit:
                    kind = "input channel" if syn.external else "neuron"
                    raise NetworkError(f"neuron {i} reads unknown {kind} {syn.source}")

    @property
    def synapse_count(self) -> int:
        return sum(len(neuron.synapses) for neuron in self.neurons)


class SimConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dt: float = Field(0.1, gt=0)
    horizon: float = Field(300.0, gt=0)
    record_mp: bool = False
    clamp_isi: bool = True
    psp_tolerance: float = Field(1e-6, gt=0)

    @model_validator(mode="after")
    def _check_grid(self):
        if self.horizon < self.dt:
            raise ValueError(f"horizon {self.horizon} shorter than dt {self.dt}")
        steps = self.horizon / self.dt
        if abs(steps - round(steps)) > 1e-6:
            raise ValueError(f"horizon {self.horizon} is not a whole number of {self.dt} ms steps")
        return self

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass(frozen=True)
class SimTrace:
    spikes: Tuple[SpikeTrain, ...]
    end_time: float
    stopped: bool = False
    mp: Optional[np.ndarray] = field(default=None, compare=False)

    def first_spike(self, neuron: int) -> Optional[float]:
        return self.spikes[neuron].first


def dump_trace(trace: SimTrace) -> str:
    """One `neuron_id<TAB>time_ms` line per spike, sorted by time"""
    events = sorted(
        (float(t), nid) for nid, train in enumerate(trace.spikes) for t in train.times
    )
    return "".join(f"{nid}\t{t:.1f}\n" for t, nid in events)


def write_trace(trace: SimTrace, path: Union[str, Path]) -> None:
    Path(path).write_text(dump_trace(trace))


@dataclass(frozen=True)
class _InputEvents:
    """Spikes of one input channel as seen through one external synapse"""
    post: int
    syn: SynapseSpec
    times: np.ndarray
    start: np.ndarray     # first grid step each spike can touch
    span: int


class SimState:
    """Drive of one run; external PSPs are filled in lazily, block by block"""

    def __init__(self, compiled: "CompiledNetwork", events: List[_InputEvents]):
        cfg = compiled.cfg
        n = len(compiled.net.neurons)
        self.dt = cfg.dt
        self.columns = cfg.n_steps + 1
        self.events = events
        self.external = np.zeros((n, self.columns))
        self.internal = np.zeros((n, self.columns + compiled._pad))
        self.filled = 0

    def ensure(self, upto: int) -> None:
        """External drive complete on columns [0, upto)"""
        upto = min(upto, self.columns)
        if upto <= self.filled:
            return
        lo, hi = self.filled, min(max(upto, self.filled + FILL_BLOCK), self.columns)
        cols = np.arange(lo, hi)
        for ev in self.events:
            near = (ev.start < hi) & (ev.start + ev.span > lo)
            if not near.any():
                continue
            start = ev.start[near]
            keep = (cols[None, :] >= start[:, None]) & (cols[None, :] < start[:, None] + ev.span)
            age = cols[None, :] * self.dt - ev.times[near][:, None] - ev.syn.latency
            values = ev.syn.weight * psp_value(ev.syn.waveform, age[keep])
            where = np.broadcast_to(cols - lo, keep.shape)[keep]
            self.external[ev.post, lo:hi] += np.bincount(where, weights=values, minlength=hi - lo)
        self.filled = hi

    def drive(self, lo: int, hi: int) -> np.ndarray:
        self.ensure(hi)
        return self.external[:, lo:hi] + self.internal[:, lo:hi]


class CompiledNetwork:
    """Network with per-synapse PSP kernels sampled on the simulation grid"""

    def __init__(self, net: Network, cfg: SimConfig):
        self.net = net
        self.cfg = cfg
        n = len(net.neurons)
        self.theta = np.array([neuron.threshold for neuron in net.neurons], dtype=float)
        self.i_min = np.array([neuron.i_min for neuron in net.neurons], dtype=float)
        self.i_max = np.array([neuron.i_max for neuron in net.neurons], dtype=float)
        self.outputs = np.array(net.output_neurons, dtype=int)
        # lowest drive at which MP can reach threshold, widened against rounding
        capped = np.minimum(self.theta, 1.0 - 1e-7)
        self._drive_floor = np.tan(capped * math.pi / 2.0) * (1.0 - 1e-6) - 1e-9
        # steps before a neuron that just fired could fire again, never above the real gap
        self._min_gap = np.maximum(np.floor((self.i_min - TIME_EPS) / cfg.dt).astype(np.int64) - 1, 0)

        self._outgoing: List[List[Tuple[int, np.ndarray]]] = [[] for _ in range(n)]
        self._external: List[List[Tuple[int, SynapseSpec]]] = [[] for _ in range(net.input_channels)]
        self._excites: List[List[int]] = [[] for _ in range(n)]
        self._pad = 1
        for post, neuron in enumerate(net.neurons):
            for syn in neuron.synapses:
                if syn.weight == 0.0:
                    continue
                if syn.external:
                    self._external[syn.source].append((post, syn))
                else:
                    kernel = self._kernel(syn)
                    self._outgoing[syn.source].append((post, kernel))
                    self._pad = max(self._pad, kernel.size + 1)
                    if syn.weight > 0:
                        self._excites[syn.source].append(post)

    def _kernel(self, syn: SynapseSpec) -> np.ndarray:
        """Contribution at 1, 2, ... steps after a presynaptic spike on the grid"""
        dt = self.cfg.dt
        window = int(math.ceil((syn.latency + psp_support(syn.waveform, self.cfg.psp_tolerance)) / dt)) + 1
        offsets = np.arange(1, window + 1) * dt
        return syn.weight * psp_value(syn.waveform, offsets - syn.latency)

    def input_events(self, inputs: Sequence[SpikeTrain]) -> List[_InputEvents]:
        dt = self.cfg.dt
        events = []
        for ch, train in enumerate(inputs):
            if not len(train):
                continue
            for post, syn in self._external[ch]:
                span = int(math.ceil(psp_support(syn.waveform, self.cfg.psp_tolerance) / dt)) + 2
                start = np.floor((train.times + syn.latency) / dt).astype(np.int64)
                events.append(_InputEvents(post, syn, train.times, start, span))
        return events

    def can_fire(self, events: Sequence[_InputEvents]) -> np.ndarray:
        """Neurons that could reach threshold at all under these inputs"""
        reachable = self._drive_floor <= 0.0
        for ev in events:
            if ev.syn.weight > 0:
                reachable[ev.post] = True
        frontier = list(np.flatnonzero(reachable))
        while frontier:
            for post in self._excites[frontier.pop()]:
                if not reachable[post]:
                    reachable[post] = True
                    frontier.append(post)
        return reachable

    def _validate_inputs(self, inputs: Sequence[SpikeTrain]) -> None:
        if len(inputs) != self.net.input_channels:
            raise SimulationError(
                f"network has {self.net.input_channels} input channels, got {len(inputs)} trains"
            )
        for ch, train in enumerate(inputs):
            if len(train) and (train.times[0] < 0 or train.times[-1] > self.cfg.horizon + TIME_EPS):
                raise SimulationError(
                    f"input channel {ch} has spikes outside [0, {self.cfg.horizon}] ms"
                )

    def run(self, inputs: Sequence[SpikeTrain], stop_on_output: bool = False) -> SimTrace:
        """Event-driven over the step grid

        Drive only changes when a neuron fires, so the loop jumps to the next
        step where some neuron sits at or above threshold and is past its
        shortest possible refractory gap, and checks firing exactly there.
        """
        self._validate_inputs(inputs)
        cfg = self.cfg
        dt, n_steps = cfg.dt, cfg.n_steps
        n = len(self.net.neurons)
        events = self.input_events(inputs)
        state = SimState(self, events)

        theta, i_min, i_max = self.theta, self.i_min, self.i_max
        spikes: List[List[float]] = [[] for _ in range(n)]
        last = np.zeros(n, dtype=np.int64)
        fired = np.zeros(n, dtype=bool)
        end_step, stopped = n_steps, False

        # neurons that can never fire are gated past the horizon
        gate = np.where(self.can_fire(events), 0, n_steps + 1).astype(np.int64)
        s = self._next_candidate(state, 0, gate)
        while s is not None:
            mp = TWO_OVER_PI * np.arctan(state.drive(s, s + 1)[:, 0])
            ready = mp >= theta
            if ready.any():
                isi = actual_isi(mp, theta, i_min, i_max, cfg.clamp_isi)
                elapsed = np.where(fired, (s - last) * dt, np.inf)
                fire = ready & (elapsed + TIME_EPS >= isi)
                if fire.any():
                    for j in np.flatnonzero(fire):
                        spikes[j].append(s * dt)
                        last[j] = s
                        fired[j] = True
                        gate[j] = s + self._min_gap[j]
                        # visible to postsynaptic neurons from the next step on
                        for post, kernel in self._outgoing[j]:
                            state.internal[post, s + 1: s + 1 + kernel.size] += kernel
                    if stop_on_output and fire[self.outputs].any():
                        end_step, stopped = s, True
                        break
            s = self._next_candidate(state, s + 1, gate)

        mp_trace = None
        if cfg.record_mp:
            mp_trace = TWO_OVER_PI * np.arctan(state.drive(0, end_step + 1))
        return SimTrace(
            spikes=tuple(SpikeTrain(np.array(times)) for times in spikes),
            end_time=end_step * dt,
            stopped=stopped,
            mp=mp_trace,
        )

    def _next_candidate(self, state: SimState, start: int, gate: np.ndarray) -> Optional[int]:
        """First step >= start where some neuron may fire, None past the horizon"""
        n_steps = self.cfg.n_steps
        if np.all(gate > n_steps):
            return None
        s, chunk = start, FIRST_CHUNK
        while s <= n_steps:
            stop = min(s + chunk, n_steps + 1)
            hits = state.drive(s, stop) >= self._drive_floor[:, None]
            hits &= np.arange(s, stop)[None, :] >= gate[:, None]
            column = hits.any(axis=0)
            if column.any():
                return s + int(column.argmax())
            s, chunk = stop, 2 * chunk
        return None


def compile_network(net: Network, cfg: SimConfig) -> CompiledNetwork:
    return CompiledNetwork(net, cfg)


def simulate(net: Network, inputs: Sequence[SpikeTrain], cfg: SimConfig,
             stop_on_output: bool = False) -> SimTrace:
    return compile_network(net, cfg).run(inputs, stop_on_output=stop_on_output)
