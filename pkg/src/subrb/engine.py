"""Deterministic benchmarking-sequence simulator.

A run draws, for each (length, sequence index), a sequence of l gates: l − 1
independent uniform draws from the gate-set group (or products of random
generator words) followed by the exact inverse of their composition.  Errors
are Pauli channels: one after state preparation, one after every gate
(including the inversion gate), and one before measurement.

The initial state is the +1 eigenstate of ``measured_pauli`` (extended to a
canonical full stabilizer set) and the measurement projects that same Pauli.
Fidelities are computed in the Heisenberg picture by back-propagating the
measured Pauli through the inverse tableaus: each error location contributes
its channel eigenvalue at the current trajectory Pauli, so

    f_seq = (1 + s · Π_t λ(P_t) · ⟨P_final⟩) / 2,

where s is the accumulated tableau sign and ⟨P_final⟩ the expectation of the
returned Pauli in the initial state (+1 whenever the sequence really inverts
itself; the measurement is always taken in the returned eigenbasis, so exact
fidelity is identically 1 for error-free sequences).  Monte Carlo mode draws a
Pauli error per location per shot instead and counts measurement parities.

Reproducibility: every sequence owns a counter-based Philox stream seeded from
``(rng_seed, length, sequence_index)``, so results are bitwise identical
across repeat runs and worker counts.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .channels import PauliChannel, eigenvalue_table
from .errors import ConfigError
from .pauli import PauliOperator, phase_exponent
from .tableau import CliffordTableau, GeneratorSet, enumerate_group, group_by_name

UNIFORM_ENUMERATED = "uniform_enumerated"
GENERATOR_WORD = "generator_word"

_MC_CHUNK = 1 << 14


@dataclass(frozen=True)
class SamplingSpec:
    """How individual gates are drawn: exact-uniform or random generator words."""

    mode: str = UNIFORM_ENUMERATED
    word_length: int | None = None

    def __post_init__(self):
        if self.mode not in (UNIFORM_ENUMERATED, GENERATOR_WORD):
            raise ConfigError(f"unknown sampling mode {self.mode!r}")
        if self.mode == GENERATOR_WORD and self.word_length is not None:
            if self.word_length < 1:
                raise ConfigError("word_length must be positive")
        if self.mode == UNIFORM_ENUMERATED and self.word_length is not None:
            raise ConfigError("word_length only applies to generator_word sampling")


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one benchmarking run."""

    n_qubits: int
    group: GeneratorSet
    lengths: tuple[int, ...]
    sequences_per_length: int
    measured_pauli: PauliOperator
    gate_channel: PauliChannel
    prep_channel: PauliChannel | None = None
    meas_channel: PauliChannel | None = None
    shots_per_sequence: int = 0  # 0 = exact fidelities
    sampling: SamplingSpec = field(default_factory=SamplingSpec)
    rng_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        n = self.n_qubits
        if not self.lengths:
            raise ConfigError("lengths must be non-empty")
        if any(int(l) < 1 for l in self.lengths):
            raise ConfigError("all sequence lengths must be >= 1")
        object.__setattr__(self, "lengths", tuple(int(l) for l in self.lengths))
        if self.sequences_per_length < 1:
            raise ConfigError("sequences_per_length must be >= 1")
        if self.shots_per_sequence < 0:
            raise ConfigError("shots_per_sequence must be >= 0 (0 = exact)")
        if self.measured_pauli.n_qubits != n:
            raise ConfigError("measured_pauli size does not match n_qubits")
        if self.measured_pauli.is_identity:
            raise ConfigError("measured_pauli must not be the identity")
        if self.measured_pauli.sign != 1:
            raise ConfigError("measured_pauli must carry sign +1")
        for name in ("gate_channel", "prep_channel", "meas_channel"):
            ch = getattr(self, name)
            if ch is not None and ch.n_qubits != n:
                raise ConfigError(f"{name} size does not match n_qubits")
        if self.rng_seed < 0:
            raise ConfigError("rng_seed must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    # -- serialization ------------------------------------------------------

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        def need(key):
            if key not in payload:
                raise ConfigError(f"missing config field: {key!r}")
            return payload[key]

        n = int(need("n_qubits"))
        group = group_by_name(str(need("group")))
        lengths = tuple(int(l) for l in need("lengths"))
        sampling_raw = payload.get("sampling", {"mode": UNIFORM_ENUMERATED})
        if isinstance(sampling_raw, str):
            sampling_raw = {"mode": sampling_raw}
        sampling = SamplingSpec(
            mode=sampling_raw.get("mode", UNIFORM_ENUMERATED),
            word_length=sampling_raw.get("word_length"),
        )
        return cls(
            n_qubits=n,
            group=group,
            lengths=lengths,
            sequences_per_length=int(need("sequences_per_length")),
            measured_pauli=PauliOperator.from_string(str(need("measured_pauli"))),
            gate_channel=_channel_from_config(need("gate_channel"), n, group),
            prep_channel=_optional_channel(payload.get("prep_channel"), n, group),
            meas_channel=_optional_channel(payload.get("meas_channel"), n, group),
            shots_per_sequence=int(payload.get("shots_per_sequence", 0)),
            sampling=sampling,
            rng_seed=int(payload.get("rng_seed", 0)),
            workers=int(payload.get("workers", 1)),
        )

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        text_path = os.fspath(path)
        if text_path.endswith(".toml"):
            try:
                import tomllib
            except ModuleNotFoundError:  # Python < 3.11
                import tomli as tomllib

            with open(text_path, "rb") as fh:
                payload = tomllib.load(fh)
        else:
            with open(text_path, "r", encoding="utf-8") as fh:
                try:
                    payload = json.load(fh)
                except json.JSONDecodeError as exc:
                    raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigError("config file must contain an object/table")
        return cls.from_dict(payload)

    def to_dict(self) -> dict:
        out = {
            "n_qubits": self.n_qubits,
            "group": self.group.name.lower(),
            "lengths": list(self.lengths),
            "sequences_per_length": self.sequences_per_length,
            "measured_pauli": self.measured_pauli.to_string(),
            "gate_channel": self.gate_channel.to_json_dict(),
            "shots_per_sequence": self.shots_per_sequence,
            "sampling": {
                "mode": self.sampling.mode,
                **(
                    {"word_length": self.sampling.word_length}
                    if self.sampling.word_length is not None
                    else {}
                ),
            },
            "rng_seed": self.rng_seed,
            "workers": self.workers,
        }
        if self.prep_channel is not None:
            out["prep_channel"] = self.prep_channel.to_json_dict()
        if self.meas_channel is not None:
            out["meas_channel"] = self.meas_channel.to_json_dict()
        return out

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, rng_seed=seed)


def _channel_from_config(raw, n: int, group: GeneratorSet) -> PauliChannel:
    """Accept the channel file schema, a weight map, block weights, or a path."""
    if isinstance(raw, str):
        return PauliChannel.load(raw)
    if not isinstance(raw, dict):
        raise ConfigError(f"cannot interpret channel spec: {raw!r}")
    if "depolarizing" in raw:
        spec = raw["depolarizing"]
        p = float(spec["p"] if isinstance(spec, dict) else spec)
        return PauliChannel.depolarizing(n, p)
    if "block_uniform" in raw:
        from .orbits import compute_blocks
        from .channels import BlockChannel

        p_list = [float(v) for v in raw["block_uniform"]["p"]]
        d = compute_blocks(group, n)
        if len(p_list) != d.block_count - 1:
            raise ConfigError(
                f"block_uniform expects {d.block_count - 1} weights for "
                f"{group.name}, got {len(p_list)}"
            )
        return BlockChannel(d, 1.0 - sum(p_list), tuple(p_list)).uniform_channel()
    if "weights" in raw:
        if isinstance(raw["weights"], dict):
            return PauliChannel.from_weight_map(n, raw["weights"])
        return PauliChannel.from_json_dict({"n": raw.get("n", n), "weights": raw["weights"]})
    raise ConfigError(
        "channel spec needs 'weights', 'depolarizing', 'block_uniform', or a file path"
    )


def _optional_channel(raw, n, group) -> PauliChannel | None:
    if raw is None:
        return None
    return _channel_from_config(raw, n, group)


# -- deterministic streams ----------------------------------------------------


def sequence_rng(seed: int, length: int, index: int) -> np.random.Generator:
    """Counter-based stream owned by one (length, sequence index) pair."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence([seed, length, index]))
    )


# -- stabilizer completion ----------------------------------------------------


def stabilizer_generators(measured: PauliOperator) -> list[PauliOperator]:
    """Canonical completion of the measured Pauli to n commuting generators.

    Qubits outside the support get a plain Z; the others get paired letters
    that anticommute with the measured letters on both the qubit and the
    support's first qubit (so every generator commutes with the measured
    Pauli and with the rest).  All signs are +1, which *defines* the initial
    state used by the engine.
    """
    n = measured.n_qubits
    x, z = measured.x_bits, measured.z_bits
    support = [q for q in range(n) if ((x | z) >> q) & 1]
    q0 = support[0]

    def anti_letter(q):
        xb, zb = (x >> q) & 1, (z >> q) & 1
        return (0, 1) if (xb, zb) == (1, 0) else (1, 0)  # Z for X; X for Z or Y

    gens = [measured.with_sign(1)]
    a0x, a0z = anti_letter(q0)
    for q in range(n):
        if q == q0:
            continue
        if q in support:
            aqx, aqz = anti_letter(q)
            gens.append(
                PauliOperator(n, (aqx << q) | (a0x << q0), (aqz << q) | (a0z << q0))
            )
        else:
            gens.append(PauliOperator(n, 0, 1 << q))
    return gens


def stabilizer_overlap(measured: PauliOperator, p: PauliOperator) -> int:
    """Expectation ⟨P⟩ ∈ {−1, 0, +1} of an unsigned Pauli in the initial state."""
    n = measured.n_qubits
    gens = stabilizer_generators(measured)
    vecs = [(g.x_bits << n) | g.z_bits for g in gens]
    target = (p.x_bits << n) | p.z_bits
    # GF(2) elimination over the generator span, tracking which generators
    # combine into each pivot row.
    pivots: dict[int, tuple[int, int]] = {}
    for i, v in enumerate(vecs):
        c = 1 << i
        while v:
            h = v.bit_length() - 1
            if h not in pivots:
                pivots[h] = (v, c)
                break
            pv, pc = pivots[h]
            v ^= pv
            c ^= pc
    t, combo = target, 0
    while t:
        h = t.bit_length() - 1
        if h not in pivots:
            return 0
        pv, pc = pivots[h]
        t ^= pv
        combo ^= pc
    cur_x = cur_z = 0
    exp = 0
    for i in range(len(vecs)):
        if (combo >> i) & 1:
            g = gens[i]
            exp += phase_exponent(cur_x, cur_z, g.x_bits, g.z_bits)
            cur_x ^= g.x_bits
            cur_z ^= g.z_bits
    assert (cur_x, cur_z) == (p.x_bits, p.z_bits)
    exp %= 4
    assert exp % 2 == 0, "stabilizer product must be Hermitian"
    return -1 if exp == 2 else 1


# -- run context --------------------------------------------------------------


class _RunContext:
    """Per-run caches: group elements + inverses, eigenvalue tables, MC tables."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        n = cfg.n_qubits
        self.n = n
        self.size = 1 << (2 * n)
        idx = np.arange(self.size, dtype=np.int64)
        self._xs = idx >> n
        self._zs = idx & ((1 << n) - 1)

        if cfg.sampling.mode == UNIFORM_ENUMERATED:
            self.elements = enumerate_group(cfg.group, n)
            self.inverses = [t.inverse() for t in self.elements]
            self.generators = None
        else:
            self.elements = None
            self.inverses = None
            self.generators = [t for _, t in cfg.group.generators(n)]
            self.word_length = cfg.sampling.word_length or (
                10 * n * len(self.generators)
            )

        ident = PauliChannel.identity(n)
        self.gate_tab = eigenvalue_table(cfg.gate_channel)
        self.prep_tab = eigenvalue_table(cfg.prep_channel or ident)
        self.meas_tab = eigenvalue_table(cfg.meas_channel or ident)
        self._cdfs = None

    def mc_cdfs(self) -> np.ndarray:
        if self._cdfs is None:
            cfg = self.cfg
            ident = PauliChannel.identity(self.n)
            rows = []
            for ch in (
                cfg.gate_channel,
                cfg.prep_channel or ident,
                cfg.meas_channel or ident,
            ):
                cdf = np.cumsum(ch.weights)
                cdf[-1] = 1.0
                rows.append(cdf)
            self._cdfs = np.array(rows)
        return self._cdfs

    # -- sampling -----------------------------------------------------------

    def draw_gate(self, rng) -> tuple[CliffordTableau, CliffordTableau]:
        """One random gate and its inverse."""
        if self.elements is not None:
            k = int(rng.integers(0, len(self.elements)))
            return self.elements[k], self.inverses[k]
        acc = CliffordTableau.identity(self.n)
        for g in rng.integers(0, len(self.generators), size=self.word_length):
            acc = self.generators[int(g)].compose(acc)
        return acc, acc.inverse()

    def sample(self, length: int, rng) -> tuple[list[CliffordTableau], list[CliffordTableau]]:
        seq = []
        invs = []
        running = CliffordTableau.identity(self.n)
        running_inv = CliffordTableau.identity(self.n)
        for _ in range(length - 1):
            u, u_inv = self.draw_gate(rng)
            seq.append(u)
            invs.append(u_inv)
            running = u.compose(running)
            running_inv = running_inv.compose(u_inv)
        seq.append(running_inv)
        invs.append(running)
        return seq, invs

    # -- trajectory ---------------------------------------------------------

    def _trajectory(self, invs) -> tuple[list[int], PauliOperator]:
        """Pauli index at each error location (meas, gates l..1, prep) + final."""
        cur = self.cfg.measured_pauli
        locs = [cur.index]  # measurement location
        for inv in reversed(invs):
            locs.append(cur.index)  # gate error, hit before pulling through
            cur = inv.apply(cur)
        locs.append(cur.index)  # preparation location
        return locs, cur

    def exact_fidelity(self, sequence, invs=None) -> float:
        if invs is None:
            invs = [t.inverse() for t in sequence]
        locs, final = self._trajectory(invs)
        prod = self.meas_tab[locs[0]]
        for li in locs[1:-1]:
            prod *= self.gate_tab[li]
        prod *= self.prep_tab[locs[-1]]
        measured = self.cfg.measured_pauli
        if (final.x_bits, final.z_bits) == (measured.x_bits, measured.z_bits):
            overlap = 1
        else:
            overlap = stabilizer_overlap(measured, final)
        return 0.5 * (1.0 + final.sign * overlap * prod)

    def mc_fidelity(self, sequence, rng, shots, invs=None) -> float:
        if shots < 1:
            raise ConfigError("monte carlo needs shots >= 1")
        if invs is None:
            invs = [t.inverse() for t in sequence]
        locs, final = self._trajectory(invs)
        measured = self.cfg.measured_pauli
        if (final.x_bits, final.z_bits) == (measured.x_bits, measured.z_bits):
            overlap = 1
        else:
            overlap = stabilizer_overlap(measured, final)
        if overlap == 0:
            flips = rng.integers(0, 2, size=shots)
            return float(np.mean(1 - flips))
        n_loc = len(locs)
        chan_ids = np.zeros(n_loc, dtype=np.int64)
        chan_ids[0] = 2  # measurement channel
        chan_ids[-1] = 1  # preparation channel
        flip_rows = np.empty((n_loc, self.size), dtype=np.uint8)
        for i, li in enumerate(locs):
            px, pz = li >> self.n, li & ((1 << self.n) - 1)
            flip_rows[i] = _kernels.anticommute(self._xs, self._zs, px, pz)
        cdfs = self.mc_cdfs()
        plus = 0
        done = 0
        while done < shots:
            chunk = min(_MC_CHUNK, shots - done)
            u = rng.random((chunk, n_loc))
            plus += _kernels.mc_plus_counts(u, cdfs, chan_ids, flip_rows)
            done += chunk
        outcome_mean = final.sign * overlap * (2.0 * plus / shots - 1.0)
        return 0.5 * (1.0 + outcome_mean)


# -- public API ---------------------------------------------------------------


def sample_sequence(cfg: ExperimentConfig, length: int, rng) -> list[CliffordTableau]:
    """The l gates of one sequence: l − 1 draws plus the exact inverse."""
    seq, _ = _RunContext(cfg).sample(length, rng)
    return seq


def exact_sequence_fidelity(cfg: ExperimentConfig, sequence) -> float:
    """Closed-form fidelity of one gate sequence under the configured channels."""
    return _RunContext(cfg).exact_fidelity(list(sequence))


def monte_carlo_sequence_fidelity(
    cfg: ExperimentConfig, sequence, rng=None, shots: int | None = None
) -> float:
    """Sampled-error estimate of the same quantity (unbiased)."""
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    if shots is None:
        shots = cfg.shots_per_sequence or 100_000
    return _RunContext(cfg).mc_fidelity(list(sequence), rng, shots)


@dataclass(frozen=True)
class DecayData:
    """Per-sequence fidelities for each length, plus summary statistics."""

    lengths: tuple[int, ...]
    fidelities: np.ndarray  # shape (len(lengths), sequences_per_length)

    def __post_init__(self):
        f = np.asarray(self.fidelities, dtype=np.float64)
        if f.ndim != 2 or f.shape[0] != len(self.lengths):
            raise ConfigError("fidelity array must be (n_lengths, n_sequences)")
        f = f.copy()
        f.flags.writeable = False
        object.__setattr__(self, "fidelities", f)
        object.__setattr__(self, "lengths", tuple(int(l) for l in self.lengths))

    @property
    def sequences_per_length(self) -> int:
        return self.fidelities.shape[1]

    @property
    def mean(self) -> np.ndarray:
        return self.fidelities.mean(axis=1)

    @property
    def stderr(self) -> np.ndarray:
        """Sample standard deviation / sqrt(#sequences)."""
        m = self.fidelities.shape[1]
        if m < 2:
            return np.zeros(len(self.lengths))
        return self.fidelities.std(axis=1, ddof=1) / math.sqrt(m)

    @property
    def variance(self) -> np.ndarray:
        """Empirical variance of the per-sequence fidelities (population form)."""
        return self.fidelities.var(axis=1, ddof=0)

    def summary(self) -> dict:
        return {
            "lengths": list(self.lengths),
            "sequences_per_length": self.sequences_per_length,
            "mean": [float(v) for v in self.mean],
            "stderr": [float(v) for v in self.stderr],
            "variance": [float(v) for v in self.variance],
        }

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("length,sequence_index,fidelity\n")
            for li, length in enumerate(self.lengths):
                for si in range(self.fidelities.shape[1]):
                    fh.write(f"{length},{si},{self.fidelities[li, si]:.17g}\n")

    @classmethod
    def from_csv(cls, path) -> "DecayData":
        table: dict[int, dict[int, float]] = {}
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"length", "sequence_index", "fidelity"}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                raise ConfigError(
                    f"decay CSV must have columns {sorted(required)}, "
                    f"got {reader.fieldnames}"
                )
            for row in reader:
                table.setdefault(int(row["length"]), {})[
                    int(row["sequence_index"])
                ] = float(row["fidelity"])
        if not table:
            raise ConfigError("decay CSV contains no rows")
        lengths = sorted(table)
        counts = {len(v) for v in table.values()}
        if len(counts) != 1:
            raise ConfigError("decay CSV is ragged across lengths")
        m = counts.pop()
        fid = np.empty((len(lengths), m))
        for li, length in enumerate(lengths):
            rows = table[length]
            if sorted(rows) != list(range(m)):
                raise ConfigError(f"decay CSV has gaps at length {length}")
            for si in range(m):
                fid[li, si] = rows[si]
        return cls(tuple(lengths), fid)


def run_experiment(cfg: ExperimentConfig) -> DecayData:
    """Sample and evaluate the full (length × sequence) grid of the config."""
    ctx = _RunContext(cfg)
    n_len = len(cfg.lengths)
    m = cfg.sequences_per_length
    out = np.empty((n_len, m))

    def one(task):
        li, si = task
        length = cfg.lengths[li]
        rng = sequence_rng(cfg.rng_seed, length, si)
        seq, invs = ctx.sample(length, rng)
        if cfg.shots_per_sequence == 0:
            out[li, si] = ctx.exact_fidelity(seq, invs)
        else:
            out[li, si] = ctx.mc_fidelity(seq, rng, cfg.shots_per_sequence, invs)

    tasks = [(li, si) for li in range(n_len) for si in range(m)]
    if cfg.workers == 1:
        for t in tasks:
            one(t)
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            list(pool.map(one, tasks))
    return DecayData(cfg.lengths, out)
