"""Flash memory model with monotone writes, and write-lifetime Monte Carlo experiments."""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from multiprocessing import Pool
from typing import IO, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer
from scipy import stats

from .codebook import CodeParams
from .codec import Codec, Strategy, remaining_volume
from .core import InfoWord, Vector
from .errors import (
    InsufficientData,
    InvariantViolation,
    MemoryFull,
    NonIntegerRadix,
    ParameterError,
    TooLarge,
)
from .lattice import (
    GeneratorMatrix,
    LatticeSpec,
    determinant,
    format_decimal,
    format_vector,
    validate_lattice,
)
from .logging_config import log_sweep_row, log_trial_result, log_write

logger = logging.getLogger(__name__)

ADVERSARY_WORD_CAP = 4096
SWEEP_CSV_HEADER = (
    "q",
    "M",
    "D",
    "rate_bits_per_cell",
    "mean_writes",
    "ci95",
    "trials",
    "seed",
    "strategy",
    "note",
)


@dataclass(frozen=True)
class MemoryState:
    """Current cell values and the number of words written since erasure."""

    s: Vector
    write_count: int = 0

    @property
    def erased(self) -> bool:
        return self.write_count == 0 and all(v == 0 for v in self.s)


@dataclass(frozen=True)
class TrialResult:
    writes: int
    final_state: MemoryState


def init_memory(params: CodeParams) -> MemoryState:
    """Erased flash: every cell at zero, nothing written."""
    return MemoryState(s=(Fraction(0),) * params.n, write_count=0)


def write_word(
    mem: MemoryState,
    u: Sequence[int],
    codec: Codec,
    strategy: Strategy = Strategy.neighbors,
    *,
    allow_equal: bool = True,
    verify: bool = False,
) -> MemoryState:
    """Write u on top of mem and return the new state.

    An erased memory is written into block (0, ..., 0); later writes go through
    select_rewrite.  MemoryFull propagates and leaves mem untouched.
    """
    if mem.erased:
        codeword = codec.encode(u, (0,) * codec.n)
    else:
        codeword = codec.select_rewrite(u, mem.s, strategy, allow_equal=allow_equal)

    if verify:
        if any(x < s for x, s in zip(codeword.x, mem.s)):
            raise InvariantViolation(f"Write of u={tuple(u)} would decrease a cell")
        readback = codec.decode(codeword.x)
        if readback != tuple(u):
            raise InvariantViolation(f"Read back {readback} after writing {tuple(u)}")

    written = MemoryState(s=codeword.x, write_count=mem.write_count + 1)
    if logger.isEnabledFor(logging.DEBUG):
        volume = remaining_volume(codeword.x, codec.params)
        log_write(written.write_count, codeword.block, format_vector(codeword.x), volume)
    return written


def draw_word(rng: np.random.Generator, radices: Sequence[int]) -> InfoWord:
    """Uniform mixed-radix word, each u_i independent on 0..r_i - 1."""
    return tuple(int(v) for v in rng.integers(0, np.asarray(radices)))


def run_lifetime_trial(
    codec: Codec,
    rng_seed: int,
    strategy: Strategy = Strategy.neighbors,
    *,
    verify: bool = False,
) -> TrialResult:
    """Write uniformly random words until MemoryFull.

    Every write after the first must land on a different codeword, so a memory
    holding a single word still wears out.
    """
    rng = np.random.default_rng(rng_seed)
    mem = init_memory(codec.params)
    while True:
        u = draw_word(rng, codec.radices)
        try:
            mem = write_word(mem, u, codec, strategy, allow_equal=False, verify=verify)
        except MemoryFull:
            break
    log_trial_result(rng_seed, mem.write_count)
    return TrialResult(writes=mem.write_count, final_state=mem)


def adversarial_min_writes(
    codec: Codec,
    depth_cap: int = 10_000,
    *,
    strategy: Strategy = Strategy.neighbors,
    word_cap: int = ADVERSARY_WORD_CAP,
    sample_words: Optional[int] = None,
    seed: int = 0,
) -> int:
    """Writes survived against a greedy adversary.

    At each step the adversary picks the word whose best rewrite leaves the least
    remaining volume (smallest word on ties), or any word that cannot be written
    at all.  Greedy, not an exhaustive game search.

    Codes with more than ``word_cap`` words need ``sample_words``: the adversary
    then scans that many uniform words per step, drawn from ``seed``.  A sampled
    adversary is weaker, so its count bounds the exhaustive one from above.
    """
    exhaustive = codec.lattice.word_count <= word_cap
    if not exhaustive and sample_words is None:
        raise TooLarge(
            f"Adversary would scan {codec.lattice.word_count} words per step (cap {word_cap}); "
            "pass sample_words to sample them instead"
        )
    if sample_words is not None and sample_words < 1:
        raise ParameterError(f"sample_words must be at least 1, got {sample_words}")
    rng = np.random.default_rng(seed)
    all_words = list(itertools.product(*(range(r) for r in codec.radices))) if exhaustive else []
    mem = init_memory(codec.params)
    while mem.write_count < depth_cap:
        if exhaustive:
            words = all_words
        else:
            words = sorted({draw_word(rng, codec.radices) for _ in range(sample_words)})
        chosen: Optional[MemoryState] = None
        chosen_volume: Optional[Fraction] = None
        for u in words:
            try:
                candidate = write_word(mem, u, codec, strategy, allow_equal=False)
            except MemoryFull:
                logger.debug(f"Adversary stops the memory with u={u} at {mem.write_count} writes")
                return mem.write_count
            volume = remaining_volume(candidate.s, codec.params)
            if chosen_volume is None or volume < chosen_volume:
                chosen, chosen_volume = candidate, volume
        mem = chosen
    return mem.write_count


class SweepRow(BaseModel):
    """One (q, M) point of a lifetime sweep."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    q: int
    M: int
    D: Fraction
    rate: float = Field(description="Information bits per cell")
    mean_writes: Optional[float] = None
    ci95: Optional[float] = None
    trials: int
    seed: int
    strategy: Strategy = Strategy.neighbors
    note: str = ""

    @field_serializer("D")
    def _serialize_d(self, value: Fraction) -> str:
        return format_decimal(value)

    def csv_fields(self) -> Tuple[str, ...]:
        def number(value: Optional[float]) -> str:
            return "" if value is None else f"{value:.6f}"

        return (
            str(self.q),
            str(self.M),
            format_decimal(self.D),
            number(self.rate),
            number(self.mean_writes),
            number(self.ci95),
            str(self.trials),
            str(self.seed),
            self.strategy.value,
            self.note,
        )


class LinearFit(BaseModel):
    slope: float
    intercept: float
    r_squared: float
    points: List[Tuple[str, float]] = Field(
        default_factory=list, description="(D, mean writes) pairs, D as an exact string"
    )


class TrialTask(NamedTuple):
    lattice: LatticeSpec
    params: CodeParams
    key: int
    hash_off: bool
    strategy: Strategy
    seed: int


@lru_cache(maxsize=64)
def _codec_for(lattice: LatticeSpec, params: CodeParams, key: int, hash_off: bool) -> Codec:
    return Codec(lattice, params, key, hash_off=hash_off)


def _trial_writes(task: TrialTask) -> int:
    codec = _codec_for(task.lattice, task.params, task.key, task.hash_off)
    return run_lifetime_trial(codec, task.seed, task.strategy).writes


def _run_tasks(tasks: List[TrialTask], jobs: int) -> List[int]:
    """Run trials, in a process pool when jobs > 1; results keep task order."""
    if jobs <= 1 or len(tasks) <= 1:
        return [_trial_writes(task) for task in tasks]
    chunksize = max(1, len(tasks) // (jobs * 8))
    with Pool(processes=jobs) as pool:
        return pool.map(_trial_writes, tasks, chunksize=chunksize)


def summarize(writes: Sequence[int]) -> Tuple[float, float]:
    """Mean and half-width of the normal-approximation 95% confidence interval."""
    values = np.asarray(writes, dtype=float)
    mean = float(values.mean())
    if len(values) < 2:
        return mean, 0.0
    return mean, float(1.96 * values.std(ddof=1) / math.sqrt(len(values)))


def _trial_tasks(
    lattice: LatticeSpec,
    params: CodeParams,
    trials: int,
    base_seed: int,
    key: int,
    hash_off: bool,
    strategy: Strategy,
) -> List[TrialTask]:
    return [
        TrialTask(lattice, params, key, hash_off, Strategy(strategy), base_seed + t)
        for t in range(trials)
    ]


def sweep(
    generator: GeneratorMatrix,
    q_values: Iterable[int],
    M_values: Iterable[int],
    trials: int,
    base_seed: int = 0,
    *,
    key: int = 0,
    strategy: Strategy = Strategy.neighbors,
    hash_off: bool = False,
    jobs: int = 1,
) -> List[SweepRow]:
    """Mean lifetime for every (q, M) pair; infeasible pairs are kept with a note."""
    if trials < 1:
        raise ParameterError(f"trials must be at least 1, got {trials}")
    strategy = Strategy(strategy)
    det = determinant(generator)
    log_det = math.log2(det.numerator) - math.log2(det.denominator)

    rows: List[SweepRow] = []
    pending: List[Tuple[int, int, Fraction, float, int]] = []
    tasks: List[TrialTask] = []
    for q, M in itertools.product(sorted(set(q_values)), sorted(set(M_values))):
        D = Fraction(q - 1, M)
        note = ""
        lattice: Optional[LatticeSpec] = None
        if D < 1:
            note = f"D = {format_decimal(D)} < 1"
        else:
            try:
                lattice = validate_lattice(generator, M)
            except NonIntegerRadix as exc:
                note = str(exc)
        bits = (generator.n * math.log2(M) - log_det) / generator.n
        if lattice is None:
            row = SweepRow(
                q=q, M=M, D=D, rate=bits, trials=trials, seed=base_seed,
                strategy=strategy, note=note,
            )
            log_sweep_row(q, M, None, note)
            rows.append(row)
            continue
        params = CodeParams.from_levels(generator.n, M, q)
        pending.append((q, M, D, bits, len(tasks)))
        tasks.extend(_trial_tasks(lattice, params, trials, base_seed, key, hash_off, strategy))

    results = _run_tasks(tasks, jobs)
    for q, M, D, bits, start in pending:
        mean, ci95 = summarize(results[start : start + trials])
        log_sweep_row(q, M, mean)
        rows.append(
            SweepRow(
                q=q, M=M, D=D, rate=bits, mean_writes=mean, ci95=ci95, trials=trials,
                seed=base_seed, strategy=strategy,
            )
        )
    return sorted(rows, key=lambda row: (row.q, row.rate, row.M))


def write_sweep_csv(rows: Iterable[SweepRow], stream: Optional[IO[str]] = None) -> str:
    """Serialise sweep rows; returns the CSV text and writes it to stream if given."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SWEEP_CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
    text = buffer.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def linearity_check(
    generator: GeneratorMatrix,
    M: int,
    D_values: Iterable[Fraction],
    trials: int,
    base_seed: int = 0,
    *,
    key: int = 0,
    strategy: Strategy = Strategy.neighbors,
    hash_off: bool = False,
    jobs: int = 1,
) -> LinearFit:
    """Least-squares fit of mean lifetime against D at fixed M."""
    D_list = sorted({Fraction(D) for D in D_values})
    if len(D_list) < 2:
        raise InsufficientData("A linear fit needs at least two distinct values of D")
    if trials < 1:
        raise ParameterError(f"trials must be at least 1, got {trials}")
    lattice = validate_lattice(generator, M)

    tasks: List[TrialTask] = []
    for D in D_list:
        params = CodeParams.from_blocks(generator.n, M, D)
        tasks.extend(_trial_tasks(lattice, params, trials, base_seed, key, hash_off, strategy))
    results = _run_tasks(tasks, jobs)
    means = [summarize(results[i * trials : (i + 1) * trials])[0] for i in range(len(D_list))]

    fit = stats.linregress([float(D) for D in D_list], means)
    r_squared = float(fit.rvalue) ** 2
    logger.info(
        f"Linearity M={M}: slope={fit.slope:.4f} intercept={fit.intercept:.4f} "
        f"R^2={r_squared:.4f}"
    )
    return LinearFit(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=r_squared,
        points=[(format_decimal(D), mean) for D, mean in zip(D_list, means)],
    )
