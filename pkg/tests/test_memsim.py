import logging
from fractions import Fraction

import numpy as np
import pytest

from lattice_rewrite.codebook import CodeParams
from lattice_rewrite.codec import Codec, Strategy
from lattice_rewrite.errors import InsufficientData, MemoryFull, ParameterError, TooLarge
from lattice_rewrite.generators import e8_generator, rectangular_generator, skew2_generator
from lattice_rewrite.lattice import validate_lattice
from lattice_rewrite.memsim import (
    SWEEP_CSV_HEADER,
    MemoryState,
    SweepRow,
    adversarial_min_writes,
    draw_word,
    init_memory,
    linearity_check,
    run_lifetime_trial,
    summarize,
    sweep,
    write_sweep_csv,
    write_word,
)


def e8_codec_for(D, key=7):
    return Codec(validate_lattice(e8_generator(), 4), CodeParams.from_blocks(8, 4, D), key)


def test_init_memory(skew2_params):
    mem = init_memory(skew2_params)
    assert mem.s == (0, 0)
    assert mem.write_count == 0
    assert mem.erased


def test_first_write_goes_to_origin_block(skew2_plain, skew2_params):
    mem = write_word(init_memory(skew2_params), (4, 1), skew2_plain, verify=True)
    assert mem.s == (4, 3)
    assert mem.write_count == 1
    assert not mem.erased

    mem = write_word(mem, (2, 3), skew2_plain, verify=True)
    assert all(x >= s for x, s in zip(mem.s, (4, 3)))
    assert skew2_plain.decode(mem.s) == (2, 3)
    assert mem.write_count == 2


def test_write_logs_remaining_volume(skew2_plain, skew2_params, caplog):
    with caplog.at_level(logging.DEBUG, logger="lattice_rewrite"):
        write_word(init_memory(skew2_params), (4, 1), skew2_plain)
    assert "block (0, 0) x=(4, 3) remaining volume=42" in caplog.text


def test_rewriting_the_same_word_keeps_the_cells(skew2_keyed, skew2_params):
    mem = write_word(init_memory(skew2_params), (3, 1), skew2_keyed)
    again = write_word(mem, (3, 1), skew2_keyed, verify=True)
    assert again.s == mem.s
    assert again.write_count == 2


def test_write_word_memory_full_keeps_state(skew2_keyed):
    mem = MemoryState(s=(Fraction(19, 2), Fraction(19, 2)), write_count=4)
    with pytest.raises(MemoryFull):
        write_word(mem, (0, 0), skew2_keyed)
    assert mem.write_count == 4


def test_draw_word_in_range():
    rng = np.random.default_rng(3)
    radices = (8, 4, 4, 4, 4, 4, 4, 2)
    for _ in range(50):
        u = draw_word(rng, radices)
        assert all(isinstance(ui, int) and 0 <= ui < r for ui, r in zip(u, radices))


@pytest.mark.parametrize("strategy", list(Strategy))
@pytest.mark.parametrize("D", [1, 2, 5])
def test_single_word_memory_lasts_exactly_d_writes(unit_line, strategy, D):
    result = run_lifetime_trial(unit_line(D), rng_seed=0, strategy=strategy, verify=True)
    assert result.writes == D
    assert result.final_state.s == (D - 1,)


def test_lifetime_trial_is_deterministic(skew2_keyed):
    first = run_lifetime_trial(skew2_keyed, rng_seed=11)
    second = run_lifetime_trial(skew2_keyed, rng_seed=11)
    assert first == second


def test_skew2_guaranteed_writes(skew2_keyed):
    writes = [run_lifetime_trial(skew2_keyed, seed, verify=True).writes for seed in range(100)]
    assert min(writes) >= 2
    assert adversarial_min_writes(skew2_keyed) >= 2


@pytest.mark.parametrize("D", [2, 3, 4])
def test_e8_guaranteed_writes(D):
    codec = e8_codec_for(D)
    assert min(run_lifetime_trial(codec, seed).writes for seed in range(10)) >= D


@pytest.mark.slow
@pytest.mark.parametrize("D", [2, 3, 4])
def test_e8_guaranteed_writes_many_trials(D):
    codec = e8_codec_for(D)
    assert min(run_lifetime_trial(codec, seed).writes for seed in range(100)) >= D


def test_adversary(unit_line):
    assert adversarial_min_writes(unit_line(4)) == 4
    assert adversarial_min_writes(unit_line(40), depth_cap=10) == 10
    with pytest.raises(TooLarge):
        adversarial_min_writes(e8_codec_for(2))
    with pytest.raises(ParameterError):
        adversarial_min_writes(e8_codec_for(2), sample_words=0)


@pytest.mark.parametrize("D", [2, 3])
def test_sampled_adversary_on_e8(D):
    codec = e8_codec_for(D)
    writes = adversarial_min_writes(codec, sample_words=16, seed=5)
    assert writes >= D
    assert writes == adversarial_min_writes(codec, sample_words=16, seed=5)


@pytest.mark.slow
def test_sampled_adversary_on_e8_d4():
    assert adversarial_min_writes(e8_codec_for(4), sample_words=64) >= 4


def test_summarize():
    assert summarize([1, 1, 1]) == (1.0, 0.0)
    mean, ci95 = summarize([1, 3])
    assert mean == 2.0
    assert ci95 == pytest.approx(1.96)
    assert summarize([5]) == (5.0, 0.0)


def test_sweep_rows_and_notes():
    rows = sweep(skew2_generator(), q_values=[11, 2], M_values=[5], trials=5, base_seed=1, key=3)
    assert [(row.q, row.M) for row in rows] == [(2, 5), (11, 5)]
    skipped, feasible = rows
    assert skipped.mean_writes is None and "< 1" in skipped.note
    assert feasible.D == 2 and feasible.note == ""
    assert feasible.mean_writes >= 2
    assert feasible.trials == 5 and feasible.seed == 1


def test_sweep_non_integer_radix():
    rows = sweep(e8_generator(), q_values=[7], M_values=[3, 2], trials=2)
    by_m = {row.M: row for row in rows}
    assert by_m[3].mean_writes is None and "r_8" in by_m[3].note
    assert by_m[2].mean_writes is not None


def test_sweep_orders_by_rate():
    rows = sweep(rectangular_generator(1), q_values=[9], M_values=[8, 1, 2, 4], trials=2)
    assert [row.M for row in rows] == [1, 2, 4, 8]
    assert [row.rate for row in rows] == pytest.approx([0.0, 1.0, 2.0, 3.0])


def test_sweep_rejects_zero_trials():
    with pytest.raises(ParameterError):
        sweep(skew2_generator(), [11], [5], trials=0)


def test_sweep_csv_is_deterministic_across_jobs():
    kwargs = dict(q_values=[11, 6], M_values=[5], trials=6, base_seed=4, key=9)
    serial = write_sweep_csv(sweep(skew2_generator(), jobs=1, **kwargs))
    parallel = write_sweep_csv(sweep(skew2_generator(), jobs=2, **kwargs))
    assert serial == parallel
    lines = serial.splitlines()
    assert lines[0] == ",".join(SWEEP_CSV_HEADER)
    assert len(lines) == 3


def test_sweep_row_csv_fields():
    row = SweepRow(q=6, M=2, D=Fraction(5, 2), rate=1.0, mean_writes=3.25, ci95=0.5, trials=10, seed=0)
    assert row.csv_fields() == ("6", "2", "2.5", "1.000000", "3.250000", "0.500000", "10", "0", "neighbors", "")
    assert row.model_dump()["D"] == "2.5"


def test_linearity_exact_on_single_word_memory():
    fit = linearity_check(rectangular_generator(1), 1, [2, 3, 4, 5], trials=3)
    assert fit.slope == pytest.approx(1.0)
    assert fit.intercept == pytest.approx(0.0, abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.points == [("2", 2.0), ("3", 3.0), ("4", 4.0), ("5", 5.0)]


def test_linearity_needs_two_values():
    with pytest.raises(InsufficientData):
        linearity_check(rectangular_generator(1), 1, [3, Fraction(3)], trials=2)


def _sweep_means(q_minus_one, M_values, trials=1000):
    rows = sweep(e8_generator(), [q_minus_one + 1], M_values, trials, jobs=4, key=1)
    return [row for row in rows if row.mean_writes is not None]


@pytest.mark.slow
@pytest.mark.parametrize("q_minus_one", [16, 32])
def test_e8_writes_fall_with_rate(q_minus_one):
    rows = _sweep_means(q_minus_one, [2, 4, 8, 16])
    for low, high in zip(rows, rows[1:]):
        assert high.mean_writes <= low.mean_writes + low.ci95 + high.ci95


@pytest.mark.slow
def test_e8_writes_grow_with_levels():
    (small,) = _sweep_means(16, [4])
    (large,) = _sweep_means(32, [4])
    assert large.mean_writes - large.ci95 > small.mean_writes + small.ci95


@pytest.mark.slow
def test_e8_writes_roughly_linear_in_d():
    fit = linearity_check(e8_generator(), 4, [2, 3, 4, 5, 6], trials=1000, jobs=4, key=1)
    assert fit.r_squared >= 0.9
    assert fit.slope > 0
