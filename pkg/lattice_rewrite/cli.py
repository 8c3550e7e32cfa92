import csv
import io
import json
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from .codebook import ENUMERATION_CAP, block_of, codebook_size_formula, enumerate_codebook, rate
from .codec import Codec, Strategy, remaining_volume
from .config import (
    RunConfig,
    load_config,
    load_generator,
    merge_overrides,
    resolve_code,
    resolve_lattice,
)
from .errors import ConfigError, LatticeRewriteError, ParameterError
from .lattice import (
    determinant,
    format_decimal,
    format_rational,
    format_vector,
    parse_vector,
    scale_factor,
    shortest_vectors,
)
from .logging_config import console, set_log_level, setup_logging
from .memsim import (
    MemoryState,
    adversarial_min_writes,
    linearity_check,
    sweep,
    write_sweep_csv,
)

# ---------------------------------------------------------------------------
# Typer app setup
# ---------------------------------------------------------------------------

app = typer.Typer(help="Lattice rewriting codes for flash memory", no_args_is_help=True)
logger = setup_logging()

# Results go to stdout; logs and errors go to the stderr console.
out_console = Console()


# ---------------------------------------------------------------------------
# Global options
# ---------------------------------------------------------------------------


def log_level_callback(value: str):
    """Callback for log level option."""
    if value:
        try:
            set_log_level(value)
        except ValueError as e:
            raise typer.BadParameter(str(e))
    return value


LOG_LEVEL = typer.Option(
    None,
    "--log-level",
    "-l",
    help="Set the logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)",
    callback=log_level_callback,
)
CONFIG = typer.Option(None, "--config", help="RunConfig JSON file (default: $LATTICE_REWRITE_CONFIG)")
LATTICE = typer.Option(None, "--lattice", help="Built-in lattice (e8, rect, skew2) or definition file")
DIMENSION = typer.Option(None, "--n", help="Dimension for the rect lattice")
BLOCK_SIDE = typer.Option(None, "--M", help="Block side length M")
LEVELS = typer.Option(None, "--q", help="Number of levels q (q - 1 = D * M)")
BLOCKS = typer.Option(None, "--D", help="Blocks per axis D, e.g. 2 or 3/2")
KEY = typer.Option(None, "--key", help="64-bit hash key")
SEED = typer.Option(None, "--seed", help="Base seed for random trials")
TRIALS = typer.Option(None, "--trials", help="Lifetime trials per parameter point")
STRATEGY = typer.Option(None, "--strategy", help="Rewrite candidate search")
HASH_OFF = typer.Option(False, "--hash-off", help="Use the zero hash vector in every block")
JOBS = typer.Option(None, "--jobs", help="Worker processes")
OUT = typer.Option(None, "--out", help="Write CSV here instead of stdout")


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


@contextmanager
def _handle_errors() -> Iterator[None]:
    """Report library errors in red and exit with the error's code."""
    try:
        yield
    except ValidationError as exc:
        console.print(f"[red]Invalid configuration:[/red] {escape(str(exc))}")
        raise typer.Exit(ParameterError.exit_code)
    except LatticeRewriteError as exc:
        console.print(f"[red]{type(exc).__name__}:[/red] {escape(str(exc))}")
        raise typer.Exit(exc.exit_code)


def _split(text: Optional[str]) -> Optional[List[str]]:
    if text is None:
        return None
    return [part.strip() for part in text.split(",") if part.strip()]


def _parse_ints(text: str, label: str) -> List[int]:
    values = []
    for part in _split(text) or []:
        try:
            values.append(int(part))
        except ValueError as exc:
            raise ParameterError(f"{label} must be comma-separated integers, got {part!r}") from exc
    return values


def _resolve_config(
    config_path: Optional[Path], hash_off: bool = False, **overrides: Any
) -> RunConfig:
    config = load_config(config_path)
    return merge_overrides(config, hash_off=True if hash_off else None, **overrides)


def _codec(config: RunConfig) -> Codec:
    lattice, params = resolve_code(config)
    return Codec(lattice, params, config.key, hash_off=config.hash_off)


def _emit_csv(text: str, out: Optional[Path]) -> None:
    if out is None:
        typer.echo(text, nl=False)
        return
    Path(out).write_text(text)
    console.print(f"[green]Wrote {out}[/green]")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


@app.command("info")
def info(
    config_path: Optional[Path] = CONFIG,
    lattice: Optional[str] = LATTICE,
    n: Optional[int] = DIMENSION,
    block_side: Optional[int] = BLOCK_SIDE,
    levels: Optional[str] = LEVELS,
    blocks: Optional[str] = BLOCKS,
    as_json: bool = typer.Option(False, "--json", help="Print a JSON report"),
    short_vectors: bool = typer.Option(
        False, "--short-vectors", help="Enumerate minimal vectors (kissing number)"
    ),
    log_level: str = LOG_LEVEL,
):
    """Lattice and code summary: det G, radices, rate and codebook sizes."""
    with _handle_errors():
        config = _resolve_config(config_path, lattice=lattice, n=n, M=block_side, q=levels, D=blocks)
        spec = resolve_lattice(config)
        det = determinant(spec.generator)
        report: Dict[str, Any] = {
            "lattice": config.lattice,
            "n": spec.n,
            "M": spec.M,
            "det": format_rational(det),
            "radices": list(spec.radices),
            "words": spec.word_count,
            "information_bits": spec.information_bits,
            "scale_factor": scale_factor(spec.generator),
        }
        if config.q is not None or config.D is not None:
            params = config.code_params(spec.n, spec.M)
            full, per_block = codebook_size_formula(params, det)
            report.update(
                rate=rate(params, det),
                q=format_rational(params.q),
                D=format_rational(params.D),
                codebook_size=format_rational(full),
                block_codebook_size=format_rational(per_block),
            )
        else:
            report["rate"] = spec.information_bits / spec.n
        if short_vectors:
            minimum, vectors = shortest_vectors(spec.generator)
            report.update(min_squared_norm=format_rational(minimum), kissing_number=len(vectors))

    if as_json:
        typer.echo(json.dumps(report, indent=2))
        return

    table = Table(title=f"Lattice {config.lattice}", show_header=True, header_style="bold magenta")
    table.add_column("Property", style="cyan")
    table.add_column("Value", style="green")
    for name, value in report.items():
        if isinstance(value, float):
            value = f"{value:.6f}"
        table.add_row(name, str(value))
    out_console.print(table)


@app.command("encode")
def encode(
    word: str = typer.Option(..., "--word", help="Information word u, e.g. 4,1"),
    state: Optional[str] = typer.Option(
        None, "--state", help="Current cell values s, e.g. 2,4 or 1/2,3 (default: erased memory)"
    ),
    config_path: Optional[Path] = CONFIG,
    lattice: Optional[str] = LATTICE,
    n: Optional[int] = DIMENSION,
    block_side: Optional[int] = BLOCK_SIDE,
    levels: Optional[str] = LEVELS,
    blocks: Optional[str] = BLOCKS,
    key: Optional[int] = KEY,
    strategy: Optional[Strategy] = STRATEGY,
    hash_off: bool = HASH_OFF,
    log_level: str = LOG_LEVEL,
):
    """Write u on top of state s and print the chosen block and codeword.

    Without --state, or with every cell at zero, the memory is erased and u goes
    into block (0, ..., 0).
    """
    with _handle_errors():
        config = _resolve_config(
            config_path, hash_off, lattice=lattice, n=n, M=block_side, q=levels, D=blocks,
            key=key, strategy=strategy,
        )
        codec = _codec(config)
        u = _parse_ints(word, "--word")
        cells = (0,) * codec.n if state is None else parse_vector(_split(state))
        mem = MemoryState(s=tuple(cells))
        if len(mem.s) == codec.n and mem.erased:
            codeword = codec.encode(u, (0,) * codec.n)
        else:
            codeword = codec.select_rewrite(u, mem.s, config.strategy)
        volume = remaining_volume(codeword.x, codec.params)

    typer.echo(f"block: {format_vector(codeword.block)}")
    typer.echo(f"x: {format_vector(codeword.x)}")
    typer.echo(f"b: {format_vector(codeword.b)}")
    typer.echo(f"remaining_volume: {format_rational(volume)}")


@app.command("decode")
def decode(
    point: str = typer.Option(..., "--point", help="Codeword x, e.g. 7,3/2"),
    config_path: Optional[Path] = CONFIG,
    lattice: Optional[str] = LATTICE,
    n: Optional[int] = DIMENSION,
    block_side: Optional[int] = BLOCK_SIDE,
    levels: Optional[str] = LEVELS,
    blocks: Optional[str] = BLOCKS,
    key: Optional[int] = KEY,
    hash_off: bool = HASH_OFF,
    log_level: str = LOG_LEVEL,
):
    """Recover the information word stored at x."""
    with _handle_errors():
        config = _resolve_config(
            config_path, hash_off, lattice=lattice, n=n, M=block_side, q=levels, D=blocks, key=key
        )
        codec = _codec(config)
        x = parse_vector(_split(point))
        u = codec.decode(x)
        block = block_of(x, codec.params)

    typer.echo(f"u: {format_vector(u)}")
    typer.echo(f"block: {format_vector(block)}")


@app.command("sweep")
def run_sweep(
    q_values: Optional[str] = typer.Option(None, "--q-values", help="Level counts q, e.g. 17,25,33"),
    M_values: Optional[str] = typer.Option(None, "--M-values", help="Block sides M, e.g. 2,4,8,16"),
    config_path: Optional[Path] = CONFIG,
    lattice: Optional[str] = LATTICE,
    n: Optional[int] = DIMENSION,
    key: Optional[int] = KEY,
    seed: Optional[int] = SEED,
    trials: Optional[int] = TRIALS,
    strategy: Optional[Strategy] = STRATEGY,
    hash_off: bool = HASH_OFF,
    jobs: Optional[int] = JOBS,
    out: Optional[Path] = OUT,
    log_level: str = LOG_LEVEL,
):
    """Mean word writes over a (q, M) grid, as CSV.

    Infeasible pairs stay in the CSV with a note; the command fails only when
    no pair could be simulated.
    """
    with _handle_errors():
        config = _resolve_config(
            config_path, hash_off, lattice=lattice, n=n, key=key, seed=seed, trials=trials,
            strategy=strategy, jobs=jobs, out=out,
            q_values=_parse_ints(q_values, "--q-values") if q_values else None,
            M_values=_parse_ints(M_values, "--M-values") if M_values else None,
        )
        if not config.q_values or not config.M_values:
            raise ConfigError("sweep needs q_values and M_values (--q-values, --M-values)")
        generator, _ = load_generator(config)
        rows = sweep(
            generator, config.q_values, config.M_values, config.trials, config.seed,
            key=config.key, strategy=config.strategy, hash_off=config.hash_off, jobs=config.jobs,
        )
        _emit_csv(write_sweep_csv(rows), config.out)

    table = Table(title="Sweep", show_header=True, header_style="bold magenta")
    for column in ("q", "M", "D", "rate", "mean writes", "ci95", "note"):
        table.add_column(column)
    for row in rows:
        mean = "" if row.mean_writes is None else f"{row.mean_writes:.3f}"
        ci95 = "" if row.ci95 is None else f"{row.ci95:.3f}"
        rate_text = f"{row.rate:.3f}"
        table.add_row(str(row.q), str(row.M), format_decimal(row.D), rate_text, mean, ci95, row.note)
    console.print(table)

    if all(row.mean_writes is None for row in rows):
        console.print("[red]No feasible (q, M) pair in the sweep[/red]")
        raise typer.Exit(ParameterError.exit_code)


@app.command("dump")
def dump(
    config_path: Optional[Path] = CONFIG,
    lattice: Optional[str] = LATTICE,
    n: Optional[int] = DIMENSION,
    block_side: Optional[int] = BLOCK_SIDE,
    levels: Optional[str] = LEVELS,
    blocks: Optional[str] = BLOCKS,
    key: Optional[int] = KEY,
    hash_off: bool = HASH_OFF,
    cap: int = typer.Option(ENUMERATION_CAP, "--cap", help="Refuse codebooks larger than this"),
    out: Optional[Path] = OUT,
    log_level: str = LOG_LEVEL,
):
    """Every codeword of the cube with its coefficients, block and words, as CSV."""
    with _handle_errors():
        config = _resolve_config(
            config_path, hash_off, lattice=lattice, n=n, M=block_side, q=levels, D=blocks,
            key=key, out=out,
        )
        codec = _codec(config)
        codewords = enumerate_codebook(codec.lattice, codec.params, cap)

        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(
            [f"{name}{i}" for name in ("x", "b", "d", "a", "u") for i in range(1, codec.n + 1)]
        )
        for codeword in codewords:
            a = tuple(bi % r for bi, r in zip(codeword.b, codec.radices))
            u = codec.decode(codeword.x)
            writer.writerow(
                [format_rational(v) for v in codeword.x] + list(codeword.b) + list(codeword.block)
                + list(a) + list(u)
            )
        logger.info(f"Enumerated {len(codewords)} codewords")
        _emit_csv(buffer.getvalue(), config.out)


@app.command("adversary")
def adversary(
    config_path: Optional[Path] = CONFIG,
    lattice: Optional[str] = LATTICE,
    n: Optional[int] = DIMENSION,
    block_side: Optional[int] = BLOCK_SIDE,
    levels: Optional[str] = LEVELS,
    blocks: Optional[str] = BLOCKS,
    key: Optional[int] = KEY,
    strategy: Optional[Strategy] = STRATEGY,
    hash_off: bool = HASH_OFF,
    depth_cap: int = typer.Option(10_000, "--depth-cap", help="Stop after this many writes"),
    sample_words: Optional[int] = typer.Option(
        None, "--sample-words", help="Scan this many random words per step (large codes)"
    ),
    seed: Optional[int] = SEED,
    log_level: str = LOG_LEVEL,
):
    """Writes survived against a greedy worst-case word sequence."""
    with _handle_errors():
        config = _resolve_config(
            config_path, hash_off, lattice=lattice, n=n, M=block_side, q=levels, D=blocks,
            key=key, strategy=strategy, seed=seed,
        )
        codec = _codec(config)
        writes = adversarial_min_writes(
            codec, depth_cap, strategy=config.strategy, sample_words=sample_words, seed=config.seed
        )

    typer.echo(f"writes: {writes}")


@app.command("linearity")
def linearity(
    D_values: Optional[str] = typer.Option(None, "--D-values", help="Values of D, e.g. 2,3,4,5,6"),
    config_path: Optional[Path] = CONFIG,
    lattice: Optional[str] = LATTICE,
    n: Optional[int] = DIMENSION,
    block_side: Optional[int] = BLOCK_SIDE,
    key: Optional[int] = KEY,
    seed: Optional[int] = SEED,
    trials: Optional[int] = TRIALS,
    strategy: Optional[Strategy] = STRATEGY,
    hash_off: bool = HASH_OFF,
    jobs: Optional[int] = JOBS,
    as_json: bool = typer.Option(False, "--json", help="Print the fit as JSON"),
    log_level: str = LOG_LEVEL,
):
    """Least-squares fit of mean word writes against D at fixed M."""
    with _handle_errors():
        config = _resolve_config(
            config_path, hash_off, lattice=lattice, n=n, M=block_side, key=key, seed=seed,
            trials=trials, strategy=strategy, jobs=jobs, D_values=_split(D_values),
        )
        spec = resolve_lattice(config)
        fit = linearity_check(
            spec.generator, spec.M, config.D_values, config.trials, config.seed,
            key=config.key, strategy=config.strategy, hash_off=config.hash_off, jobs=config.jobs,
        )

    if as_json:
        typer.echo(fit.model_dump_json(indent=2))
        return
    table = Table(
        title=f"Mean writes against D (M={spec.M})", show_header=True, header_style="bold magenta"
    )
    table.add_column("D", style="cyan")
    table.add_column("mean writes", style="green")
    for D, mean in fit.points:
        table.add_row(D, f"{mean:.4f}")
    out_console.print(table)
    typer.echo(f"slope: {fit.slope:.6f}")
    typer.echo(f"intercept: {fit.intercept:.6f}")
    typer.echo(f"r_squared: {fit.r_squared:.6f}")


@app.command("config")
def show_config(
    config_path: Optional[Path] = CONFIG,
    lattice: Optional[str] = LATTICE,
    n: Optional[int] = DIMENSION,
    block_side: Optional[int] = BLOCK_SIDE,
    levels: Optional[str] = LEVELS,
    blocks: Optional[str] = BLOCKS,
    key: Optional[int] = KEY,
    seed: Optional[int] = SEED,
    trials: Optional[int] = TRIALS,
    strategy: Optional[Strategy] = STRATEGY,
    hash_off: bool = HASH_OFF,
    jobs: Optional[int] = JOBS,
    out: Optional[Path] = OUT,
    log_level: str = LOG_LEVEL,
):
    """Print the resolved configuration as JSON, ready to pass back via --config."""
    with _handle_errors():
        config = _resolve_config(
            config_path, hash_off, lattice=lattice, n=n, M=block_side, q=levels, D=blocks,
            key=key, seed=seed, trials=trials, strategy=strategy, jobs=jobs, out=out,
        )
    typer.echo(config.model_dump_json(indent=2))


if __name__ == "__main__":  # pragma: no cover
    app()
