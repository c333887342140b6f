import logging
import sys
from pathlib import Path
from typing import List, Literal, Optional

import orjson
import typer
from pydantic import BaseModel, Field, ValidationError, field_validator

from algebra.errors import CertificateError, LoopStabError, PreconditionError
from algebra.free_group import format_word
from algebra.loop_subgroup import LoopSubgroup
from algebra.matrix_group import reduce_mod
from algebra.permutation import decompose_even, evaluate, parse_cycles, standard_cycles, sw_exponent_sums
from config import CLOSURE_CAP, LOG_FORMAT, LOG_LEVEL, RANDOM_SEED
from processors import ExcludedCase, ExcludedCaseVerifier, ReportFormatter, SharpBoundVerifier, StabilizerBuilder

EXIT_PASSED = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

app = typer.Typer(
    name="loopstab",
    help="Certified stabilizer automorphisms of loop subgroups and their mod-2 images",
    no_args_is_help=True,
    add_completion=False,
)


class RunConfig(BaseModel):
    """Validated options shared by every subcommand"""

    subcommand: Literal["verify", "graph", "decompose", "preimage"]
    loops: List[int] = Field(default_factory=list)
    modulus: int = Field(default=2, ge=2)
    cap: Optional[int] = Field(default=None, ge=1)
    seed: int = RANDOM_SEED
    out: Optional[Path] = None
    format: Literal["json", "text", "dot"] = "json"
    verbose: bool = False

    @field_validator("loops")
    @classmethod
    def _loops_positive(cls, loops: List[int]) -> List[int]:
        if any(s < 1 for s in loops):
            raise ValueError(f"loop lengths must be >= 1, got {loops}")
        return loops


def setup_logging(verbose: bool):
    """Log to stderr so stdout stays machine-readable"""
    level = logging.DEBUG if verbose else getattr(logging, LOG_LEVEL.upper(), logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def _fail(message: str, code: int = EXIT_USAGE):
    typer.echo(f"❌ {message}", err=True)
    raise typer.Exit(code=code)


def _parse_loops(text: str) -> List[int]:
    try:
        return list(LoopSubgroup.parse(text).loops)
    except ValueError as e:
        _fail(str(e))


def _run_config(**options) -> RunConfig:
    try:
        config = RunConfig(**options)
    except ValidationError as e:
        _fail(f"invalid options: {e.errors()[0]['msg']}")
    setup_logging(config.verbose)
    return config


def _emit(text: str, out: Optional[Path]):
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
    typer.echo(text, nl=False)


@app.command()
def verify(
    loops: str = typer.Option(..., "--loops", help="Loop lengths, e.g. 3,3,1"),
    cap: Optional[int] = typer.Option(None, "--cap", help=f"Maximum closure size (default {CLOSURE_CAP}; give it explicitly for rank 5)"),
    seed: int = typer.Option(RANDOM_SEED, "--seed", help="Seed for the randomized checks"),
    trials: Optional[int] = typer.Option(None, "--trials", help="Number of randomized samples"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the JSON report here"),
    fmt: str = typer.Option("json", "--format", help="json or text"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Verify the mod-2 image of the stabilizer (or the s1/1/.../1 case)"""
    config = _run_config(subcommand="verify", loops=_parse_loops(loops), cap=cap, seed=seed,
                         out=out, format=fmt, verbose=verbose)
    if config.format == "dot":
        _fail("verify reports are json or text")

    U = LoopSubgroup(tuple(config.loops))
    options = {} if trials is None else {"trials": trials}
    try:
        if U.looplet_count() == U.r - 1:
            report = ExcludedCaseVerifier(ExcludedCase.from_loop_subgroup(U), cap=config.cap, seed=config.seed,
                                          **options).verify_excluded()
        else:
            verifier = SharpBoundVerifier(U, cap=config.cap, seed=config.seed, **options)
            verifier.check_preconditions()
            report = verifier.verify_sharpbound()
    except PreconditionError as e:
        _fail(str(e))

    formatter = ReportFormatter()
    if config.out is not None:
        formatter.save(report, str(config.out))
    typer.echo(formatter.to_json(report) if config.format == "json" else formatter.to_text(report), nl=False)
    raise typer.Exit(code=EXIT_PASSED if report["passed"] else EXIT_FAILED)


@app.command()
def graph(
    loops: str = typer.Option(..., "--loops", help="Loop lengths, e.g. 3,3,1"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the DOT text here"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Print the left coset graph in DOT format"""
    config = _run_config(subcommand="graph", loops=_parse_loops(loops), out=out, format="dot", verbose=verbose)
    _emit(LoopSubgroup(tuple(config.loops)).coset_graph_dot(), config.out)


@app.command()
def decompose(
    n: int = typer.Option(..., "--n", help="Number of points"),
    m: int = typer.Option(..., "--m", help="Length of the first cycle (1..m)"),
    cycles: str = typer.Option(..., "--cycles", help="Even permutation in cycle notation, e.g. (1,2,4)"),
    fmt: str = typer.Option("text", "--format", help="text or json"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Write an even permutation as a word in (1..m) and (1, m+1..n)"""
    config = _run_config(subcommand="decompose", format=fmt, verbose=verbose)
    try:
        target = parse_cycles(cycles, n)
        word = decompose_even(target, m)
        sigma, omega = standard_cycles(m, n)
    except ValueError as e:
        _fail(str(e))

    check = evaluate(word, sigma, omega) == target
    if config.format == "json":
        payload = {
            "target": str(target),
            "word": format_word(word),
            "exponent_sums": list(sw_exponent_sums(word)),
            "check": check,
        }
        typer.echo(orjson.dumps(payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS).decode())
    else:
        typer.echo(format_word(word))
        typer.echo(f"check: {'passed' if check else 'failed'} (evaluates to {target})")
    raise typer.Exit(code=EXIT_PASSED if check else EXIT_FAILED)


@app.command()
def preimage(
    loops: str = typer.Option(..., "--loops", help="Loop lengths, e.g. 3,3,1"),
    kind: str = typer.Option(..., "--kind", help="odd, squared, double, commutator or tau"),
    i: int = typer.Option(..., "--i"),
    j: int = typer.Option(1, "--j"),
    k: Optional[int] = typer.Option(None, "--k"),
    modulus: int = typer.Option(2, "--modulus", help="Also print the B-image reduced mod this modulus"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Build one certified stabilizer and print its images, B-image and certificate"""
    config = _run_config(subcommand="preimage", loops=_parse_loops(loops), modulus=modulus, verbose=verbose)
    U = LoopSubgroup(tuple(config.loops))
    try:
        stabilizer = StabilizerBuilder(U).preimage(kind, i, j, k)
    except PreconditionError as e:
        _fail(str(e))
    except CertificateError as e:
        _fail(str(e), EXIT_FAILED)
    except LoopStabError as e:
        _fail(str(e))

    reduced = reduce_mod(stabilizer.target, config.modulus)
    summary = {
        "loops": list(U.loops),
        **stabilizer.summary(U),
        "modulus": config.modulus,
        "b_matrix_mod": [list(row) for row in reduced.entries],
    }
    typer.echo(orjson.dumps(summary, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS).decode())


def main():
    """Console entry point"""
    app()


if __name__ == "__main__":
    main()
