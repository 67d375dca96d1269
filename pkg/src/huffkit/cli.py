"""Command-line surface for construction, analysis, and the imaging demos.

Every command writes its artifacts into ``--out`` (default: ``$HUFFKIT_OUT``
or the working directory) together with a ``<name>.run.json`` provenance
record holding the resolved arguments, the library versions, and the seed —
never a timestamp, so re-running with identical flags reproduces every CSV
and JSON byte for byte (PGM renders may differ by a rounding ulp in real
mode).

Exit codes: 0 success, 1 usage, 2 I/O, 3 domain (constraint violation),
4 numerical (divergence).
"""

from __future__ import annotations

import json
import math
import os
import platform
import sys
from pathlib import Path

import click
import numpy as np
import scipy

from . import __version__
from .construct import HuffmanSpec, build, diamond7_closed_form, diamond7_solve
from .continuum import ProbeSpec, airy, discretize_and_tweak, synthesize_probe, verify_delta_correlation
from .lattice import Tensor, as_tensor, correlate, read_pgm, read_text, write_pgm, write_text
from .metrics import classify, cross_metrics
from .project import as_direction, project, project3, twin as twin_of
from . import imaging

_EXIT_USAGE = 1
_EXIT_IO = 2
_EXIT_DOMAIN = 3
_EXIT_NUMERICAL = 4


class DivergenceError(RuntimeError):
    """An iteration diverged; maps to exit code 4."""


class _Group(click.Group):
    """Group whose main() maps exceptions onto the fixed exit-code taxonomy."""

    def main(self, *args, **kwargs):  # noqa: D102 - click override
        kwargs.setdefault("standalone_mode", False)
        try:
            return super().main(*args, **kwargs)
        except click.exceptions.Exit as exc:  # --help and friends
            sys.exit(exc.exit_code)
        except click.Abort:
            click.echo("aborted", err=True)
            sys.exit(_EXIT_USAGE)
        except click.ClickException as exc:  # includes UsageError
            click.echo(f"usage error: {exc.format_message()}", err=True)
            sys.exit(_EXIT_USAGE)
        except DivergenceError as exc:
            click.echo(f"numerical error: {exc}", err=True)
            sys.exit(_EXIT_NUMERICAL)
        except OSError as exc:
            click.echo(f"i/o error: {exc}", err=True)
            sys.exit(_EXIT_IO)
        except (ValueError, KeyError) as exc:  # all module domain errors
            click.echo(f"domain error: {exc}", err=True)
            sys.exit(_EXIT_DOMAIN)


@click.group(cls=_Group)
@click.option(
    "--threads",
    type=click.IntRange(min=1),
    default=None,
    help="Cap worker threads. Execution is sequential either way, so this "
    "never changes results.",
)
def main(threads: int | None) -> None:
    """Delta-correlated arrays: construct, score, project, image."""
    if threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(threads)


# ---------------------------------------------------------------------------
# shared plumbing


def _out_dir(out: str | None) -> Path:
    base = Path(out) if out else Path(os.environ.get("HUFFKIT_OUT", "."))
    base.mkdir(parents=True, exist_ok=True)
    return base


def _read_tensor(path: str) -> Tensor:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such file: {p}")
    if p.suffix.lower() == ".pgm":
        return read_pgm(p)
    return read_text(p)


def _write_tensor(t: Tensor, path: Path) -> None:
    if path.suffix.lower() == ".pgm":
        write_pgm(t, path)
    else:
        write_text(t, path)


def _plot_pgm(t: Tensor, path: Path) -> None:
    """Grey-scale render; 1D data becomes a one-pixel-high strip."""
    arr = np.asarray(t.data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    write_pgm(Tensor(arr, "real"), path)


def _json_text(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=_json_safe) + "\n"


def _json_safe(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"not JSON-safe: {value!r}")


def _emit_run(
    out: Path,
    stem: str,
    command: str,
    arguments: dict,
    files: list[str],
    seed: int | None = None,
    results: dict | None = None,
) -> Path:
    record = {
        "command": command,
        "arguments": arguments,
        "files": sorted(files),
        "seed": seed,
        "package": {"name": "huffkit", "version": __version__},
        "versions": {
            "click": click.__version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "scipy": scipy.__version__,
        },
    }
    if results is not None:
        record["results"] = results
    path = out / f"{stem}.run.json"
    path.write_text(_json_text(record))
    return path


def _report_payload(report) -> dict:
    return json.loads(report.to_json())


def _parse_ints(text: str, what: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise click.UsageError(f"{what} must be comma-separated integers, got {text!r}")


def _parse_kappa(text: str, mask: Tensor, floor: str) -> float:
    """'auto' resolves to the smallest admissible pedestal for the mask."""
    if text == "auto":
        data = np.asarray(mask.data, dtype=np.float64)
        return float(data.max()) if floor == "maxabs" else max(0.0, -float(data.min()))
    try:
        return float(text)
    except ValueError:
        raise click.UsageError(f"--kappa must be a number or 'auto', got {text!r}")


_FAMILY_ALIASES = {
    "fibonacci": "fibonacci_binet",
    "h5": "h5_family",
    "catalog": "catalog",
    "even": "even_length",
    "diamond5": "diamond5",
    "diamond7": "diamond7",
    "outer": "outer_product",
}


# ---------------------------------------------------------------------------
# construction and analysis


@main.command()
@click.option("--family", required=True, type=click.Choice(sorted(_FAMILY_ALIASES)))
@click.option("--length", "-N", "--N", "length", type=int, help="Sequence length (4n+3 family).")
@click.option("--b", type=int, default=2, show_default=True, help="Even base of the recurrence family.")
@click.option("--n", type=int, help="Index within the length-5 family.")
@click.option("--variant", type=click.Choice(["even", "odd"]), default="even", show_default=True)
@click.option("--key", help="Catalog entry name (see `generate --family catalog --key help`).")
@click.option("--alphabet", help="Comma-separated template letters (6 for 5x5, 8 for 7x7).")
@click.option("--e", type=int, help="7x7 inner-diamond letter.")
@click.option("--f", type=int, help="7x7 free letter; with --e 3 and no --g/--h, uses the closed form.")
@click.option("--g", type=int)
@click.option("--h", "h_letter", type=int)
@click.option("--factor", "factors", multiple=True, help="Outer-product factor, e.g. catalog:H9 or fibonacci_binet:15:2.")
@click.option("--name", help="Output file stem.")
@click.option("--out", help="Output directory (default $HUFFKIT_OUT or cwd).")
def generate(family, length, b, n, variant, key, alphabet, e, f, g, h_letter, factors, name, out):
    """Construct an array from a named family and score it."""
    family = _FAMILY_ALIASES[family]
    parts = [f"family={family}"]
    if family == "fibonacci_binet":
        if length is None:
            raise click.UsageError("--length is required for the fibonacci family")
        parts += [f"N={length}", f"b={b}"]
    elif family == "h5_family":
        if n is None:
            raise click.UsageError("--n is required for the h5 family")
        parts += [f"n={n}", f"variant={variant}"]
    elif family in ("catalog", "even_length"):
        if key is None:
            raise click.UsageError("--key is required for catalog entries")
        parts.append(f"key={key}")
    elif family in ("diamond5", "diamond7"):
        if alphabet is None and family == "diamond7" and e is not None and f is not None:
            if g is None or h_letter is None:
                if e != 3:
                    raise click.UsageError("--g/--h can only be omitted for --e 3 (closed form)")
                g, h_letter = diamond7_closed_form(f)
            alphabet = ",".join(str(v) for v in (0, 0, 0, 1, e, f, g, h_letter))
        if alphabet is None:
            raise click.UsageError(f"--alphabet (or --e/--f for diamond7) is required for {family}")
        _parse_ints(alphabet, "--alphabet")
        parts.append(f"alphabet={alphabet}")
    elif family == "outer_product":
        if not factors:
            raise click.UsageError("at least one --factor is required for outer products")
        parts.append("factors=" + ",".join(factors))
    spec = HuffmanSpec.from_text(" ".join(parts))
    tensor = build(spec)
    report = classify(tensor)

    out_path = _out_dir(out)
    stem = name or "generate_" + spec.to_text().replace("family=", "").replace(" ", "_").replace("=", "-").replace(",", "_").replace(":", "-")
    files = [f"{stem}.txt", f"{stem}.report.json"]
    write_text(tensor, out_path / files[0])
    (out_path / files[1]).write_text(_json_text(_report_payload(report)))
    _emit_run(out_path, stem, "generate", {"spec": spec.to_text()}, files,
              results={"shape": list(tensor.shape)})
    click.echo(report.to_json())


@main.command()
@click.argument("input_path", metavar="INPUT")
@click.option("--oversample", type=click.IntRange(min=1), default=1, show_default=True,
              help="Zero-padding factor for the spectral-flatness DFT.")
@click.option("--plot", is_flag=True, help="Also render |auto-correlation| as PGM.")
@click.option("--name", help="Output file stem.")
@click.option("--out", help="Output directory.")
def analyze(input_path, oversample, plot, name, out):
    """Score an array: merit factor, side-lobe ratio, flatness, class."""
    tensor = _read_tensor(input_path)
    report = classify(tensor)
    payload = _report_payload(report)
    if oversample > 1:
        from .metrics import spectral_flatness

        payload["S"] = spectral_flatness(tensor, oversample=oversample)
        payload["S_oversample"] = oversample

    out_path = _out_dir(out)
    stem = name or f"analyze_{Path(input_path).stem}"
    files = [f"{stem}.report.json"]
    (out_path / files[0]).write_text(_json_text(payload))
    if plot:
        corr = correlate(tensor, tensor)
        mags = Tensor(np.abs(np.asarray(corr.values.data, dtype=np.float64)), "real")
        files.append(f"{stem}.corr.pgm")
        _plot_pgm(mags, out_path / files[-1])
    _emit_run(out_path, stem, "analyze", {"input": input_path, "oversample": oversample}, files)
    click.echo(json.dumps(payload, sort_keys=True, default=_json_safe))


@main.command(name="project")
@click.argument("input_path", metavar="INPUT")
@click.option("--dir", "direction", required=True, help="Projection direction p:q (2D) or p:q:r (3D).")
@click.option("--name", help="Output file stem.")
@click.option("--out", help="Output directory.")
def project_cmd(input_path, direction, name, out):
    """Project an array along a rational direction and score the result."""
    tensor = _read_tensor(input_path)
    d = as_direction(direction, ndim=tensor.ndim)
    projected = project3(tensor, d) if tensor.ndim == 3 else project(tensor, d)
    report = classify(projected)

    out_path = _out_dir(out)
    stem = name or f"project_{Path(input_path).stem}_{str(d).replace(':', '_').replace('-', 'm')}"
    files = [f"{stem}.txt", f"{stem}.report.json"]
    write_text(projected, out_path / files[0])
    (out_path / files[1]).write_text(_json_text(_report_payload(report)))
    _emit_run(out_path, stem, "project", {"input": input_path, "dir": str(d)}, files,
              results={"shape": list(projected.shape)})
    click.echo(report.to_json())


@main.command(name="twin")
@click.argument("input_path", metavar="INPUT")
@click.option("--name", help="Output file stem.")
@click.option("--out", help="Output directory.")
def twin_cmd(input_path, name, out):
    """Emit the parity-flipped twin and its cross-correlation metrics."""
    tensor = _read_tensor(input_path)
    tw = twin_of(tensor)
    cross_r, cross_m = cross_metrics(correlate(tensor, tw))
    report = classify(tw)
    payload = _report_payload(report)
    payload["cross_R"] = cross_r
    payload["cross_M"] = cross_m

    out_path = _out_dir(out)
    stem = name or f"twin_{Path(input_path).stem}"
    files = [f"{stem}.txt", f"{stem}.report.json"]
    write_text(tw, out_path / files[0])
    (out_path / files[1]).write_text(_json_text(payload))
    _emit_run(out_path, stem, "twin", {"input": input_path}, files,
              results={"cross_R": cross_r, "cross_M": cross_m})
    click.echo(json.dumps({"cross_R": cross_r, "cross_M": cross_m}, sort_keys=True, default=_json_safe))


# ---------------------------------------------------------------------------
# continuum


def _parse_coeff(text: str) -> tuple[tuple[int, ...], float]:
    if "=" not in text:
        raise click.UsageError(f"--coeff needs EXPONENTS=VALUE, got {text!r}")
    key, _, value = text.partition("=")
    exps = tuple(int(v) for v in key.split(","))
    if "/" in value:
        num, _, den = value.partition("/")
        coeff = float(num) / float(den)
    else:
        coeff = float(value)
    return exps, coeff


@main.command()
@click.option("--spec", "spec_path", help="ProbeSpec JSON file (alternative to flags).")
@click.option("--coeff", "coeffs", multiple=True,
              help="Phase monomial EXPONENTS=VALUE, e.g. 3=1/3 or 1,2=0.5; repeatable.")
@click.option("--samples", help="Grid points per axis, e.g. 257 or 64,64.")
@click.option("--step", type=float, default=1.0, show_default=True)
@click.option("--bandwidth", type=float, default=1.0, show_default=True)
@click.option("--kappa", type=float, default=0.0, show_default=True)
@click.option("--plot", is_flag=True, help="Also render the probe as PGM.")
@click.option("--name", help="Output file stem.")
@click.option("--out", help="Output directory.")
def probe(spec_path, coeffs, samples, step, bandwidth, kappa, plot, name, out):
    """Synthesize a flat-spectrum probe from an odd polynomial phase."""
    if spec_path:
        spec = ProbeSpec.from_json(Path(spec_path).read_text())
    else:
        if not coeffs or not samples:
            raise click.UsageError("--coeff and --samples are required without --spec")
        spec = ProbeSpec(
            coefficients=dict(_parse_coeff(c) for c in coeffs),
            samples=_parse_ints(samples, "--samples"),
            step=step,
            bandwidth=bandwidth,
            kappa=kappa,
        )
    tensor = synthesize_probe(spec)
    delta = verify_delta_correlation(tensor)

    out_path = _out_dir(out)
    stem = name or "probe"
    files = [f"{stem}.txt", f"{stem}.spec.json", f"{stem}.delta.json"]
    write_text(tensor, out_path / files[0])
    (out_path / files[1]).write_text(spec.to_json() + "\n")
    (out_path / files[2]).write_text(
        _json_text({"peak": delta.peak, "periodic_rel": delta.periodic_rel,
                    "aperiodic_rel": delta.aperiodic_rel})
    )
    if plot:
        files.append(f"{stem}.pgm")
        _plot_pgm(tensor, out_path / files[-1])
    _emit_run(out_path, stem, "probe", {"spec": json.loads(spec.to_json())}, files,
              results={"periodic_rel": delta.periodic_rel, "aperiodic_rel": delta.aperiodic_rel})
    click.echo(json.dumps({"periodic_rel": delta.periodic_rel,
                           "aperiodic_rel": delta.aperiodic_rel},
                          sort_keys=True, default=_json_safe))


@main.command()
@click.argument("input_path", metavar="[INPUT]", required=False)
@click.option("--airy", "airy_window", help="Sample Ai(x) instead of reading INPUT: LO:HI:STEP, e.g. -40:8:0.5.")
@click.option("--bits", type=click.IntRange(min=3), default=7, show_default=True)
@click.option("--objective", type=click.Choice(["M", "R"]), default="M", show_default=True)
@click.option("--max-iters", type=click.IntRange(min=0), default=500, show_default=True)
@click.option("--name", help="Output file stem.")
@click.option("--out", help="Output directory.")
def discretize(input_path, airy_window, bits, objective, max_iters, name, out):
    """Round a real sequence to integers and greedily tweak it delta-ward."""
    if (input_path is None) == (airy_window is None):
        raise click.UsageError("give exactly one of INPUT or --airy")
    if airy_window:
        try:
            lo, hi, step = (float(v) for v in airy_window.split(":"))
        except ValueError:
            raise click.UsageError(f"--airy must be LO:HI:STEP, got {airy_window!r}")
        if step <= 0 or hi <= lo:
            raise click.UsageError("--airy needs HI > LO and STEP > 0")
        tensor = airy(np.arange(lo, hi + step / 2, step))
        source = {"airy": airy_window}
    else:
        tensor = _read_tensor(input_path)
        source = {"input": input_path}
    result = discretize_and_tweak(tensor, bits, objective=objective, max_iters=max_iters)
    if result.undefined:
        raise click.UsageError("input has no nonzero samples; nothing to tweak")

    out_path = _out_dir(out)
    stem = name or "discretize"
    payload = _report_payload(result.report)
    payload["iterations"] = result.iterations
    files = [f"{stem}.txt", f"{stem}.report.json"]
    write_text(result.tensor, out_path / files[0])
    (out_path / files[1]).write_text(_json_text(payload))
    _emit_run(out_path, stem, "discretize",
              dict(source, bits=bits, objective=objective, max_iters=max_iters), files,
              results={"iterations": result.iterations, "M": payload["M"], "R": payload["R"]})
    click.echo(json.dumps({"iterations": result.iterations, "M": payload["M"],
                           "R": payload["R"]}, sort_keys=True, default=_json_safe))


# ---------------------------------------------------------------------------
# imaging


@main.command()
@click.argument("object_path", metavar="OBJECT")
@click.argument("mask_path", metavar="MASK")
@click.option("--plot", is_flag=True, help="Also render the blurred image as PGM.")
@click.option("--name", help="Output file stem.")
@click.option("--out", help="Output directory.")
def encode(object_path, mask_path, plot, name, out):
    """Blur an object with a diffuse mask (full cross-correlation)."""
    obj = _read_tensor(object_path)
    mask = _read_tensor(mask_path)
    blurred = imaging.encode(obj, mask)

    out_path = _out_dir(out)
    stem = name or f"encode_{Path(object_path).stem}"
    files = [f"{stem}.txt"]
    write_text(blurred, out_path / files[0])
    if plot:
        files.append(f"{stem}.pgm")
        _plot_pgm(blurred, out_path / files[-1])
    _emit_run(out_path, stem, "encode", {"object": object_path, "mask": mask_path}, files,
              results={"shape": list(blurred.shape)})
    click.echo(f"blurred {blurred.shape} -> {files[0]}")


@main.command()
@click.argument("blurred_path", metavar="BLURRED")
@click.argument("mask_path", metavar="MASK")
@click.option("--plot", is_flag=True, help="Also render the estimate as PGM.")
@click.option("--name", help="Output file stem.")
@click.option("--out", help="Output directory.")
def decode(blurred_path, mask_path, plot, name, out):
    """First-order decode: back-correlate, crop, normalize by C0."""
    blurred = _read_tensor(blurred_path)
    mask = _read_tensor(mask_path)
    raw = imaging.decode(blurred, mask)
    c0 = float(correlate(mask, mask).peak)
    estimate = Tensor(np.asarray(raw.data, dtype=np.float64) / c0, "real")

    out_path = _out_dir(out)
    stem = name or f"decode_{Path(blurred_path).stem}"
    files = [f"{stem}.txt"]
    write_text(estimate, out_path / files[0])
    if plot:
        files.append(f"{stem}.pgm")
        _plot_pgm(estimate, out_path / files[-1])
    _emit_run(out_path, stem, "decode", {"blurred": blurred_path, "mask": mask_path}, files,
              results={"shape": list(estimate.shape), "C0": c0})
    click.echo(f"estimate {estimate.shape} -> {files[0]}")


@main.command()
@click.argument("blurred_path", metavar="BLURRED")
@click.argument("mask_path", metavar="MASK")
@click.option("--iterations", "-p", type=click.IntRange(min=1), default=2, show_default=True,
              help="Estimates computed; 2 = one de-blur step after the first decode.")
@click.option("--plot", is_flag=True, help="Also render the estimate as PGM.")
@click.option("--name", help="Output file stem.")
@click.option("--out", help="Output directory.")
def deblur(blurred_path, mask_path, iterations, plot, name, out):
    """Iteratively remove alias copies from a blurred image."""
    blurred = _read_tensor(blurred_path)
    mask = _read_tensor(mask_path)
    result = imaging.deblur(blurred, mask, iterations=iterations)

    out_path = _out_dir(out)
    stem = name or f"deblur_{Path(blurred_path).stem}"
    files = [f"{stem}.txt"]
    write_text(result.estimate, out_path / files[0])
    if plot:
        files.append(f"{stem}.pgm")
        _plot_pgm(result.estimate, out_path / files[-1])
    _emit_run(out_path, stem, "deblur",
              {"blurred": blurred_path, "mask": mask_path, "iterations": iterations}, files,
              results={"iterations": result.iterations, "diverged": result.diverged,
                       "step_sizes": list(result.step_sizes)})
    if result.diverged:
        raise DivergenceError(
            f"step size grew 3x in a row after {result.iterations} iterations; "
            "is the mask delta-correlated?"
        )
    click.echo(f"estimate {result.estimate.shape} -> {files[0]}")


@main.command()
@click.argument("object_path", metavar="OBJECT")
@click.argument("mask_path", metavar="MASK")
@click.option("--kappa", default="auto", show_default=True,
              help="Pedestal making both +mask and -mask exposures non-negative; 'auto' = max|mask|.")
@click.option("--name", help="Output file stem.")
@click.option("--out", help="Output directory.")
def pedestal(object_path, mask_path, kappa, name, out):
    """Two-shot acquisition: I1 - I2 with masks (+H + k) and (-H + k)."""
    obj = _read_tensor(object_path)
    mask = _read_tensor(mask_path)
    k = _parse_kappa(kappa, mask, floor="maxabs")
    diff = imaging.pedestal_pair(obj, mask, k)

    out_path = _out_dir(out)
    stem = name or f"pedestal_{Path(object_path).stem}"
    files = [f"{stem}.txt"]
    write_text(diff, out_path / files[0])
    _emit_run(out_path, stem, "pedestal",
              {"object": object_path, "mask": mask_path, "kappa": k}, files,
              results={"shape": list(diff.shape)})
    click.echo(f"difference image {diff.shape} -> {files[0]}")


def _parse_scan(text: str) -> list[slice]:
    out = []
    for part in text.split(","):
        lo, _, hi = part.partition(":")
        if not _:
            raise click.UsageError(f"--scan needs LO:HI per axis, got {part!r}")
        out.append(slice(int(lo) if lo else None, int(hi) if hi else None))
    return out


@main.command()
@click.argument("object_path", metavar="OBJECT")
@click.argument("mask_path", metavar="MASK")
@click.option("--kappa", default="auto", show_default=True,
              help="Pedestal making mask + kappa non-negative; 'auto' = -min(mask).")
@click.option("--kappa-prime", default="exact", show_default=True,
              help="'exact' (needs known object sum), 'boundary', or a number.")
@click.option("--scan", help="Recorded bucket positions as LO:HI[,LO:HI...]; rest is lost.")
@click.option("--plot", is_flag=True, help="Also render the reconstruction as PGM.")
@click.option("--name", help="Output file stem.")
@click.option("--out", help="Output directory.")
def ghost(object_path, mask_path, kappa, kappa_prime, scan, plot, name, out):
    """Bucket-signal ghost imaging with a scanned non-negative mask."""
    obj = _read_tensor(object_path)
    mask = _read_tensor(mask_path)
    k = _parse_kappa(kappa, mask, floor="min")
    if kappa_prime not in ("exact", "boundary"):
        try:
            kappa_prime = float(kappa_prime)
        except ValueError:
            raise click.UsageError(
                f"--kappa-prime must be 'exact', 'boundary', or a number, got {kappa_prime!r}"
            )
    scan_slices = _parse_scan(scan) if scan else None
    result = imaging.ghost_image(obj, mask, k, kappa_prime=kappa_prime, scan=scan_slices)

    out_path = _out_dir(out)
    stem = name or f"ghost_{Path(object_path).stem}"
    files = [f"{stem}.bucket.txt", f"{stem}.txt"]
    write_text(result.bucket, out_path / files[0])
    write_text(result.reconstruction, out_path / files[1])
    if plot:
        files.append(f"{stem}.pgm")
        _plot_pgm(result.reconstruction, out_path / files[-1])
    _emit_run(out_path, stem, "ghost",
              {"object": object_path, "mask": mask_path, "kappa": k,
               "kappa_prime": kappa_prime if isinstance(kappa_prime, str) else float(kappa_prime),
               "scan": scan},
              files,
              results={"kappa_prime": result.kappa_prime,
                       "kappa_prime_mode": result.kappa_prime_mode,
                       "partial": result.partial})
    if result.partial:
        click.echo("warning: scan does not cover every bucket position; "
                   "reconstruction flagged partial", err=True)
    click.echo(f"reconstruction {result.reconstruction.shape} -> {files[1]}")


@main.group()
def watermark() -> None:
    """Embed a delta-correlated mark in an image, or locate one."""


@watermark.command()
@click.argument("host_path", metavar="HOST")
@click.argument("mark_path", metavar="MARK")
@click.option("--offset", required=True, help="Top-left corner of the mark, e.g. 16,16.")
@click.option("--plot", is_flag=True, help="Also render the marked image as PGM.")
@click.option("--name", help="Output file stem.")
@click.option("--out", help="Output directory.")
def embed(host_path, mark_path, offset, plot, name, out):
    """Add the mark into the host at a fixed offset."""
    host = _read_tensor(host_path)
    mark = _read_tensor(mark_path)
    off = _parse_ints(offset, "--offset")
    marked = imaging.watermark_embed(host, mark, off)

    out_path = _out_dir(out)
    stem = name or f"marked_{Path(host_path).stem}"
    files = [f"{stem}.txt"]
    write_text(marked, out_path / files[0])
    if plot:
        files.append(f"{stem}.pgm")
        _plot_pgm(marked, out_path / files[-1])
    _emit_run(out_path, stem, "watermark embed",
              {"host": host_path, "mark": mark_path, "offset": list(off)}, files)
    click.echo(f"marked image -> {files[0]}")


@watermark.command()
@click.argument("image_path", metavar="IMAGE")
@click.argument("mark_path", metavar="MARK")
@click.option("--name", help="Output file stem.")
@click.option("--out", help="Output directory.")
def locate(image_path, mark_path, name, out):
    """Search an image for the mark by a single cross-correlation."""
    image = _read_tensor(image_path)
    mark = _read_tensor(mark_path)
    match = imaging.watermark_locate(image, mark)
    payload = {
        "offset": list(match.offset),
        "peak": match.peak,
        "threshold": match.threshold,
        "detected": match.detected,
    }

    out_path = _out_dir(out)
    stem = name or f"locate_{Path(image_path).stem}"
    files = [f"{stem}.locate.json"]
    (out_path / files[0]).write_text(_json_text(payload))
    _emit_run(out_path, stem, "watermark locate",
              {"image": image_path, "mark": mark_path}, files, results=payload)
    click.echo(json.dumps(payload, sort_keys=True, default=_json_safe))


@main.command()
@click.option("--shape", default="5,5", show_default=True, help="Array extents, comma-separated.")
@click.option("--values", default="-12:14", show_default=True,
              help="Half-open integer pool LO:HI the entries are drawn from without replacement.")
@click.option("--trials", type=click.IntRange(min=1), default=10_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--dump-values", is_flag=True, help="Also write per-trial R and M as CSV.")
@click.option("--name", help="Output file stem.")
@click.option("--out", help="Output directory.")
def baseline(shape, values, trials, seed, dump_values, name, out):
    """Monte-Carlo R and M statistics of random non-repeating arrays."""
    shp = _parse_ints(shape, "--shape")
    lo, _, hi = values.partition(":")
    if not _:
        raise click.UsageError(f"--values must be LO:HI, got {values!r}")
    stats = imaging.random_baseline(shape=shp, values=range(int(lo), int(hi)),
                                    trials=trials, seed=seed)
    payload = {
        "trials": stats.trials,
        "shape": list(stats.shape),
        "R": {"min": stats.R[0], "mean": stats.R[1], "max": stats.R[2]},
        "M": {"min": stats.M[0], "mean": stats.M[1], "max": stats.M[2]},
        "undefined": stats.undefined,
    }

    out_path = _out_dir(out)
    stem = name or f"baseline_{'x'.join(str(v) for v in shp)}_{trials}"
    files = [f"{stem}.json"]
    (out_path / files[0]).write_text(_json_text(payload))
    if dump_values and not stats.undefined:
        files.append(f"{stem}.csv")
        with open(out_path / files[-1], "w") as fh:
            fh.write("trial,R,M\n")
            for i, (r_v, m_v) in enumerate(zip(stats.R_values, stats.M_values)):
                fh.write("%d,%.9g,%.9g\n" % (i, r_v, m_v))
    _emit_run(out_path, stem, "baseline",
              {"shape": list(shp), "values": values, "trials": trials}, files,
              seed=seed, results=payload)
    click.echo(json.dumps(payload, sort_keys=True, default=_json_safe))


@main.command(name="noise-study")
@click.argument("object_path", metavar="OBJECT")
@click.argument("mask_path", metavar="MASK")
@click.option("--sigma", type=float, default=1.0, show_default=True)
@click.option("--trials", type=click.IntRange(min=1), default=500, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--name", help="Output file stem.")
@click.option("--out", help="Output directory.")
def noise_study(object_path, mask_path, sigma, trials, seed, name, out):
    """Raster vs diffuse acquisition MSE under equal per-measurement noise."""
    obj = _read_tensor(object_path)
    mask = _read_tensor(mask_path)
    study = imaging.multiplex_noise_study(obj, mask, sigma, trials=trials, seed=seed)
    payload = {
        "trials": study.trials,
        "sigma": study.sigma,
        "element_count": study.element_count,
        "mse_raster": study.mse_raster,
        "mse_diffuse": study.mse_diffuse,
        "ratio_mean": study.ratio_mean,
    }

    out_path = _out_dir(out)
    stem = name or f"noise_{Path(object_path).stem}"
    files = [f"{stem}.json"]
    (out_path / files[0]).write_text(_json_text(payload))
    _emit_run(out_path, stem, "noise-study",
              {"object": object_path, "mask": mask_path, "sigma": sigma, "trials": trials},
              files, seed=seed, results=payload)
    click.echo(json.dumps(payload, sort_keys=True, default=_json_safe))


# ---------------------------------------------------------------------------
# table regeneration


_TABLE1_ALPHABETS = (
    (0, 1, 5, 10, 37, 140),
    (0, 1, 4, 8, 28, 99),
    (0, 1, 4, 8, 24, 75),
    (0, 1, 4, 8, 23, 69),
    (0, 1, 4, 8, 21, 59),
    (0, 1, 3, 6, 16, 44),
    (0, 1, 2, 4, 7, 13),
    (0, 1, 1, 1, 1, 1),
)


def _off_peak_span(tensor: Tensor) -> tuple[int, int]:
    corr = correlate(tensor, tensor)
    off = np.asarray(corr.values.data).copy()
    off[corr.zero_index] = 0
    return int(off.min()), int(off.max())


@main.command()
@click.option("--table", type=click.Choice(["1", "2"]), required=True)
@click.option("--e", type=int, default=3, show_default=True, help="Inner-diamond letter (table 2).")
@click.option("--f-min", type=int, default=3, show_default=True)
@click.option("--f-max", type=int, default=20, show_default=True)
@click.option("--name", help="Output file stem.")
@click.option("--out", help="Output directory.")
def tables(table, e, f_min, f_max, name, out):
    """Regenerate the 5x5 / 7x7 family tables as CSV.

    The bits column follows the printed tables' span convention
    (``metrics.span_bits``), not the magnitude convention of QualityReport.
    """
    from .construct import _materialize
    from .metrics import span_bits

    out_path = _out_dir(out)
    if table == "1":
        # The 5x5 survey includes near-miss alphabets whose inner side lobes
        # exceed the edge value, so materialize without the quasi recheck.
        stem = name or "table1"
        lines = ["a,b,c,d,e,f,R,M,cedge,bits,off_lo,off_hi"]
        for alpha in _TABLE1_ALPHABETS:
            tensor = Tensor.from_values(_materialize(5, alpha), "int")
            rep = classify(tensor)
            lo, hi = _off_peak_span(tensor)
            lines.append(
                "%s,%.6g,%.6g,%d,%d,%d,%d"
                % (",".join(str(v) for v in alpha), rep.R, rep.M, rep.C_edge,
                   span_bits(tensor), lo, hi)
            )
        args = {"table": 1}
    else:
        stem = name or f"table2_e{e}"
        found = diamond7_solve(e)
        lines = ["f,g,h,R,M,S,bits,OP"]
        rows = sorted(
            (s for s in found if f_min <= s.values[5] <= f_max),
            key=lambda s: (-s.values[5], -s.values[6], -s.values[7]),
        )
        for sol in rows:
            tensor = sol.build()
            rep = classify(tensor)
            f_v, g_v, h_v = sol.values[5], sol.values[6], sol.values[7]
            lines.append(
                "%d,%d,%d,%.6g,%.6g,%.6g,%d,%s"
                % (f_v, g_v, h_v, rep.R, rep.M, rep.S, span_bits(tensor), rep.OP)
            )
        args = {"table": 2, "e": e, "f_min": f_min, "f_max": f_max}

    files = [f"{stem}.csv"]
    (out_path / files[0]).write_text("\n".join(lines) + "\n")
    _emit_run(out_path, stem, "tables", args, files, results={"rows": len(lines) - 1})
    click.echo(f"{len(lines) - 1} rows -> {files[0]}")


if __name__ == "__main__":
    main()
