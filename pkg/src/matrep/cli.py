"""Command-line driver.

Every subcommand builds its objects from the same flag set, optionally
seeded from a flat ``key=value`` config file (flags override the file, the
file overrides built-in defaults), and writes CSV or structured text with
17 significant digits so outputs are byte-reproducible.

Exit codes: 0 success, 1 failed acceptance criteria, 2 argument/config
errors, 3 numerical-contract errors, 4 I/O errors.
"""

import argparse
import re
import sys

import numpy as np

from . import acceptance
from .basis import BasisSpec, Family, OrthoMethod, Parity, realize
from .errors import MatrepError
from .feshbach import partition, render_effective, solve_selfconsistent
from .kernels import (
    CurveLabel,
    CurveSeries,
    crest_and_cuts,
    crest_ratio,
    cut_weight,
    render_kernel,
)
from .operators import (
    PotentialSpec,
    hamiltonian_matrix,
    kinetic_matrix,
    local_potential_matrix,
    position_squared_matrix,
    separable_matrix,
)
from .oracle import fd_ground_state
from .spectral import eigen_symmetric, peak_metrics, synthesize

FMT = "{:.17g}"


class CliError(Exception):
    """Bad arguments or config (exit code 2)."""


# ---------------------------------------------------------------------------
# potential expressions
# ---------------------------------------------------------------------------

_NUMBER = r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
_TERM_RE = re.compile(
    rf"""\s*(?P<sign>[+-])?\s*
        (?:(?P<coef>{_NUMBER})\s*\*?\s*)?
        (?:exp\(\s*-\s*(?:(?P<expo>{_NUMBER})\s*\*?\s*)?r\^2\s*\)
          |(?P<rsq>r\^2))\s*""",
    re.VERBOSE,
)


def parse_potential(expression: str, allow_r2: bool = False):
    """Parse ``c*exp(-a r^2)`` sums (optionally a bare ``r^2`` term).

    Returns ``(PotentialSpec | None, r2_coefficient)``.
    """
    terms = []
    r2_coeff = 0.0
    pos = 0
    found = False
    while pos < len(expression):
        match = _TERM_RE.match(expression, pos)
        if match is None or match.end() == pos:
            raise CliError(f"cannot parse potential expression at: {expression[pos:]!r}")
        found = True
        sign = -1.0 if match.group("sign") == "-" else 1.0
        coef = sign * float(match.group("coef") or 1.0)
        if match.group("rsq"):
            if not allow_r2:
                raise CliError("bare r^2 terms are only supported by the oracle command")
            r2_coeff += coef
        else:
            expo = float(match.group("expo") or 1.0)
            terms.append((coef, expo))
        pos = match.end()
    if not found:
        raise CliError(f"empty potential expression: {expression!r}")
    spec = PotentialSpec(tuple(terms)) if terms else None
    return spec, r2_coeff


# ---------------------------------------------------------------------------
# config / flag merging
# ---------------------------------------------------------------------------

def read_config(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


_CONFIG_KEYS = {
    "basis", "n", "beta", "sigma", "parity", "ortho", "operator", "potential",
    "grid", "s_values", "n1", "n2", "out", "half_width", "npoints", "state",
}


def merge_config(args: argparse.Namespace) -> argparse.Namespace:
    """Fill flag values that were not given from the config file."""
    if not getattr(args, "config", None):
        return args
    values = read_config(args.config)
    unknown = set(values) - _CONFIG_KEYS
    if unknown:
        raise CliError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key, text in values.items():
        if getattr(args, key, None) is not None:
            continue  # explicit flags win
        if not hasattr(args, key):
            continue  # key not used by this subcommand
        if key in ("n", "n1", "n2", "npoints", "state"):
            setattr(args, key, int(text))
        elif key in ("beta", "sigma", "half_width"):
            setattr(args, key, float(text))
        else:
            setattr(args, key, text)
    return args


def parse_axis(grid: str) -> np.ndarray:
    parts = grid.split(":")
    if len(parts) != 3:
        raise CliError(f"grid must be rmin:rmax:step, got {grid!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError as exc:
        raise CliError(f"bad grid {grid!r}: {exc}") from None
    if step <= 0.0 or hi <= lo:
        raise CliError("grid needs rmax > rmin and step > 0")
    count = int(np.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(count + 1)


def build_basis(args):
    family = Family(args.basis or "ho")
    n = args.n if args.n is not None else 50
    beta = args.beta if args.beta is not None else 1.0
    sigma = args.sigma if args.sigma is not None else 1.0
    parity = None
    if family is Family.HARMONIC_OSCILLATOR and args.parity and args.parity != "both":
        # the flag counts the unrestricted basis; parity keeps the matching half
        kept = (n + 1) // 2 if args.parity == "even" else n // 2
        if kept < 1:
            raise CliError("parity restriction leaves no basis function")
        n = kept
        parity = Parity(args.parity)
    method = OrthoMethod(args.ortho) if args.ortho else OrthoMethod.LOWDIN
    try:
        spec = BasisSpec(family, n, beta=beta, sigma=sigma, parity=parity, ortho_method=method)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    return realize(spec)


def build_operator(args, basis):
    name = args.operator or ("hamiltonian" if args.potential else "identity")
    potential = None
    if args.potential:
        potential, r2_coeff = parse_potential(args.potential)
        if r2_coeff:
            raise CliError("bare r^2 terms are only supported by the oracle command")
    if name == "identity":
        return None
    if name == "kinetic":
        return kinetic_matrix(basis)
    if name == "r2":
        return position_squared_matrix(basis)
    if name in ("potential", "hamiltonian", "separable") and potential is None:
        raise CliError(f"operator {name!r} needs --potential")
    if name == "potential":
        return local_potential_matrix(basis, potential)
    if name == "hamiltonian":
        return hamiltonian_matrix(basis, potential)
    if name == "separable":
        return separable_matrix(basis, potential.values)
    raise CliError(f"unknown operator {name!r}")


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def write_kernel_csv(grid, path):
    handle, close = _open_out(path)
    try:
        handle.write("r,s,value\n")
        for i, r in enumerate(grid.r_axis):
            for j, s in enumerate(grid.s_axis):
                handle.write(
                    f"{FMT.format(r)},{FMT.format(s)},{FMT.format(grid.values[i, j])}\n"
                )
    finally:
        if close:
            handle.close()


def write_curve_csv(curve: CurveSeries, path):
    handle, close = _open_out(path)
    try:
        handle.write("x,value\n")
        for x, y in zip(curve.x, curve.y):
            handle.write(f"{FMT.format(x)},{FMT.format(y)}\n")
    finally:
        if close:
            handle.close()


def write_spectrum(spectrum, path):
    handle, close = _open_out(path)
    try:
        for value, vector in zip(spectrum.eigenvalues, spectrum.vectors):
            handle.write(f"eigenvalue {FMT.format(value)}\n")
            for c in vector:
                handle.write(f"{FMT.format(c)}\n")
    finally:
        if close:
            handle.close()


def _cut_path(path: str, s_value: float) -> str:
    stem, dot, ext = path.rpartition(".")
    tag = f"_s={FMT.format(s_value)}"
    if dot:
        return f"{stem}{tag}.{ext}"
    return f"{path}{tag}"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_kernel(args):
    basis = build_basis(args)
    matrix = build_operator(args, basis)
    axis = parse_axis(args.grid) if args.grid else None
    grid = render_kernel(basis, matrix, r_axis=axis)
    write_kernel_csv(grid, args.out)


def cmd_crest(args):
    basis = build_basis(args)
    matrix = build_operator(args, basis)
    axis = parse_axis(args.grid) if args.grid else None
    grid = render_kernel(basis, matrix, r_axis=axis)
    crest, _ = crest_and_cuts(grid)
    write_curve_csv(crest, args.out)


def cmd_cuts(args):
    if not args.s_values:
        raise CliError("cuts needs --s-values")
    try:
        s_values = [float(tok) for tok in args.s_values.split(",") if tok.strip()]
    except ValueError as exc:
        raise CliError(f"bad --s-values: {exc}") from None
    basis = build_basis(args)
    matrix = build_operator(args, basis)
    axis = parse_axis(args.grid) if args.grid else None
    grid = render_kernel(basis, matrix, r_axis=axis)
    _, cuts = crest_and_cuts(grid, s_values)
    for cut in cuts:
        if args.out:
            write_curve_csv(cut, _cut_path(args.out, cut.s_position))
        else:
            sys.stdout.write(f"# cut s={FMT.format(cut.s_position)}\n")
            write_curve_csv(cut, None)


def cmd_weight(args):
    basis = build_basis(args)
    matrix = build_operator(args, basis)
    if args.grid:
        axis = parse_axis(args.grid)
    else:
        half = 5.0 if basis.n < 100 else 10.0
        axis = parse_axis(f"{-half}:{half}:0.02")
    values = cut_weight(basis, matrix, axis)
    label = CurveLabel.KINETIC_WEIGHT if (args.operator == "kinetic") else CurveLabel.CUT_WEIGHT
    write_curve_csv(CurveSeries(axis, np.asarray(values), label), args.out)


def cmd_crest_ratio(args):
    basis = build_basis(args)
    matrix = build_operator(args, basis)
    if matrix is None:
        raise CliError("crest-ratio needs an operator (e.g. --operator potential)")
    axis = parse_axis(args.grid) if args.grid else parse_axis("-3:3:0.01")
    values = crest_ratio(basis, matrix, axis)
    write_curve_csv(CurveSeries(axis, np.asarray(values), CurveLabel.CREST_RATIO), args.out)


def cmd_eigen(args):
    basis = build_basis(args)
    matrix = build_operator(args, basis)
    if matrix is None:
        raise CliError("eigen needs an operator (e.g. --potential or --operator kinetic)")
    spectrum = eigen_symmetric(matrix)
    write_spectrum(spectrum, args.out)
    if args.out:
        sys.stdout.write(f"ground {FMT.format(spectrum.eigenvalues[0])}\n")


def _fine_axis(n: int) -> np.ndarray:
    half = 1.5 * np.sqrt(n) + 2.0
    return np.arange(-half, half + 1e-9, 0.02)


def cmd_flat_wave(args):
    basis = build_basis(args)
    spectrum = eigen_symmetric(kinetic_matrix(basis))
    grid = parse_axis(args.grid) if args.grid else _fine_axis(basis.n)
    wave = synthesize(basis, spectrum.vectors[0], grid)
    metrics = peak_metrics(wave)
    sys.stdout.write(f"lowest_eigenvalue {FMT.format(spectrum.eigenvalues[0])}\n")
    sys.stdout.write(f"max_abs {FMT.format(metrics.max_abs)}\n")
    sys.stdout.write(f"effective_range {FMT.format(metrics.effective_range)}\n")
    sys.stdout.write(f"fwhm {FMT.format(metrics.fwhm)}\n")
    if args.out:
        write_curve_csv(CurveSeries(wave.r, wave.psi, CurveLabel.CREST), args.out)


def cmd_r2_local(args):
    basis = build_basis(args)
    spectrum = eigen_symmetric(position_squared_matrix(basis))
    state = args.state if args.state is not None else 1
    if not 1 <= state <= basis.n:
        raise CliError(f"state must lie in 1..{basis.n}")
    grid = parse_axis(args.grid) if args.grid else _fine_axis(basis.n)
    wave = synthesize(basis, spectrum.vectors[state - 1], grid)
    metrics = peak_metrics(wave)
    sys.stdout.write(f"eigenvalue {FMT.format(spectrum.eigenvalues[state - 1])}\n")
    sys.stdout.write(f"max_abs {FMT.format(metrics.max_abs)}\n")
    sys.stdout.write(f"effective_range {FMT.format(metrics.effective_range)}\n")
    sys.stdout.write(f"fwhm {FMT.format(metrics.fwhm)}\n")
    if args.out:
        write_curve_csv(CurveSeries(wave.r, wave.psi, CurveLabel.CREST), args.out)


def cmd_feshbach(args):
    if args.n1 is None or args.n2 is None:
        raise CliError("feshbach needs --n1 and --n2")
    if args.potential is None:
        raise CliError("feshbach needs --potential")
    potential, r2_coeff = parse_potential(args.potential)
    if r2_coeff or potential is None:
        raise CliError("feshbach potentials must be Gaussian sums")
    if args.basis is None and args.parity is None:
        # default: even-parity oscillator states, n2 of them
        basis = realize(
            BasisSpec(Family.HARMONIC_OSCILLATOR, args.n2, parity=Parity.EVEN)
        )
    else:
        basis = build_basis(args)
    h = hamiltonian_matrix(basis, potential)
    part = partition(h, args.n1, args.n2)
    solve = solve_selfconsistent(part)
    included_only = eigen_symmetric(part.php).eigenvalues[0]
    full = eigen_symmetric(h.entries[: args.n2, : args.n2]).eigenvalues[0]
    sys.stdout.write(f"e0 {FMT.format(solve.energy)}\n")
    sys.stdout.write(f"included_only_ground {FMT.format(included_only)}\n")
    sys.stdout.write(f"retained_block_ground {FMT.format(full)}\n")
    sys.stdout.write(f"iterations {solve.iterations}\n")
    if args.out:
        axis = parse_axis(args.grid) if args.grid else None
        grid = render_effective(part, solve.energy, r_axis=axis)
        write_kernel_csv(grid, args.out)


def cmd_oracle(args):
    if args.potential is None:
        raise CliError("oracle needs --potential")
    potential, r2_coeff = parse_potential(args.potential, allow_r2=True)
    solution = fd_ground_state(
        potential,
        half_width=args.half_width if args.half_width is not None else 20.0,
        npoints=args.npoints if args.npoints is not None else 8000,
        r2_term=r2_coeff,
    )
    sys.stdout.write(f"eigenvalue {FMT.format(solution.eigenvalue)}\n")
    sys.stdout.write(f"richardson_error {FMT.format(solution.richardson_error)}\n")
    if args.out:
        write_curve_csv(
            CurveSeries(solution.grid, solution.wave, CurveLabel.CREST), args.out
        )


def cmd_accept(args):
    results = acceptance.run_all()
    for result in results:
        sys.stdout.write(result.line() + "\n")
    failed = [r for r in results if not r.passed]
    if failed:
        sys.stdout.write(f"FAILED: {', '.join(str(r.index) for r in failed)}\n")
        return 1
    sys.stdout.write("all criteria passed\n")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(sub):
    sub.add_argument("--basis", choices=["ho", "shifted", "centered", "pairs"])
    sub.add_argument("--n", type=int)
    sub.add_argument("--beta", type=float)
    sub.add_argument("--sigma", type=float)
    sub.add_argument("--parity", choices=["even", "odd", "both"])
    sub.add_argument("--ortho", choices=["lowdin", "gs"])
    sub.add_argument("--operator",
                     choices=["identity", "kinetic", "r2", "potential", "hamiltonian", "separable"])
    sub.add_argument("--potential", help="e.g. '1*exp(-9r^2) -1*exp(-r^2)'")
    sub.add_argument("--grid", help="rmin:rmax:step")
    sub.add_argument("--out")
    sub.add_argument("--config")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matrep",
        description="Finite-matrix representations of 1-D operators: kernels, "
        "diagnostics, spectra and the acceptance suite.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    for name, func in (
        ("kernel", cmd_kernel),
        ("crest", cmd_crest),
        ("weight", cmd_weight),
        ("crest-ratio", cmd_crest_ratio),
        ("eigen", cmd_eigen),
        ("flat-wave", cmd_flat_wave),
        ("r2-local", cmd_r2_local),
    ):
        sub = commands.add_parser(name)
        _add_common(sub)
        sub.set_defaults(func=func)
        if name == "r2-local":
            sub.add_argument("--state", type=int)

    sub = commands.add_parser("cuts")
    _add_common(sub)
    sub.add_argument("--s-values", dest="s_values", help="comma-separated cut positions")
    sub.set_defaults(func=cmd_cuts)

    sub = commands.add_parser("feshbach")
    _add_common(sub)
    sub.add_argument("--n1", type=int)
    sub.add_argument("--n2", type=int)
    sub.set_defaults(func=cmd_feshbach)

    sub = commands.add_parser("oracle")
    sub.add_argument("--potential", help="Gaussian sum, optionally a bare r^2 term")
    sub.add_argument("--half-width", dest="half_width", type=float)
    sub.add_argument("--npoints", type=int)
    sub.add_argument("--out")
    sub.add_argument("--config")
    sub.set_defaults(func=cmd_oracle)

    sub = commands.add_parser("accept")
    sub.set_defaults(func=cmd_accept)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        args = merge_config(args)
        code = args.func(args)
        return int(code or 0)
    except CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except MatrepError as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return 3
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return 4


if __name__ == "__main__":
    sys.exit(main())
