#!/usr/bin/env python3
# PYTHON_ARGCOMPLETE_OK

"""Command line interface of modecoupler.  Data goes to files or to stdout,
messages go to stderr.  The exit code is 0 on success, 1 for invalid input,
and 2 for numerical failures.
"""

import argparse, json, sys
from pathlib import Path
import argcomplete, click
import numpy as np
from . import utils, analysis, configuration, fit, presets, spectrum_files, sweep, touchstone
from .model import eigenvalues, s21_spectrum, SpectrumGrid
from .utils import ModeCouplerError, InvalidInputError, diagnostic


class ArgumentParser(argparse.ArgumentParser):
    """Argument parser which exits with code 1 on invalid arguments."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def comma_list(length=None):
    def parse(text):
        try:
            return utils.parse_float_list(text, length)
        except InvalidInputError as error:
            raise argparse.ArgumentTypeError(str(error))
    return parse


def build_parser():
    parser = ArgumentParser(prog="modecoupler", description="Model coupled resonators sharing one transmission line.")
    parser.add_argument("--debug", action="store_true", help="print diagnostic messages to stderr")
    json_help = "write structured output as JSON instead of CSV/text"
    seed_help = "seed for the jittered fit restarts; defaults to the configuration"
    parser.add_argument("--json", action="store_true", help=json_help)
    parser.add_argument("--seed", type=int, help=seed_help)
    # suppressed defaults keep a value given before the subcommand
    json_option = ArgumentParser(add_help=False)
    json_option.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help=json_help)
    seed_option = ArgumentParser(add_help=False)
    seed_option.add_argument("--seed", type=int, default=argparse.SUPPRESS, help=seed_help)
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    def add_sweep_source(subparser):
        source = subparser.add_mutually_exclusive_group(required=True)
        source.add_argument("--preset", choices=("case1", "case2"), help="built-in sweep")
        source.add_argument("--model", type=Path, help="model file with a sweep section, or with --calibration")
        subparser.add_argument("--calibration", type=comma_list(4), metavar="G_MIN,G_MAX,OMEGA_START,OMEGA_END",
                               help="gap calibration in mm and GHz; overrides the model file")
        subparser.add_argument("--varying-mode", type=int, default=1, help="1-based mode which follows the gap; "
                               "defaults to 1")
        subparser.add_argument("--gaps", type=comma_list(3), metavar="START,STOP,COUNT", help="gap samples in mm")
        subparser.add_argument("--freqs", type=comma_list(3), metavar="START,STOP,COUNT", help="frequencies in GHz")
        subparser.add_argument("--alpha", type=comma_list(2), metavar="A1,A2",
                               help="intrinsic damping of the preset modes in GHz")

    spectrum_parser = subparsers.add_parser("spectrum", parents=[json_option], help="compute S21 of a model")
    spectrum_parser.add_argument("--model", type=Path, required=True, help="model file")
    spectrum_parser.add_argument("--fmin", type=float, required=True, help="lowest frequency in GHz")
    spectrum_parser.add_argument("--fmax", type=float, required=True, help="highest frequency in GHz")
    spectrum_parser.add_argument("--points", type=int, default=2001, help="number of frequencies; defaults to 2001")
    spectrum_parser.add_argument("--method", choices=("direct", "sherman-morrison"), default="direct",
                                 help="evaluation of the resolvent")
    spectrum_parser.add_argument("--out", type=Path, help="output CSV file; defaults to stdout")

    eigen_parser = subparsers.add_parser("eigen", parents=[json_option], help="complex eigenfrequencies of a model")
    eigen_parser.add_argument("--model", type=Path, required=True, help="model file")
    eigen_parser.add_argument("--sweep", action="store_true", help="track the branches along the sweep of the model "
                              "file")

    sweep_parser = subparsers.add_parser("sweep", help="S21 colour map over frequency and gap")
    add_sweep_source(sweep_parser)
    sweep_parser.add_argument("--out", type=Path, default=Path("."), help="output directory; defaults to the current "
                              "directory")

    bic_parser = subparsers.add_parser("bic", parents=[json_option],
                                       help="locate bound states in the continuum along a sweep")
    add_sweep_source(bic_parser)
    bic_parser.add_argument("--tol", type=float, default=1e-12, help="residual tolerance in GHz²")
    bic_parser.add_argument("--out", type=Path, help="CSV file with the bound states")

    classify_parser = subparsers.add_parser("classify", parents=[json_option],
                                            help="level repulsion or level attraction")
    classify_parser.add_argument("--model", type=Path, required=True, help="two-mode model file")
    classify_parser.add_argument("--at-crossing", action="store_true", help="set ω₁ to ω₂ before classifying")

    fit_parser = subparsers.add_parser("fit", parents=[json_option, seed_option],
                                       help="fit a model to a measured spectrum")
    fit_parser.add_argument("--data", type=Path, required=True, help=".s2p or .csv file")
    fit_parser.add_argument("--model", type=Path, help="initial model file; guessed from the dips if omitted")
    fit_parser.add_argument("--modes", type=int, default=2, choices=(1, 2), help="number of modes to guess")
    fit_parser.add_argument("--free", required=True, help="comma-separated parameters, e.g. omega_1,beta_1,re_delta_12")
    fit_parser.add_argument("--loss", choices=("complex", "mag"), default="complex", help="residual to minimise")
    fit_parser.add_argument("--bounds", type=float, default=0.2, help="relative half width of the parameter bounds")
    fit_parser.add_argument("--restarts", type=int, help="number of jittered restarts; defaults to the configuration")
    fit_parser.add_argument("--out", type=Path, help="fitted model file; defaults to the model file name with "
                            "“-fit” appended")

    convert_parser = subparsers.add_parser("convert", help="convert Touchstone files")
    convert_parser.add_argument("--in", dest="input", type=Path, required=True, help=".s2p file")
    convert_parser.add_argument("--out", type=Path, required=True, help=".csv or .s2p file")
    convert_parser.add_argument("--param", choices=("s11", "s21", "s12", "s22"), default="s21",
                                help="parameter written to CSV")
    convert_parser.add_argument("--format", choices=("RI", "MA", "DB"), default="RI",
                                help="data format of a written .s2p file")

    argcomplete.autocomplete(parser)
    return parser


def echo_json(data):
    click.echo(json.dumps(data, indent=2, sort_keys=True))


def read_model_config(path):
    return configuration.load_model_config(path.read_text())


def grid_argument(values):
    start, stop, count = values
    if count != int(count) or count < 1:
        raise InvalidInputError(f"invalid count {count!r}")
    return np.linspace(start, stop, int(count))


def sweep_from_arguments(args, config):
    """Returns the sweep selected by ``--preset`` or ``--model``."""
    if args.preset:
        spec = presets.load_preset(args.preset).sweep_spec(args.alpha or config["default_alpha"])
        base_model, index, calibration = spec.base_model, spec.varying_mode_index, spec.calibration
        gaps, freqs, name = spec.gap_samples, spec.freq_grid, spec.name
    else:
        model_config = read_model_config(args.model)
        base_model, spec = model_config.model, model_config.sweep
        if args.calibration:
            calibration = sweep.GapCalibration(*args.calibration)
            index = args.varying_mode - 1
            gaps = freqs = None
            name = spec.name if spec else "custom"
        elif spec:
            index, calibration = spec.varying_mode_index, spec.calibration
            gaps, freqs, name = spec.gap_samples, spec.freq_grid, spec.name
        else:
            raise InvalidInputError(f"{args.model} has no sweep section; give --calibration")
        if gaps is None:
            gaps = np.linspace(calibration.g_min, calibration.g_max, 57)
            freqs = configuration.default_freq_grid(base_model, calibration)
    if args.gaps:
        gaps = grid_argument(args.gaps)
    if args.freqs:
        freqs = grid_argument(args.freqs)
    if not 0 <= index < base_model.size:
        raise InvalidInputError(f"invalid varying mode {index + 1}")
    return sweep.SweepSpec(base_model, index, calibration, gaps, freqs, name)


def command_spectrum(args, config):
    if args.points < 1:
        raise InvalidInputError("--points must be positive")
    model = read_model_config(args.model).model
    spectrum = s21_spectrum(model, np.linspace(args.fmin, args.fmax, args.points), args.method)
    if args.json:
        echo_json({"freq_ghz": spectrum.freqs.tolist(), "re_s21": spectrum.s21.real.tolist(),
                   "im_s21": spectrum.s21.imag.tolist()})
        return
    text = spectrum_files.write_spectrum_csv(spectrum)
    if args.out:
        args.out.write_text(text)
    else:
        click.echo(text, nl=False)


def command_eigen(args, config):
    model_config = read_model_config(args.model)
    if args.sweep:
        if model_config.sweep is None:
            raise InvalidInputError(f"{args.model} has no sweep section")
        spec = model_config.sweep
        branches = analysis.eigenvalue_branches(spec)
        if args.json:
            echo_json({"gap_mm": spec.gap_samples.tolist(),
                       "branches": [{"re": column.real.tolist(), "im": column.imag.tolist()} for column in branches.T]})
            return
        click.echo(",".join(["gap_mm"] + [f"re_{j},im_{j}" for j in range(1, spec.base_model.size + 1)]))
        for gap, row in zip(spec.gap_samples, branches):
            click.echo(",".join([repr(float(gap))] + [f"{value.real!r},{value.imag!r}" for value in row.tolist()]))
        return
    values = eigenvalues(model_config.model)
    if args.json:
        echo_json({"eigenvalues": [{"re": value.re, "im": value.im} for value in values]})
        return
    click.echo("branch,re,im")
    for j, value in enumerate(values, 1):
        click.echo(f"{j},{value.re!r},{value.im!r}")


def command_sweep(args, config):
    spec = sweep_from_arguments(args, config)
    result = sweep.run_sweep(spec, utils.worker_count(config))
    files = spectrum_files.export_sweep(result)
    args.out.mkdir(parents=True, exist_ok=True)
    extensions = {"matrix": "csv", "long": "csv", "metadata": "yaml"}
    for kind, text in files.items():
        path = args.out/f"sweep_{spec.name}_{kind}.{extensions[kind]}"
        path.write_text(text)
        diagnostic(f"wrote {path}")
    click.echo(f"sweep “{spec.name}”: {len(spec.gap_samples)} gaps × {len(spec.freq_grid)} frequencies written to "
               f"{args.out}", err=True)


def command_bic(args, config):
    spec = sweep_from_arguments(args, config)
    points = analysis.find_bic(spec, args.tol)
    for point in points:
        if not point.verified:
            click.echo(f"warning: bound state at g = {point.sweep_value:.6f} mm has |Im λ| = {point.min_im:.3e} GHz",
                       err=True)
    if not points:
        click.echo("no bound state found", err=True)
    if args.out:
        lines = ["sweep_value,omega_bic,residual,min_im,verified"]
        lines.extend(f"{point.sweep_value!r},{point.omega_bic!r},{point.residual!r},{point.min_im!r},"
                     f"{str(point.verified).lower()}" for point in points)
        args.out.write_text("\n".join(lines) + "\n")
    if args.json:
        echo_json({"bound_states": [{"g_mm": point.sweep_value, "omega_bic": point.omega_bic,
                                     "residual": point.residual, "min_im": point.min_im, "verified": point.verified}
                                    for point in points]})
        return
    for point in points:
        click.echo(f"g = {point.sweep_value:.6f} mm: ω_bic = {point.omega_bic:.6f} GHz, "
                   f"min |Im λ| = {point.min_im:.3e} GHz")


def command_classify(args, config):
    model = read_model_config(args.model).model
    if args.at_crossing:
        model = analysis.at_zero_detuning(model)
    report = analysis.classify_regime(model)
    if args.json:
        echo_json({"label": report.label.value, "gap_re": report.gap_re, "gap_im": report.gap_im})
    else:
        click.echo(f"{report.label.value} (gap_re = {report.gap_re:.6g} GHz, gap_im = {report.gap_im:.6g} GHz)")


def read_spectrum(path):
    if path.suffix.lower() == ".s2p":
        return touchstone.parse_touchstone(path.read_bytes()).spectrum()
    elif path.suffix.lower() == ".csv":
        return spectrum_files.read_spectrum_csv(path.read_text())
    raise InvalidInputError(f"unknown data file type {path.suffix!r}; use .s2p or .csv")


def command_fit(args, config):
    observed = read_spectrum(args.data)
    initial = read_model_config(args.model).model if args.model else fit.initial_guess(observed, args.modes)
    free = [name.strip() for name in args.free.split(",") if name.strip()]
    unknown = [name for name in free if name not in fit.parameter_names(initial.size)]
    if unknown:
        raise InvalidInputError(f"unknown parameters {', '.join(unknown)}")
    problem = fit.FitProblem(observed, initial, free, fit.relative_bounds(initial, free, args.bounds),
                             fit.Loss(args.loss), config["seed"] if args.seed is None else args.seed,
                             config["restarts"] if args.restarts is None else args.restarts)
    result = fit.fit_spectrum(problem)
    out = args.out or (utils.append_to_path_stem(args.model, "-fit") if args.model else Path("fitted.yaml"))
    out.write_text(configuration.dump_model_config(result.model))
    if args.json:
        echo_json({"parameters": result.parameters, "rms_residual": result.rms_residual,
                   "iterations": result.iterations, "evaluations": result.evaluations,
                   "converged": result.converged, "model_file": str(out)})
        return
    for name in problem.free:
        click.echo(f"{name} = {result.parameters[name]:.9g}")
    click.echo(f"rms residual = {result.rms_residual:.6e}")
    if not result.converged:
        click.echo("warning: fit did not converge", err=True)
    click.echo(f"fitted model written to {out}", err=True)


def command_convert(args, config):
    if args.input.suffix.lower() != ".s2p":
        raise InvalidInputError("input must be a .s2p file")
    data = touchstone.parse_touchstone(args.input.read_bytes())
    if args.out.suffix.lower() == ".s2p":
        args.out.write_text(touchstone.write_touchstone(data, args.format))
    elif args.out.suffix.lower() == ".csv":
        column = ("s11", "s21", "s12", "s22").index(args.param)
        args.out.write_text(spectrum_files.write_spectrum_csv(SpectrumGrid(data.freqs, data.s_parameters[:, column])))
    else:
        raise InvalidInputError(f"unknown output file type {args.out.suffix!r}; use .csv or .s2p")


commands = {"spectrum": command_spectrum, "eigen": command_eigen, "sweep": command_sweep, "bic": command_bic,
            "classify": command_classify, "fit": command_fit, "convert": command_convert}


def run(argv=None):
    """Runs the command line interface.

    :param argv: command line arguments without the program name; defaults to
      ``sys.argv[1:]``
    :type argv: list[str] or NoneType

    :returns: exit code
    :rtype: int
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as error:
        return error.code or 0
    utils.debug = args.debug
    try:
        config = configuration.load_configuration()
        commands[args.command](args, config)
    except ModeCouplerError as error:
        click.echo(f"Error: {error}", err=True)
        return error.exit_code
    except OSError as error:
        click.echo(f"Error: {error}", err=True)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
