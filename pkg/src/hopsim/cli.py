"""Command-line front end: ``hopsim <command> [options]``.

Commands: ``generate``, ``stokes``, ``hidden``, ``pcmi``, ``verify``, ``measure``.

Any option can also come from a ``--config`` file of ``key = value`` lines
(keys spelled like the long option, with or without dashes); options given on
the command line win.  Seeds must always be given explicitly.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import __version__
from ._io import atomic_write_text, dumps
from .ensemble import (
    EnsembleFormatError,
    Hops,
    Polarized,
    RandomnessSpec,
    Unpolarized,
    classical_hidden,
    classical_stokes,
    ensemble_to_csv,
    generate_ensemble,
    randomness_audit,
    read_ensemble,
)
from .fock import (
    FockSpace,
    check_factorization,
    check_hops_criterion,
    check_polarization_criterion,
    coherent_state,
    hops_mixture,
    stokes_ops,
    verify_algebra,
)
from .measurement import (
    DetectorModel,
    Scheme,
    convergence_csv,
    convergence_table,
    estimate,
    identity_audit,
    simulate_counts,
)
from .pcmi import DeviceConfig, expected_input_angles, hops_certificate, pcmi_run
from .polarization import basis_from_primary


class UsageError(Exception):
    """Invalid or missing parameter (exit code 2)."""


DEFAULTS = {
    "generate": {"amplitude": "constant", "a0": 1.0, "workers": 1},
    "pcmi": {"delta_m": 0.0, "delta_pcm": 0.0, "eps": "1,0"},
    "verify": {"cutoff": 6, "state_cutoff": 12},
    "measure": {"efficiency": 1.0, "workers": 1, "points": 20},
}


def _build_parser():
    parser = argparse.ArgumentParser(prog="hopsim", description="Hidden optical-polarization workbench.")
    parser.add_argument("--version", action="version", version=f"hopsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    def add(name, help_):
        p = sub.add_parser(name, help=help_, argument_default=None)
        p.add_argument("--config", help="key = value file with default options")
        subs[name] = p
        return p

    p = add("generate", "draw a seeded classical field ensemble")
    p.add_argument("--kind", choices=["polarized", "hops", "unpolarized"])
    p.add_argument("--chi", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--chi-h", type=float)
    p.add_argument("--delta-h", type=float)
    p.add_argument("--amplitude", choices=["constant", "uniform", "rayleigh"])
    p.add_argument("--a0", type=float)
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--scale", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")

    for name, what in (("stokes", "Stokes"), ("hidden", "hidden-polarization")):
        p = add(name, f"{what} parameters of an ensemble file")
        p.add_argument("ensemble", nargs="?")
        p.add_argument("--json", help="also write the parameters as JSON")

    p = add("pcmi", "pass an ensemble through the phase-conjugating interferometer")
    p.add_argument("--in", dest="input")
    p.add_argument("--delta-m", type=float)
    p.add_argument("--delta-pcm", type=float)
    p.add_argument("--eps", help="first basis vector as 'ex,ey' (complex literals allowed)")
    p.add_argument("--out")
    p.add_argument("--report")

    p = add("verify", "operator-algebra, criterion and measurement-identity checks")
    p.add_argument("--cutoff", type=int)
    p.add_argument("--state-cutoff", type=int)
    p.add_argument("--out")

    p = add("measure", "Monte Carlo photocounting for one detection scheme")
    p.add_argument("--in", dest="input")
    p.add_argument("--scheme", choices=[s.value for s in Scheme])
    p.add_argument("--shots", type=int, help="shots per ensemble sample")
    p.add_argument("--efficiency", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--points", type=int)
    p.add_argument("--counts")
    p.add_argument("--plot-data")
    p.add_argument("--report")
    return parser, subs


def _read_config(path):
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"--config: line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


def _merge(args, subparser, command):
    actions = {a.dest: a for a in subparser._actions}
    if args.config:
        for key, raw in _read_config(args.config).items():
            if key not in actions or key in ("config", "help"):
                raise UsageError(f"--config: unknown option {key!r} for {command}")
            if getattr(args, key) is not None:
                continue
            action = actions[key]
            try:
                value = action.type(raw) if action.type else raw
            except ValueError:
                raise UsageError(f"--{key.replace('_', '-')}: invalid value {raw!r}") from None
            if action.choices and value not in action.choices:
                raise UsageError(f"--{key.replace('_', '-')}: {value!r} not in {sorted(action.choices)}")
            setattr(args, key, value)
    for key, value in DEFAULTS.get(command, {}).items():
        if getattr(args, key) is None:
            setattr(args, key, value)
    return args


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _angle(name, value, closed_low, low, high):
    ok = math.isfinite(value) and (value >= low if closed_low else value > low) and value <= high
    if not ok:
        interval = ("[" if closed_low else "(") + f"{low:.6g}, {high:.6g}]"
        raise UsageError(f"--{name}: {value!r} outside {interval}")
    return value


def _write(path, text):
    try:
        atomic_write_text(path, text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _sidecar(path, command, parameters, extra=None):
    meta = {"command": command, "parameters": parameters, "version": __version__, "file": Path(path).name}
    if extra:
        meta.update(extra)
    _write(str(path) + ".meta.json", dumps(meta))


def _params(args, *names):
    return {n: getattr(args, n) for n in names}


# -- commands ---------------------------------------------------------------


def cmd_generate(args):
    _need(args, "kind", "n", "seed", "out")
    if args.kind == "polarized":
        _need(args, "chi", "delta")
        kind = Polarized(_angle("chi", args.chi, True, 0, math.pi), _angle("delta", args.delta, False, -math.pi, math.pi))
    elif args.kind == "hops":
        _need(args, "chi_h", "delta_h")
        kind = Hops(
            _angle("chi-h", args.chi_h, True, 0, math.pi),
            _angle("delta-h", args.delta_h, False, -math.pi, math.pi),
        )
    else:
        kind = Unpolarized()
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must be a 64-bit unsigned integer")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    if args.amplitude == "constant":
        if not args.a0 >= 0:
            raise UsageError("--a0 must be >= 0")
        spec = RandomnessSpec.constant(args.a0, args.seed)
    elif args.amplitude == "uniform":
        _need(args, "lo", "hi")
        if not 0 <= args.lo < args.hi:
            raise UsageError("--lo/--hi must satisfy 0 <= lo < hi")
        spec = RandomnessSpec.uniform(args.lo, args.hi, args.seed)
    else:
        _need(args, "scale")
        if not args.scale > 0:
            raise UsageError("--scale must be > 0")
        spec = RandomnessSpec.rayleigh(args.scale, args.seed)

    e = generate_ensemble(kind, spec, args.n, workers=args.workers)
    _write(args.out, ensemble_to_csv(e))
    _sidecar(args.out, "generate", {"kind": kind.to_dict(), "n": args.n}, {"randomness": spec.to_dict()})
    print(f"wrote {len(e)} samples to {args.out}")
    return 0


def _table(names, values, errors):
    rows = [f"{'param':>6} {'value':>14} {'stderr':>12}"]
    rows += [f"{n:>6} {v:>14.6f} {s:>12.2e}" for n, v, s in zip(names, values, errors)]
    return "\n".join(rows)


def _cmd_params(args, which):
    _need(args, "ensemble")
    e = read_ensemble(args.ensemble)
    if which == "stokes":
        res, names = classical_stokes(e), ("s0", "s1", "s2", "s3")
    else:
        res, names = classical_hidden(e), ("h0", "h1", "h2", "h3")
    print(_table(names, res.values, res.stderr))
    if args.json:
        doc = {
            "ensemble": Path(args.ensemble).name,
            "n": len(e),
            "parameters": dict(zip(names, res.values)),
            "stderr": dict(zip(names, res.stderr)),
            "version": __version__,
        }
        _write(args.json, dumps(doc))
    return 0


def cmd_stokes(args):
    return _cmd_params(args, "stokes")


def cmd_hidden(args):
    return _cmd_params(args, "hidden")


def _parse_eps(text):
    try:
        parts = [complex(s.strip().replace(" ", "")) for s in text.split(",")]
    except ValueError:
        raise UsageError(f"--eps: cannot parse {text!r}") from None
    if len(parts) != 2:
        raise UsageError("--eps needs two components 'ex,ey'")
    try:
        return basis_from_primary(parts)
    except ValueError as exc:
        raise UsageError(f"--eps: {exc}") from None


def cmd_pcmi(args):
    _need(args, "input", "out")
    _angle("delta-m", args.delta_m, False, -math.pi, math.pi)
    _angle("delta-pcm", args.delta_pcm, False, -math.pi, math.pi)
    config = DeviceConfig(args.delta_m, args.delta_pcm, _parse_eps(args.eps))
    e = read_ensemble(args.input)
    if e.basis_tag != "linear":
        raise UsageError("--in: ensemble must be in the linear basis")
    out = pcmi_run(e, config)
    audit = randomness_audit(out) if len(out) >= 2 else None

    report = {
        "device": config.to_dict(),
        "input": {"file": Path(args.input).name, "kind": e.kind.to_dict(), "n": len(e)},
        "output": {"file": Path(args.out).name, "kind": out.kind.to_dict()},
        "audit": None if audit is None else audit.to_dict(),
        "certificate": None,
        "version": __version__,
    }
    status = 0
    if isinstance(e.kind, Polarized) and len(out) >= 2:
        chi, delta = expected_input_angles(e.kind, config)
        cert = hops_certificate(out, chi, delta, config)
        report["certificate"] = cert.to_dict()
        report["expected"] = {"chi": chi, "delta": delta}
        status = 0 if cert.passed else 1
    elif isinstance(e.kind, Hops) and len(out) >= 2:
        cert = hops_certificate(out, e.kind.chi_h, e.kind.delta_h, config)
        report["certificate"] = cert.to_dict()
        report["note"] = (
            "input was already hidden-polarized; a second pass conjugates it back, "
            f"output classified {audit.classification!r}"
        )

    _write(args.out, ensemble_to_csv(out))
    _sidecar(args.out, "pcmi", _params(args, "delta_m", "delta_pcm", "eps"), {"input": Path(args.input).name})
    report_path = args.report or str(args.out) + ".report.json"
    _write(report_path, dumps(report))
    if audit is not None:
        print(f"output classification: {audit.classification}")
    if report["certificate"] is not None:
        print(f"certificate passed: {report['certificate']['passed']}")
    return status


def cmd_verify(args):
    if not 3 <= args.cutoff <= 10:
        raise UsageError(f"--cutoff: {args.cutoff} outside 3..10")
    if args.state_cutoff < 4:
        raise UsageError("--state-cutoff must be >= 4")
    space = FockSpace(args.cutoff)
    algebra = verify_algebra(space)
    measure = identity_audit(space)

    state_space = FockSpace(args.state_cutoff)
    p = 0.5 + 0.3j
    coh = coherent_state(0.8, 0.8 * p, state_space)
    mix = hops_mixture(math.pi / 2, 0.0, 0.7, 64, state_space)
    _, s1, s2, s3 = stokes_ops(state_space)
    criteria = [
        ("polarization criterion, coherent (0.8, 0.8p)", check_polarization_criterion(coh, p), 1e-8),
        ("polarized factorization, max order 2", check_factorization(coh, p, "polarized", 2), 1e-6),
        ("hops criterion, phase-grid mixture", check_hops_criterion(mix, 1.0), 1e-8),
        ("hops factorization, max order 2", check_factorization(mix, 1.0, "hops", 2), 1e-6),
        ("|<S1>| on hops mixture", abs(mix.expect(s1)), 1e-8),
        ("|<S2>| on hops mixture", abs(mix.expect(s2)), 1e-8),
        ("|<S3>| on hops mixture", abs(mix.expect(s3)), 1e-8),
    ]
    printed = check_factorization(mix, 1.0, "hops", 2, mapping="printed")
    meas_checks = [
        ("D2-S2", measure.residuals["D2-S2"] < 1e-10),
        ("D3 = sign*S3 resolved", measure.d3_stokes_sign in ("+", "-")),
    ]
    all_pass = (
        algebra.all_passed and all(v <= tol for _, v, tol in criteria) and all(ok for _, ok in meas_checks)
    )
    report = {
        "algebra": algebra.to_dict(),
        "measurement_identities": measure.to_dict(),
        "criteria": [{"check": n, "value": v, "tolerance": t, "passed": v <= t} for n, v, t in criteria],
        "hops_factorization_polarized_index_pattern": printed,
        "state_cutoff": args.state_cutoff,
        "all_passed": all_pass,
        "version": __version__,
    }
    text = dumps(report)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    sign = algebra.sign
    print(
        f"[H0,H2] = {sign['verified']}2i H3 (usually quoted as {sign['claimed']}2i H3); "
        f"all checks passed: {all_pass}",
        file=sys.stderr,
    )
    return 0 if all_pass else 1


def cmd_measure(args):
    _need(args, "input", "scheme", "shots", "seed")
    if args.shots < 1:
        raise UsageError("--shots must be >= 1")
    if not 0 < args.efficiency <= 1:
        raise UsageError("--efficiency must lie in (0, 1]")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must be a 64-bit unsigned integer")
    if args.points < 1:
        raise UsageError("--points must be >= 1")
    e = read_ensemble(args.input)
    if e.basis_tag != "linear":
        raise UsageError("--in: ensemble must be in the linear basis")
    records = simulate_counts(e, args.scheme, DetectorModel(args.efficiency), args.shots, args.seed, args.workers)
    est = estimate(records, args.scheme)
    hidden = classical_hidden(e)
    report = {
        "estimate": est.to_dict(),
        "ensemble_hidden": dict(zip(("h0", "h1", "h2", "h3"), hidden.values)),
        "parameters": _params(args, "scheme", "shots", "efficiency", "seed"),
        "input": Path(args.input).name,
        "version": __version__,
    }
    params = _params(args, "scheme", "shots", "efficiency", "seed")
    if args.counts:
        _write(args.counts, records.to_csv())
        _sidecar(args.counts, "measure", params, {"input": Path(args.input).name})
    if args.plot_data:
        _write(args.plot_data, convergence_csv(convergence_table(records, args.scheme, args.points)))
        _sidecar(args.plot_data, "measure", params, {"input": Path(args.input).name})
    text = dumps(report)
    if args.report:
        _write(args.report, text)
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "stokes": cmd_stokes,
    "hidden": cmd_hidden,
    "pcmi": cmd_pcmi,
    "verify": cmd_verify,
    "measure": cmd_measure,
}


def main(argv=None) -> int:
    parser, subs = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args = _merge(args, subs[args.command], args.command)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"hopsim {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except EnsembleFormatError as exc:
        print(f"hopsim {args.command}: malformed ensemble file: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"hopsim {args.command}: I/O error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"hopsim {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
