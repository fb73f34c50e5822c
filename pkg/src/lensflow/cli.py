"""Command-line entry point: ``lensflow <command> [options]``.

Commands: evolve, selfsim, energy, fish, certify, blowup.  Options can also come
from a TOML file (``--config``) whose sections mirror the commands; flags win
over the file.  Exit codes: 0 success, 1 failed check or numerical failure,
2 usage, configuration or I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Any, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from . import energy as en
from .errors import LensflowError

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2

# allowed keys per TOML section
SCHEMA: dict[str, dict[str, type | tuple[type, ...]]] = {
    "init": {"kind": str, "width": (int, float), "n": int, "amplitude": (int, float), "scale": (int, float)},
    "flow": {"n": int, "cfl": (int, float), "scheme": str, "t_end": (int, float), "area_floor": (int, float),
             "snapshot_stride": int, "ratio_stride": int},
    "output": {"dir": str},
    "selfsim": {"tol": (int, float), "n": int},
    "energy": {"eta": (int, float), "rho": (int, float), "certify": bool, "json": str},
    "fish": {"tol": (int, float)},
    "blowup": {"lambdas": list, "tau": (int, float), "input": str},
}
POSITIVE = {("selfsim", "tol"), ("fish", "tol"), ("init", "width"), ("flow", "cfl")}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # raise instead of exiting so run() owns the exit code
        raise UsageError(f"{self.prog}: {message}")


def load_config(path: str | None) -> dict[str, dict[str, Any]]:
    """Parse and validate a TOML config; unknown sections or keys are rejected."""
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"invalid TOML in {path}: {exc}") from exc
    for section, body in data.items():
        if section not in SCHEMA:
            raise UsageError(f"{path}: unknown section [{section}]")
        if not isinstance(body, dict):
            raise UsageError(f"{path}: [{section}] must be a table")
        for key, value in body.items():
            if key not in SCHEMA[section]:
                raise UsageError(f"{path}: unknown key '{key}' in [{section}]")
            kind = SCHEMA[section][key]
            if isinstance(value, bool) and kind is not bool:
                raise UsageError(f"{path}: [{section}] {key} has the wrong type")
            if not isinstance(value, kind):
                raise UsageError(f"{path}: [{section}] {key} has the wrong type")
            if (section, key) in POSITIVE and not value > 0:
                raise UsageError(f"{path}: [{section}] {key} must be positive")
    return data


def _pick(flag: Any, config: dict, section: str, key: str, default: Any) -> Any:
    if flag is not None:
        return flag
    return config.get(section, {}).get(key, default)


def _positive(value: float, name: str) -> float:
    if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
        raise UsageError(f"{name} must be a positive number")
    return float(value)


def _lambdas(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad lambda list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lensflow", description="Lens-shaped networks under curve shortening flow.")
    p.add_argument("--config", help="TOML file with [init], [flow], [output], ... sections")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def init_flags(sp):
        sp.add_argument("--init", dest="kind", choices=["circular-arc", "perturbed", "scaled-selfsimilar"])
        sp.add_argument("--width", type=float)
        sp.add_argument("--amplitude", type=float)
        sp.add_argument("--scale", type=float)
        sp.add_argument("--n", type=int)
        sp.add_argument("--cfl", type=float)
        sp.add_argument("--scheme", choices=["explicit", "semi_implicit"])
        sp.add_argument("--t-end", dest="t_end", type=float)
        sp.add_argument("--area-floor", dest="area_floor", type=float)
        sp.add_argument("--snapshot-stride", dest="snapshot_stride", type=int)
        sp.add_argument("--ratio-stride", dest="ratio_stride", type=int)

    ev = sub.add_parser("evolve", help="run the flow from an initial lens")
    init_flags(ev)
    ev.add_argument("--out", help="output directory")

    ss = sub.add_parser("selfsim", help="shoot the self-similar lens")
    ss.add_argument("--tol", type=float)
    ss.add_argument("--n", type=int, help="graph samples for the JSON profile")
    ss.add_argument("--out")

    eg = sub.add_parser("energy", help="turning integrals and energy-level constants")
    eg.add_argument("--eta", type=float)
    eg.add_argument("--rho", type=float)
    eg.add_argument("--certify", action="store_true", default=None)
    eg.add_argument("--json", help="write the report to this path")

    fi = sub.add_parser("fish", help="construct the fish-shaped shrinker")
    fi.add_argument("--tol", type=float)
    fi.add_argument("--out")

    ce = sub.add_parser("certify", help="numeric certificate for lens uniqueness")
    ce.add_argument("--out")

    bl = sub.add_parser("blowup", help="rescale a run towards its extinction point")
    bl.add_argument("--input", help="snapshots.json written by evolve (otherwise a run is made)")
    init_flags(bl)
    bl.add_argument("--lambdas", type=_lambdas)
    bl.add_argument("--tau", type=float)
    bl.add_argument("--out")
    return p


# ---------------------------------------------------------------------------
# commands

def _outdir(args, config) -> Path:
    return Path(_pick(getattr(args, "out", None), config, "output", "dir", "."))


def _initial_and_config(args, config):
    from .flow import FlowConfig
    from .geometry import build_initial_lens

    kind = _pick(args.kind, config, "init", "kind", "circular-arc").replace("-", "_")
    width = _positive(_pick(args.width, config, "init", "width", 2.0), "width")
    n = int(_pick(args.n, config, "flow", "n", config.get("init", {}).get("n", 256)))
    amplitude = float(_pick(args.amplitude, config, "init", "amplitude", 0.0))
    scale = _positive(_pick(args.scale, config, "init", "scale", 1.0), "scale")
    initial = build_initial_lens(kind, n=n, a=-0.5 * width, b=0.5 * width, amplitude=amplitude, scale=scale)
    t_end = _pick(args.t_end, config, "flow", "t_end", None)
    cfg = FlowConfig(
        n=n,
        cfl=_positive(_pick(args.cfl, config, "flow", "cfl", 0.4), "cfl"),
        scheme=_pick(args.scheme, config, "flow", "scheme", "explicit"),
        t_end=None if t_end is None else float(t_end),
        area_floor=float(_pick(args.area_floor, config, "flow", "area_floor", 0.0)),
        snapshot_stride=int(_pick(args.snapshot_stride, config, "flow", "snapshot_stride", 200)),
        ratio_stride=int(_pick(args.ratio_stride, config, "flow", "ratio_stride", 5)),
    )
    return initial, cfg


def cmd_evolve(args, config) -> int:
    from .flow import evolve
    from .geometry import network_from_profile
    from .io import atomic_write, diagnostics_csv, write_json
    from .svg import emit_svg

    initial, cfg = _initial_and_config(args, config)
    traj = evolve(initial, cfg)
    out = _outdir(args, config)
    atomic_write(out / "diagnostics.csv", diagnostics_csv(traj.diagnostics))
    write_json(out / "snapshots.json", traj.to_dict())
    atomic_write(out / "lens.svg", emit_svg(network_from_profile(traj.snapshots[0])))
    atomic_write(out / "lens_final.svg", emit_svg(network_from_profile(traj.snapshots[-1])))
    est = traj.extinction_estimate
    print(f"steps={traj.steps}")
    print(f"snapshots={len(traj.snapshots)}")
    print(f"stop={traj.stop_reason}")
    if est is not None:
        print(f"T_hat={est.T!r}")
        print(f"x0_hat={est.x0[0]!r}")
        print(f"area_slope={est.area_slope!r}")
    return EXIT_OK


def cmd_selfsim(args, config) -> int:
    from .classify import construct_self_similar_network
    from .io import write_json
    from .shooting import find_symmetric_lens, symmetric_lens_graph
    from .svg import emit_svg

    tol = _positive(_pick(args.tol, config, "selfsim", "tol", 1e-10), "tol")
    n = int(_pick(args.n, config, "selfsim", "n", 256))
    H, prof = find_symmetric_lens(tol)
    graph = symmetric_lens_graph(n, tol=tol)
    etas = en.eta_from_h(H)
    net = construct_self_similar_network("lens", {"height": H})
    out = _outdir(args, config)
    write_json(out / "selfsim.json", {
        "H": H, "b": prof.contact_x, "contact_slope": prof.contact_slope, "energy": prof.energy,
        "eta": etas.get("tilde"), "eta_bar": etas.get("bar"), "profile": graph.to_dict(),
    })
    from .io import atomic_write

    atomic_write(out / "selfsim.svg", emit_svg(net))
    print(f"H={H!r}")
    print(f"b={prof.contact_x!r}")
    print(f"E_u={prof.energy!r}")
    print(f"eta={etas.get('tilde')!r}")
    print(f"contact_slope={prof.contact_slope!r}")
    return EXIT_OK


def energy_report() -> dict[str, Any]:
    lo, hi = en.eta0()
    e0 = 0.5 * (lo + hi)
    grid = en.sample_grid(e0, en.ETA_CAP, 1000)
    sig = [en.sigma(float(e)) for e in grid]
    return {
        "eta0_bracket": [lo, hi],
        "psi_eta0": en.psi(e0),
        "eta_star": en.eta_star(),
        "sigma_max": max(sig),
        "theta_limits": {"rho=1+1e-4": en.theta(1.0 + 1e-4), "pi/sqrt2": math.pi / math.sqrt(2.0),
                         "rho=1e3": en.theta(1e3), "pi/2": math.pi / 2},
    }


def energy_certify() -> dict[str, Any]:
    """All inequality suites: the lens certificate plus the asymmetric-fish check."""
    from .classify import certify_asymmetric_fish_nonexistence, certify_lens_uniqueness

    report = certify_lens_uniqueness()
    report.checks.append(certify_asymmetric_fish_nonexistence())
    out = report.to_dict()
    out["riemann_upper"] = en.psi_upper_bound_riemann(en.ETA0_UPPER, 3)
    out["passed"] = report.passed and out["riemann_upper"] <= 0.785
    return out


def cmd_energy(args, config) -> int:
    from .io import write_json

    eta = _pick(args.eta, config, "energy", "eta", None)
    rho = _pick(args.rho, config, "energy", "rho", None)
    certify = bool(_pick(args.certify, config, "energy", "certify", False))
    target = _pick(args.json, config, "energy", "json", None)
    report = energy_report()
    if eta is not None:
        eta = float(eta)
        if not eta > 1.0:
            raise UsageError("--eta must exceed 1")
        report["eta"] = {"eta": eta, "psi": en.psi(eta), "C": en.coefficient_C(eta), "A": en.A_of_eta(eta)}
        if eta >= report["eta0_bracket"][0]:
            report["eta"]["eta_bar"] = en.eta_bar(eta)
            report["eta"]["sigma"] = en.sigma(eta)
    if rho is not None:
        rho = float(rho)
        if not rho > 1.0:
            raise UsageError("--rho must exceed 1")
        report["rho"] = {"rho": rho, "theta": en.theta_log(math.log(rho))}
    code = EXIT_OK
    if certify:
        report["certify"] = energy_certify()
        code = EXIT_OK if report["certify"]["passed"] else EXIT_CHECK
    for key in ("psi_eta0", "eta_star", "sigma_max"):
        print(f"{key}={report[key]!r}")
    print(f"eta0={0.5 * sum(report['eta0_bracket'])!r}")
    if "eta" in report:
        print(f"psi={report['eta']['psi']!r}")
    if "rho" in report:
        print(f"theta={report['rho']['theta']!r}")
    if certify:
        print("certify=" + ("PASS" if code == EXIT_OK else "FAIL"))
    if target:
        write_json(target, report)
    return code


def cmd_fish(args, config) -> int:
    from .classify import find_fish
    from .io import atomic_write, write_json
    from .svg import emit_svg

    tol = _positive(_pick(args.tol, config, "fish", "tol", 1e-10), "tol")
    sol = find_fish(tol)
    out = _outdir(args, config)
    write_json(out / "fish.json", sol.to_dict())
    atomic_write(out / "fish.svg", emit_svg(sol.geometry))
    print(f"r_min={sol.r_min!r}")
    print(f"K={sol.K!r}")
    print(f"closure_residual={sol.closure_residual!r}")
    print(f"ray_angle={sol.ray_angle!r}")
    return EXIT_OK


def cmd_certify(args, config) -> int:
    from .classify import certify_asymmetric_fish_nonexistence, certify_lens_uniqueness
    from .io import atomic_write, write_json

    report = certify_lens_uniqueness()
    report.checks.append(certify_asymmetric_fish_nonexistence())
    out = _outdir(args, config)
    write_json(out / "certify.json", report.to_dict())
    text = report.text()
    atomic_write(out / "certify.txt", text + "\n")
    print(text)
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_blowup(args, config) -> int:
    from .blowup import convergence_report
    from .flow import evolve
    from .io import atomic_write, csv_text, read_json, trajectory_from_dict

    source = _pick(args.input, config, "blowup", "input", None)
    if source:
        traj = trajectory_from_dict(read_json(source))
    else:
        initial, cfg = _initial_and_config(args, config)
        traj = evolve(initial, cfg)
    lambdas = _pick(args.lambdas, config, "blowup", "lambdas", [2.0, 4.0, 8.0, 16.0])
    tau = float(_pick(args.tau, config, "blowup", "tau", -0.5))
    if not tau < 0:
        raise UsageError("--tau must be negative")
    seq = convergence_report(traj, [float(v) for v in lambdas], tau)
    out = _outdir(args, config)
    atomic_write(out / "blowup.csv", csv_text(("i", "lambda", "hausdorff", "density_gap_rms"), seq.rows()))
    for i, lam, h, g in seq.rows():
        print(f"i={i} lambda={lam!r} hausdorff={h!r} density_gap_rms={g!r}")
    return EXIT_OK


COMMANDS = {
    "evolve": cmd_evolve,
    "selfsim": cmd_selfsim,
    "energy": cmd_energy,
    "fish": cmd_fish,
    "certify": cmd_certify,
    "blowup": cmd_blowup,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(sys.argv[1:] if argv is None else argv))
        if args.command is None:
            raise UsageError("a command is required: " + ", ".join(COMMANDS))
        config = load_config(args.config)
        return COMMANDS[args.command](args, config)
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LensflowError, ValueError) as exc:
        # domain errors from bad parameters are usage errors, numerical failures are not
        from .errors import CompatibilityError, DomainError, InvalidGridError

        if isinstance(exc, (DomainError, CompatibilityError, InvalidGridError)):
            print(f"usage error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
