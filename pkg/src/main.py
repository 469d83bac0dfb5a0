import argparse
import dataclasses
import json
import logging
import math
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.cartan import CartanParams, canonicalize
from src.constants import VERSION
from src.error_handler import DomainError, handle_domain_error, handle_global_exception
from src.metrology import qfim_pure, uhlmann_pure
from src.models import Command, OutputFormat, RunConfig
from src.noise import (
    ChannelFamily,
    ChannelScope,
    NoiseChannel,
    NoiseScanGrid,
    ProbeClass,
    noise_scan,
    noisy_qfim,
)
from src.optimal import (
    OptimalFamily,
    OptimalFamilySpec,
    Pairing,
    det_map,
    frontier,
    frontier_maxima,
    make_optimal,
    maximize_det_at_fixed_p,
    rx_generate,
    suboptimal_amplitudes,
)
from src.report import (
    HeatmapAxes,
    dumps_csv,
    dumps_json,
    emit_heatmap,
    save_json,
    write_csv,
)
from src.sampling import (
    INV_S_WINDOW,
    P_WINDOW,
    RngSpec,
    ScanKind,
    concurrence_histogram,
    density_histogram,
    scan_frame,
)
from src.states import (
    Basis,
    TwoQubitPureState,
    concurrence_mixed,
    concurrence_pure,
    from_bell_params,
    from_canonical_params,
    purity,
)
from src.utils import parse_angle, parse_floats

assert sys.version_info >= (3, 8), "Python 3.8+ is required"

logger = logging.getLogger(__name__)

PANELS = ("trace-det", "concurrence-p", "concurrence-inv-s")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m src.main",
        description="Metrology of two-qubit Cartan kernels.",
    )
    parser.add_argument("--version", action="version", version=VERSION)

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--out", help="output file; stdout when omitted")
    output.add_argument(
        "--format", choices=[f.value for f in OutputFormat], dest="fmt"
    )

    gate = argparse.ArgumentParser(add_help=False)
    gate.add_argument(
        "--lambda",
        dest="lambda_",
        default="0,0,0",
        help='three angles in radians or as "0.25pi"',
    )

    channel = argparse.ArgumentParser(add_help=False)
    channel.add_argument("--family", choices=[f.value for f in ChannelFamily])
    channel.add_argument("--scope", choices=[s.value for s in ChannelScope])

    commands = parser.add_subparsers(dest="command", required=True)

    qfim = commands.add_parser(
        Command.QFIM.value, parents=[output, gate, channel], help="QFIM of one probe"
    )
    state = qfim.add_mutually_exclusive_group(required=True)
    state.add_argument("--state-canonical", help="a,b,g,d[,pb,pg,pd]")
    state.add_argument("--state-bell", help="[a,]b,c,d[,phases]")
    state.add_argument("--state-json", help="JSON state literal")
    qfim.add_argument("--gamma", type=float, help="noise strength in [0, 1]")

    optimal = commands.add_parser(
        Command.OPTIMAL.value, parents=[output], help="optimal probe families"
    )
    optimal.add_argument("--spec", help="JSON family spec")
    optimal.add_argument(
        "--optimal-family",
        choices=[f.value for f in OptimalFamily],
        default=OptimalFamily.BELL_UNIFORM.value,
    )
    optimal.add_argument("--phi", default="0")
    optimal.add_argument("--index", type=int, default=1)
    optimal.add_argument("--alpha", type=float, default=0.0)
    optimal.add_argument("--beta", type=float, default=0.0)
    optimal.add_argument("--signs", default="+,+")
    optimal.add_argument("--phases", default="0,0,0")
    optimal.add_argument("--p", type=float)
    optimal.add_argument("--position", type=int, default=1)
    optimal.add_argument("--rx", help="theta_a,theta_b")
    optimal.add_argument(
        "--pairing", choices=[p.value for p in Pairing], default=Pairing.A_OUTER.value
    )

    frontier_parser = commands.add_parser(
        Command.FRONTIER.value, parents=[output], help="minimum sloppiness at p"
    )
    frontier_parser.add_argument("--p", type=float, required=True)
    frontier_parser.add_argument(
        "--verify", action="store_true", help="add the grid maximization oracle"
    )
    frontier_parser.add_argument(
        "--bins", type=int, default=256, help="grid size of the SVG 1/s map"
    )

    sample = commands.add_parser(
        Command.SAMPLE.value, parents=[output], help="Monte-Carlo probe scan"
    )
    sample.add_argument("--n", type=int, default=10_000)
    sample.add_argument(
        "--kind", choices=[k.value for k in ScanKind], default=ScanKind.HAAR.value
    )
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--rng", default="Philox")
    sample.add_argument("--panel", choices=PANELS, default=PANELS[0])

    noise = commands.add_parser(
        Command.NOISE_SCAN.value,
        parents=[output, gate, channel],
        help="precision over (gamma, phi) grids",
    )
    noise.add_argument(
        "--class",
        dest="probe",
        choices=[c.value for c in ProbeClass],
        default=ProbeClass.PSI1.value,
    )
    noise.add_argument("--gamma-grid", type=int, default=101)
    noise.add_argument("--phi-grid", type=int, default=64)

    commands.add_parser(
        Command.CANONICALIZE.value,
        parents=[output, gate],
        help="map lambda into the canonical domain",
    )
    return parser


def config_from_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    options = vars(args).copy()
    command = Command(options.pop("command"))
    out = options.pop("out", None)
    fmt = options.pop("fmt", None)
    return RunConfig(
        command=command,
        options=options,
        out=out,
        fmt=OutputFormat(fmt) if fmt else None,
    )


def parse_lambda(text: str) -> CartanParams:
    values = parse_floats(text, angles=True)
    if len(values) != 3:
        raise DomainError(f"--lambda needs 3 values, got {len(values)}")
    return CartanParams.of(values)


def parse_state(config: RunConfig) -> TwoQubitPureState:
    if config.option("state_json"):
        try:
            literal = json.loads(config.option("state_json"))
        except json.JSONDecodeError as ex:
            raise DomainError(f"Malformed state literal: {ex}") from ex
        if not isinstance(literal, dict):
            raise DomainError("State literal must be a JSON object")
        return TwoQubitPureState.from_dict(literal)

    if config.option("state_canonical"):
        values = parse_floats(config.option("state_canonical"), angles=True)
        if len(values) not in (4, 7):
            raise DomainError(f"--state-canonical needs 4 or 7 values, got {values}")
        return from_canonical_params(*values)

    values = parse_floats(config.option("state_bell", ""), angles=True)
    if len(values) in (3, 6):
        b, c, d = values[:3]
        remainder = 1 - b * b - c * c - d * d
        if remainder < -1e-10:
            raise DomainError(f"b^2 + c^2 + d^2 exceeds 1 by {-remainder:.3e}")
        values = [math.sqrt(max(0.0, remainder))] + values
    if len(values) not in (4, 7):
        raise DomainError(f"--state-bell needs 3, 4, 6 or 7 values, got {values}")
    return from_bell_params(*values)


def _channel(config: RunConfig, gamma: float) -> NoiseChannel:
    family = ChannelFamily(config.option("family", ChannelFamily.BIT_FLIP.value))
    scope = ChannelScope(config.option("scope", ChannelScope.SINGLE.value))
    return NoiseChannel(family, scope, gamma)


def _state_summary(psi: TwoQubitPureState) -> Dict[str, Any]:
    return {
        "canonical": psi.in_basis(Basis.CANONICAL).to_dict(),
        "bell": psi.in_basis(Basis.BELL).to_dict(),
    }


def run_qfim(config: RunConfig) -> Dict[str, Any]:
    psi = parse_state(config)
    params = parse_lambda(config.option("lambda_"))
    gamma = config.option("gamma")
    if gamma is None and (config.option("family") or config.option("scope")):
        raise DomainError("--family and --scope describe a channel and need --gamma")
    payload = config.metadata(**{"lambda": list(params)})
    payload["state"] = _state_summary(psi)

    if gamma is None:
        qfim = qfim_pure(psi, params)
        payload["concurrence"] = concurrence_pure(psi)
        payload["uhlmann_max_abs"] = uhlmann_pure(psi, params).max_abs
    else:
        channel = _channel(config, gamma)
        model = noisy_qfim(psi, channel, params)
        qfim = model.qfim
        payload["channel"] = {
            "family": channel.family.value,
            "scope": channel.scope.value,
            "gamma": channel.gamma,
        }
        payload["concurrence"] = concurrence_mixed(model.rho)
        payload["purity"] = purity(model.rho)
        payload["uhlmann_max_abs"] = model.uhlmann.max_abs

    payload.update(qfim.to_dict())
    payload["matrix_bound_gap"] = qfim.matrix_bound_gap
    return payload


def _optimal_spec(config: RunConfig) -> OptimalFamilySpec:
    if config.option("spec"):
        try:
            return OptimalFamilySpec.from_dict(json.loads(config.option("spec")))
        except json.JSONDecodeError as ex:
            raise DomainError(f"Malformed family spec: {ex}") from ex
    signs = [s.strip() for s in config.option("signs").split(",")]
    if len(signs) != 2 or any(s not in ("+", "-") for s in signs):
        raise DomainError(f"--signs takes two of + or -, got {config.option('signs')}")
    phases = parse_floats(config.option("phases"), angles=True)
    if len(phases) != 3:
        raise DomainError(f"--phases needs 3 values, got {len(phases)}")
    return OptimalFamilySpec(
        family=OptimalFamily(config.option("optimal_family")),
        phi=parse_angle(config.option("phi")),
        index=config.option("index"),
        alpha=config.option("alpha"),
        beta=config.option("beta"),
        plus_first=signs[0] == "+",
        plus_second=signs[1] == "+",
        phases=(phases[0], phases[1], phases[2]),
        p=config.option("p"),
        position=config.option("position"),
    )


def run_optimal(config: RunConfig) -> Dict[str, Any]:
    payload = config.metadata()
    if config.option("rx"):
        thetas = parse_floats(config.option("rx"), angles=True)
        if len(thetas) != 2:
            raise DomainError(f"--rx needs 2 angles, got {len(thetas)}")
        pairing = Pairing(config.option("pairing"))
        psi = rx_generate(thetas[0], thetas[1], pairing)
        payload["rx"] = {"thetas": thetas, "pairing": pairing.value}
    else:
        spec = _optimal_spec(config)
        psi = make_optimal(spec)
        payload["spec"] = spec.to_dict()
    qfim = qfim_pure(psi, CartanParams(0.0, 0.0, 0.0))
    payload["state"] = _state_summary(psi)
    payload["concurrence"] = concurrence_pure(psi)
    payload.update(qfim.to_dict())
    return payload


def run_frontier(config: RunConfig) -> Dict[str, Any]:
    p = config.option("p")
    kappa1, kappa2 = suboptimal_amplitudes(p)
    payload = config.metadata()
    payload.update({"p": p, "inv_s": frontier(p), "kappa1": kappa1, "kappa2": kappa2})
    if config.option("verify"):
        payload["grid_maximum"] = maximize_det_at_fixed_p(p).to_dict()
        payload["maxima"] = [point.to_dict() for point in frontier_maxima(p)]
    return payload


def run_frontier_map(config: RunConfig) -> None:
    p = config.option("p")
    axis, values = det_map(p, config.option("bins"))
    axes = HeatmapAxes(
        x_label="b",
        y_label="c",
        x_range=(0.0, 1.0),
        y_range=(0.0, 1.0),
        title=f"1/s at p = {p:g}",
        color_label="1/s",
    )
    metadata = config.metadata(p=p, bins=len(axis), frontier=frontier(p))
    emit_heatmap(values, axes, config.out, metadata)


def run_canonicalize(config: RunConfig) -> Dict[str, Any]:
    params = parse_lambda(config.option("lambda_"))
    result, ops = canonicalize(params)
    payload = config.metadata()
    payload.update(
        {
            "input": list(params),
            "lambda": list(result),
            "in_domain": result.in_canonical_domain(),
            "ops": [move.to_dict() for move in ops],
        }
    )
    return payload


def _emit(config: RunConfig, payload: Dict[str, Any]) -> None:
    if config.out:
        save_json(payload, config.out)
    else:
        print(dumps_json(payload))


def run_sample(config: RunConfig) -> None:
    kind = ScanKind(config.option("kind"))
    rng = RngSpec(seed=config.option("seed"), algorithm=config.option("rng"))
    n = config.option("n")
    frame = scan_frame(n, kind, rng)
    metadata = config.metadata(
        seed=rng.seed, algorithm=rng.algorithm, n=n, kind=kind.value
    )

    if config.output_format == OutputFormat.CSV:
        if config.out:
            write_csv(frame, config.out, metadata)
        else:
            sys.stdout.write(dumps_csv(frame, metadata))
        return

    panel = config.option("panel")
    if panel == "trace-det":
        counts, _, _ = density_histogram(frame)
        axes = HeatmapAxes("p", "1/s", P_WINDOW, INV_S_WINDOW, "trace-determinant")
    else:
        metric = "p" if panel == "concurrence-p" else "inv_s"
        counts, _, _ = concurrence_histogram(frame, metric)
        window = P_WINDOW if metric == "p" else INV_S_WINDOW
        axes = HeatmapAxes("concurrence", metric, (0.0, 1.0), window, panel)
    emit_heatmap(
        np.log10(1 + counts),
        dataclasses.replace(axes, color_label="log10(1 + count)"),
        config.out,
        {**metadata, "panel": panel},
    )


def run_noise_scan(config: RunConfig) -> None:
    grid = NoiseScanGrid(
        probe=ProbeClass(config.option("probe")),
        gamma_count=config.option("gamma_grid"),
        phi_count=config.option("phi_grid"),
    )
    family = ChannelFamily(config.option("family", ChannelFamily.BIT_FLIP.value))
    scope = ChannelScope(config.option("scope", ChannelScope.SINGLE.value))
    params = parse_lambda(config.option("lambda_"))
    result = noise_scan(grid, family, scope, params)
    metadata = config.metadata(**result.metadata())

    if config.output_format == OutputFormat.CSV:
        frame = result.to_frame()
        if config.out:
            write_csv(frame, config.out, metadata)
        else:
            sys.stdout.write(dumps_csv(frame, metadata))
        return

    axes = HeatmapAxes(
        x_label="gamma",
        y_label="phi",
        x_range=(0.0, 1.0),
        y_range=(0.0, 2 * math.pi),
        title=f"{grid.probe.value} {family.value}/{scope.value}",
        color_label="p",
    )
    emit_heatmap(result.p, axes, config.out, metadata)


def run(config: RunConfig) -> int:
    logger.info(f"Running {config.command.value}")
    if config.command == Command.QFIM:
        _emit(config, run_qfim(config))
    elif config.command == Command.OPTIMAL:
        _emit(config, run_optimal(config))
    elif config.command == Command.FRONTIER:
        if config.output_format == OutputFormat.SVG:
            run_frontier_map(config)
        else:
            _emit(config, run_frontier(config))
    elif config.command == Command.CANONICALIZE:
        _emit(config, run_canonicalize(config))
    elif config.command == Command.SAMPLE:
        run_sample(config)
    elif config.command == Command.NOISE_SCAN:
        run_noise_scan(config)
    else:
        raise ValueError(f"Invalid command: {config.command}")
    logger.info(f"Finished {config.command.value}")
    return 0


@handle_global_exception
@handle_domain_error
def main(argv: Optional[List[str]] = None) -> int:
    return run(config_from_args(argv))


if __name__ == "__main__":
    from src import project_dir, setup_logger

    setup_logger(project_dir)
    sys.exit(main())
