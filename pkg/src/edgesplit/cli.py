"""Command-line front end.

Subcommands:
  fit       fit a model family to measured points (file or bundled table)
  plan      choose a container count from models and emit a split plan
  simulate  sweep predicted metrics over container counts into a CSV
  run       execute a split plan on a backend while sampling power
  report    turn points or a simulated sweep into a savings table

Exit codes: 0 success, 1 usage error, 2 data error, 3 execution error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from typing import Sequence

from edgesplit import executor, fixtures, modelfit, planner, powermeter, splitter
from edgesplit.errors import DataFormatError, UsageError

SWEEP_CSV_HEADER = ("n", "time_s", "energy_j", "power_w")

DEFAULT_WORK_UNITS = 900


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: A003 - argparse API
        raise UsageError(message)


def load_points(name_or_path: str) -> list[modelfit.DataPoint]:
    """Resolve a bundled table name, else read a points CSV."""
    if name_or_path in fixtures.POINT_TABLES:
        return list(fixtures.get_points(name_or_path))
    return modelfit.points_from_csv(name_or_path)


def _resolve_device(spec: str) -> executor.DeviceProfile:
    if spec in executor.BUILTIN_PROFILES:
        return executor.BUILTIN_PROFILES[spec]
    return executor.load_profile(spec)


def _resolve_models(args, device: executor.DeviceProfile,
                    need_power: bool) -> dict[str, modelfit.Model | None]:
    bundled = fixtures.REFERENCE_MODELS.get(device.name, {})
    models: dict[str, modelfit.Model | None] = {}
    for metric, flag in (("time", args.time_model),
                         ("energy", args.energy_model),
                         ("power", args.power_model)):
        if flag is not None:
            models[metric] = modelfit.load_model(flag).model
        else:
            models[metric] = bundled.get(metric)
    for metric in ("time", "energy"):
        if models[metric] is None:
            raise UsageError(
                f"no {metric} model: pass --{metric}-model for custom "
                f"device profiles")
    if need_power and models["power"] is None:
        raise UsageError("--power-cap requires a power model")
    return models


def _write_or_print(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_fit(args) -> int:
    points = load_points(args.input)
    if args.family == "quadratic":
        model = modelfit.fit_quadratic(points)
    elif args.family == "exp":
        model = modelfit.fit_saturating_exp(points)
    else:
        model = modelfit.fit_auto(points)
    stored = modelfit.StoredModel(model=model,
                                  reference_value=args.reference_value,
                                  reference_unit=args.reference_unit)
    _write_or_print(modelfit.model_to_text(stored), args.out)
    if args.out is not None:
        family = (modelfit.FAMILY_QUADRATIC
                  if isinstance(model, modelfit.QuadraticModel)
                  else modelfit.FAMILY_EXP)
        print(f"fitted {family} model over {len(points)} points "
              f"(rmse {model.rmse:.6f}) -> {args.out}")
    return 0


def _cmd_plan(args) -> int:
    device = _resolve_device(args.device)
    need_power = args.power_cap is not None
    models = _resolve_models(args, device, need_power)
    if args.objective == "weighted":
        if args.wt is None:
            raise UsageError("--objective weighted requires --wt")
        if not 0.0 <= args.wt <= 1.0:
            raise UsageError("--wt must be within [0, 1]")
        objective = planner.Objective(kind="weighted", weight_time=args.wt,
                                      weight_energy=1.0 - args.wt)
    else:
        objective = planner.Objective(kind=args.objective)
    constraints = planner.Constraints(
        max_containers=args.max_containers or device.max_containers,
        power_cap=args.power_cap,
        marginal_gain_epsilon=args.epsilon,
    )
    decision = planner.optimal_containers(
        models["time"], models["energy"], models["power"],
        objective, constraints, device)

    print(f"device: {device.name}")
    print(f"chosen_containers: {decision.n_containers}")
    print(f"objective_value: {decision.objective_value:.6f}")
    print(f"time_ratio: {decision.time_ratio:.6f}")
    print(f"energy_ratio: {decision.energy_ratio:.6f}")
    print(f"power_ratio: {decision.power_ratio:.6f}")
    print(f"predicted_time_s: {decision.time_s:.3f}")
    print(f"predicted_energy_j: {decision.energy_j:.3f}")
    print(f"predicted_power_w: {decision.power_w:.3f}")
    if decision.continuous_minimum is not None:
        print(f"continuous_minimum: {decision.continuous_minimum:.3f}")

    plan = splitter.make_split_plan(args.work_units, decision.n_containers,
                                    device.total_cores)
    print(f"cpu_share_per_container: "
          f"{plan.cpu_share_per_container:.2f}")
    if args.out is not None:
        splitter.save_plan(plan, args.out)
        print(f"split plan -> {args.out}")
    return 0


def _cmd_simulate(args) -> int:
    device = _resolve_device(args.device)
    models = _resolve_models(args, device, need_power=False)
    top = args.max_containers or device.max_containers
    lines = [",".join(SWEEP_CSV_HEADER)]
    for n in range(1, top + 1):
        seed = None if args.seed is None else args.seed * 1_000_003 + n
        metrics = executor.simulate_run(device, models["time"],
                                        models["energy"], n, noise_seed=seed)
        lines.append(f"{n},{metrics.wall_time!r},{metrics.energy!r},"
                     f"{metrics.avg_power!r}")
    _write_or_print("\n".join(lines) + "\n", args.out)
    if args.out is not None:
        print(f"sweep over n=1..{top} -> {args.out}")
    return 0


def _plan_for_run(args) -> tuple[splitter.SplitPlan,
                                 executor.DeviceProfile | None]:
    if args.plan is not None:
        return splitter.load_plan(args.plan), None
    if args.device is None or args.containers is None:
        raise UsageError("run needs either --plan or --device with "
                         "--containers")
    device = _resolve_device(args.device)
    plan = splitter.make_split_plan(args.work_units, args.containers,
                                    device.total_cores)
    return plan, device


def _source_for_run(spec: str) -> powermeter.PowerSource:
    kind, _, value = spec.partition(":")
    if kind == "constant":
        try:
            return powermeter.ConstantSource(float(value or "5.0"))
        except ValueError:
            raise UsageError(f"bad constant source wattage: {value!r}") \
                from None
    if kind == "replay":
        if not value:
            raise UsageError("replay source needs a path: replay:TRACE.csv")
        return powermeter.ReplaySource.from_csv(value)
    raise UsageError(f"unknown power source {spec!r} "
                     f"(use constant:WATTS or replay:PATH)")


def _backend_for_run(args,
                     device: executor.DeviceProfile | None) -> executor.Backend:
    if args.backend == "mock":
        try:
            durations = [float(d)
                         for d in (args.durations or "0.05").split(",")]
        except ValueError:
            raise UsageError(
                f"--durations must be comma-separated seconds, "
                f"got {args.durations!r}") from None
        return executor.MockBackend(durations)
    if args.backend == "simulated":
        dev = device if device is not None \
            else _resolve_device(args.device or "tx2")
        models = fixtures.REFERENCE_MODELS.get(dev.name)
        if args.time_model is not None:
            time_model = modelfit.load_model(args.time_model).model
        elif models is not None:
            time_model = models["time"]
        else:
            raise UsageError("simulated backend needs --time-model for "
                             "custom device profiles")
        return executor.SimulatedBackend(dev, time_model,
                                         time_scale=args.time_scale)
    payload = executor.SpinPayload(iterations_per_unit=args.iterations)
    return executor.LocalProcessBackend(payload=payload)


def _cmd_run(args) -> int:
    plan, device = _plan_for_run(args)
    backend = _backend_for_run(args, device)
    source = _source_for_run(args.source)
    outcome = executor.run_experiment(plan, backend, source,
                                      interval=args.interval)
    metrics = outcome.metrics
    print(f"n_containers: {metrics.n_containers}")
    print(f"wall_time_s: {metrics.wall_time:.6f}")
    print(f"energy_j: {metrics.energy:.6f}")
    print(f"avg_power_w: {metrics.avg_power:.6f}")
    print(f"merged_outputs: {len(outcome.outputs)}")
    print(f"per_worker_times_s: "
          f"{','.join(f'{t:.6f}' for t in metrics.per_worker_times)}")
    if args.out is not None:
        powermeter.trace_to_csv(outcome.trace, args.out)
        print(f"power trace -> {args.out}")
    return 0


def _sweep_from_csv(path: str) -> dict[str, list[modelfit.DataPoint]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != SWEEP_CSV_HEADER:
            raise DataFormatError(
                f"{path}: expected header '{','.join(SWEEP_CSV_HEADER)}'")
        tables: dict[str, list[modelfit.DataPoint]] = {
            "time": [], "energy": [], "power": []}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                n = float(row[0])
                tables["time"].append(modelfit.DataPoint(n, float(row[1])))
                tables["energy"].append(modelfit.DataPoint(n, float(row[2])))
                tables["power"].append(modelfit.DataPoint(n, float(row[3])))
            except (ValueError, IndexError):
                raise DataFormatError(
                    f"{path}: malformed row at line {lineno}") from None
    if not tables["time"]:
        raise DataFormatError(f"{path}: no data rows")
    return tables


def _looks_like_sweep(path: str) -> bool:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            header = next(csv.reader(fh), None)
    except OSError:
        return False
    return header is not None \
        and tuple(h.strip() for h in header) == SWEEP_CSV_HEADER


def _cmd_report(args) -> int:
    if args.input not in fixtures.POINT_TABLES and _looks_like_sweep(args.input):
        tables = _sweep_from_csv(args.input)
        report = planner.savings_report(time=tables["time"],
                                        energy=tables["energy"],
                                        power=tables["power"])
    else:
        time_points = load_points(args.input)
        energy_points = load_points(args.energy_input) \
            if args.energy_input else None
        power_points = load_points(args.power_input) \
            if args.power_input else None
        report = planner.savings_report(time=time_points,
                                        energy=energy_points,
                                        power=power_points)
    _write_or_print(report.to_csv_text(), args.out)
    if args.out is not None:
        print(f"savings report ({len(report.rows)} rows) -> {args.out}")
    return 0


def _add_model_flags(sub) -> None:
    sub.add_argument("--time-model", help="fitted time model file")
    sub.add_argument("--energy-model", help="fitted energy model file")
    sub.add_argument("--power-model", help="fitted power model file")


def build_parser() -> _Parser:
    parser = _Parser(prog="edgesplit",
                     description="Split a divisible workload across "
                                 "CPU-capped containers: measure, model, "
                                 "and plan the time/energy trade-off.")
    subs = parser.add_subparsers(dest="command", metavar="COMMAND")

    fit = subs.add_parser("fit", parents=[], help="fit a model to points")
    fit.add_argument("--input", required=True,
                     help="points CSV (header x,value) or bundled table name")
    fit.add_argument("--family", choices=("quadratic", "exp", "auto"),
                     default="auto")
    fit.add_argument("--reference-value", type=float, default=1.0,
                     help="benchmark reference the model scales against")
    fit.add_argument("--reference-unit", default="ratio")
    fit.add_argument("--out", help="model file to write (default: stdout)")
    fit.set_defaults(func=_cmd_fit)

    plan = subs.add_parser("plan", help="choose a container count")
    plan.add_argument("--device", required=True,
                      help="builtin profile name (tx2, orin) or profile file")
    _add_model_flags(plan)
    plan.add_argument("--objective",
                      choices=("min_time", "min_energy", "weighted"),
                      default="min_time")
    plan.add_argument("--wt", type=float,
                      help="weight on time for --objective weighted")
    plan.add_argument("--epsilon", type=float,
                      help="marginal-gain cutoff on the objective metric")
    plan.add_argument("--power-cap", type=float,
                      help="maximum allowed average power, watts")
    plan.add_argument("--max-containers", type=int)
    plan.add_argument("--work-units", type=int, default=DEFAULT_WORK_UNITS)
    plan.add_argument("--out", help="split plan file to write")
    plan.set_defaults(func=_cmd_plan)

    simulate = subs.add_parser("simulate",
                               help="sweep predicted metrics over counts")
    simulate.add_argument("--device", required=True)
    _add_model_flags(simulate)
    simulate.add_argument("--max-containers", type=int)
    simulate.add_argument("--seed", type=int,
                          help="apply reproducible 0.5%% metric noise")
    simulate.add_argument("--out", help="sweep CSV to write (default: stdout)")
    simulate.set_defaults(func=_cmd_simulate)

    run = subs.add_parser("run", help="execute a split plan on a backend")
    run.add_argument("--plan", help="split plan file")
    run.add_argument("--device", help="profile for inline plans")
    run.add_argument("--containers", type=int,
                     help="container count for inline plans")
    run.add_argument("--work-units", type=int, default=DEFAULT_WORK_UNITS)
    run.add_argument("--backend", choices=("mock", "simulated", "local"),
                     default="simulated")
    run.add_argument("--durations",
                     help="mock backend: comma-separated worker seconds")
    run.add_argument("--time-model",
                     help="simulated backend: fitted time model file")
    run.add_argument("--time-scale", type=float, default=0.001,
                     help="simulated backend: sleep scale factor")
    run.add_argument("--iterations", type=int, default=50_000,
                     help="local backend: spin iterations per work unit")
    run.add_argument("--source", default="constant:5.0",
                     help="power source: constant:WATTS or replay:PATH")
    run.add_argument("--interval", type=float,
                     default=powermeter.DEFAULT_INTERVAL_S,
                     help="power sampling interval, seconds")
    run.add_argument("--out", help="power trace CSV to write")
    run.set_defaults(func=_cmd_run)

    report = subs.add_parser("report", help="savings table from points "
                                            "or a simulated sweep")
    report.add_argument("--input", required=True,
                        help="points CSV, bundled table name, or sweep CSV")
    report.add_argument("--energy-input",
                        help="points for the energy metric")
    report.add_argument("--power-input",
                        help="points for the power metric")
    report.add_argument("--out", help="report CSV to write (default: stdout)")
    report.set_defaults(func=_cmd_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            parser.print_help()
            return 1
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataFormatError, FileNotFoundError, KeyError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (executor.ExperimentError, executor.WorkerError) as exc:
        print(f"execution error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
