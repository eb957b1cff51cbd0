"""Bundled measurement tables and reference models.

Two device generations are covered: "tx2" (4 CPU cores, up to 6 containers)
and "orin" (12 cores, up to 12 containers). The fig3 tables hold normalized
time/energy/power versus container count with the work split evenly; the
fig1 tables hold absolute time and energy versus the core count given to a
single container. Keys are stable identifiers used by the CLI's --input.
"""

from __future__ import annotations

from edgesplit.modelfit import (
    DataPoint,
    Model,
    QuadraticModel,
    SaturatingExpModel,
    compute_rmse,
)


def _points(pairs) -> tuple[DataPoint, ...]:
    return tuple(DataPoint(x=float(x), y=float(y)) for x, y in pairs)


POINT_TABLES: dict[str, tuple[DataPoint, ...]] = {
    "tx2_fig3_time": _points([
        (1, 1.0), (2, 0.81), (3, 0.77), (4, 0.745), (5, 0.76), (6, 0.82),
    ]),
    "tx2_fig3_energy": _points([
        (1, 1.0), (2, 0.8883), (3, 0.8609), (4, 0.8477), (5, 0.8615),
        (6, 0.8832),
    ]),
    "tx2_fig3_power": _points([
        (1, 1.0), (2, 1.094), (3, 1.118), (4, 1.139), (5, 1.135), (6, 1.078),
    ]),
    "orin_fig3_time": _points([
        (1, 1.0), (2, 0.57), (4, 0.39), (6, 0.35), (8, 0.335), (10, 0.32),
        (12, 0.31),
    ]),
    "orin_fig3_energy": _points([
        (1, 1.0), (2, 0.737), (4, 0.612), (6, 0.609), (8, 0.602), (10, 0.586),
        (12, 0.58),
    ]),
    "orin_fig3_power": _points([
        (1, 1.0), (2, 1.294), (4, 1.554), (6, 1.75), (8, 1.8), (10, 1.824),
        (12, 1.84),
    ]),
    "tx2_fig1_time": _points([
        (0.8, 1923.818377), (1, 1428.508946), (2, 537.845278),
        (3, 340.478856), (4, 335.602946),
    ]),
    "tx2_fig1_energy": _points([
        (0.8, 3268.84162865821), (1, 2539.47271842151), (2, 1233.05013960583),
        (3, 949.307547479176), (4, 943.936265208808),
    ]),
    "orin_fig1_time": _points([
        (0.4, 624.392021), (1, 186.254587), (2, 63.098788), (3, 62.881196),
        (4, 50.273535), (5, 49.766862), (6, 49.88659), (8, 51.143005),
        (10, 51.438918), (12, 51.665154),
    ]),
    "orin_fig1_energy": _points([
        (0.4, 5488.99696061117), (1, 1665.88044546993), (2, 664.527237501471),
        (3, 768.040256780007), (4, 665.475100540928), (5, 659.437109104965),
        (6, 658.498957712066), (8, 673.714665199206), (10, 676.928369695454),
        (12, 679.441260977017),
    ]),
}


def fixture_names() -> list[str]:
    return sorted(POINT_TABLES)


def get_points(name: str) -> tuple[DataPoint, ...]:
    try:
        return POINT_TABLES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; "
                       f"known: {', '.join(fixture_names())}") from None


def _with_rmse(model: Model, table: str) -> Model:
    points = POINT_TABLES[table]
    if isinstance(model, QuadraticModel):
        return QuadraticModel(a=model.a, b=model.b, c=model.c,
                              rmse=compute_rmse(model, points))
    return SaturatingExpModel(amp=model.amp, rate=model.rate,
                              floor=model.floor,
                              rmse=compute_rmse(model, points))


# Published curve coefficients for the fig3 tables, at the precision the
# curves were drawn with (the headline forms round these).
REFERENCE_MODELS: dict[str, dict[str, Model]] = {
    "tx2": {
        "time": _with_rmse(
            QuadraticModel(a=0.026, b=-0.21, c=1.17), "tx2_fig3_time"),
        "energy": _with_rmse(
            QuadraticModel(a=0.0149, b=-0.123, c=1.0967), "tx2_fig3_energy"),
        "power": _with_rmse(
            QuadraticModel(a=-0.0155, b=0.124, c=0.896), "tx2_fig3_power"),
    },
    "orin": {
        "time": _with_rmse(
            SaturatingExpModel(amp=1.772, rate=0.9786, floor=0.331),
            "orin_fig3_time"),
        "energy": _with_rmse(
            SaturatingExpModel(amp=1.141, rate=1.03, floor=0.593),
            "orin_fig3_energy"),
        "power": _with_rmse(
            SaturatingExpModel(amp=-1.24, rate=0.38, floor=1.85),
            "orin_fig3_power"),
    },
}


def reference_models(device_name: str) -> dict[str, Model]:
    try:
        return dict(REFERENCE_MODELS[device_name])
    except KeyError:
        raise KeyError(f"no bundled models for device {device_name!r}") \
            from None
