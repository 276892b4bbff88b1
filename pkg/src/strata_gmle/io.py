"""File formats: observation CSV, long-format value CSV, TSV emission."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .em import EmResult
from .errors import InputError
from .estimators import EstimateReport
from .simulate import DesignGroup, PointMass, StrataDesign, Uniform
from .thresholds import GeneralStratum, ThresholdCurve
from .types import (
    BinomialSampleSize,
    Observation,
    PoissonSampleSize,
    SupportGrid,
)

# all numeric output is printed with 12 significant digits
def fmt(v: float) -> str:
    return format(float(v), ".12g")


ABSENT = "—"  # printed for estimates that are undefined on the data


def read_observations_csv(path: str | Path) -> list[Observation]:
    """Read `x,k` rows; errors cite the 1-based line number."""
    path = Path(path)
    obs = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != ["x", "k"]:
            raise InputError(f"{path}: line 1: expected header 'x,k', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise InputError(f"{path}: line {lineno}: expected 2 fields, got {len(row)}")
            try:
                x, k = int(row[0]), int(row[1])
            except ValueError:
                raise InputError(
                    f"{path}: line {lineno}: counts must be integers, got {row}"
                ) from None
            try:
                obs.append(Observation(x, k))
            except ValueError as e:
                raise InputError(f"{path}: line {lineno}: {e}") from None
    if not obs:
        raise InputError(f"{path}: no data rows")
    return obs


def write_observations_csv(path: str | Path, obs: Sequence[Observation]) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("x,k\n")
        for o in obs:
            fh.write(f"{o.x},{o.k}\n")


def read_general_csv(
    path: str | Path, strata_path: str | Path | None = None
) -> list[GeneralStratum]:
    """Read long-format `stratum,a,value` rows, plus an optional side file
    `stratum,a` declaring strata (so empty ones exist in the index)."""
    path = Path(path)
    weights: dict[str, float] = {}
    values: dict[str, list[float]] = {}

    def register(stratum: str, a: float, where: str) -> None:
        if stratum in weights and weights[stratum] != a:
            raise InputError(
                f"{where}: stratum {stratum!r} redeclared with weight {a}, "
                f"previously {weights[stratum]}"
            )
        weights[stratum] = a
        values.setdefault(stratum, [])

    if strata_path is not None:
        strata_path = Path(strata_path)
        with open(strata_path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [c.strip() for c in header] != ["stratum", "a"]:
                raise InputError(
                    f"{strata_path}: line 1: expected header 'stratum,a', got {header}"
                )
            for lineno, row in enumerate(reader, start=2):
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if len(row) != 2:
                    raise InputError(
                        f"{strata_path}: line {lineno}: expected 2 fields, got {len(row)}"
                    )
                try:
                    register(row[0].strip(), float(row[1]), f"{strata_path}: line {lineno}")
                except ValueError:
                    raise InputError(
                        f"{strata_path}: line {lineno}: weight must be a number, got {row[1]!r}"
                    ) from None

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != ["stratum", "a", "value"]:
            raise InputError(
                f"{path}: line 1: expected header 'stratum,a,value', got {header}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise InputError(f"{path}: line {lineno}: expected 3 fields, got {len(row)}")
            try:
                a, v = float(row[1]), float(row[2])
            except ValueError:
                raise InputError(
                    f"{path}: line {lineno}: weight and value must be numbers, got {row}"
                ) from None
            register(row[0].strip(), a, f"{path}: line {lineno}")
            values[row[0].strip()].append(v)

    if not weights:
        raise InputError(f"{path}: no data rows")
    try:
        return [
            GeneralStratum(weights[s], tuple(values[s])) for s in sorted(weights)
        ]
    except ValueError as e:
        raise InputError(f"{path}: {e}") from None


def read_design_json(path: str | Path) -> StrataDesign:
    """Parse a design file: scenario, optional kappa, and per-group laws.

    A law is either a number (a point mass) or a string "lo..hi" (uniform).
    """
    path = Path(path)
    try:
        spec = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON: {e}") from None

    def law(raw, where: str):
        if isinstance(raw, (int, float)):
            return PointMass(float(raw))
        if isinstance(raw, str) and ".." in raw:
            lo, _, hi = raw.partition("..")
            try:
                return Uniform(float(lo), float(hi))
            except ValueError as e:
                raise InputError(f"{path}: {where}: {e}") from None
        raise InputError(f"{path}: {where}: expected a number or 'lo..hi', got {raw!r}")

    scenario_name = spec.get("scenario")
    if scenario_name == "binomial":
        if "kappa" not in spec:
            raise InputError(f"{path}: binomial designs need a 'kappa' key")
        scenario = BinomialSampleSize(int(spec["kappa"]))
    elif scenario_name == "poisson":
        scenario = PoissonSampleSize()
    else:
        raise InputError(f"{path}: scenario must be 'binomial' or 'poisson'")
    groups_raw = spec.get("groups")
    if not isinstance(groups_raw, list) or not groups_raw:
        raise InputError(f"{path}: 'groups' must be a nonempty list")
    groups = []
    for i, g in enumerate(groups_raw):
        where = f"groups[{i}]"
        try:
            groups.append(
                DesignGroup(
                    int(g["count"]),
                    law(g["theta1"], where + ".theta1"),
                    law(g["theta2"], where + ".theta2"),
                )
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"{path}: {where}: {e}") from None
    return StrataDesign(tuple(groups), scenario)


def _write_tsv(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(row) + "\n")


def write_weights_tsv(
    path: str | Path, grid: SupportGrid, w: np.ndarray, floor: float = 1e-12
) -> None:
    """Grid coordinates plus fitted weight, omitting numerically dead points."""
    poisson = grid.xi1s is not None
    header = (["xi1", "xi2"] if poisson else []) + ["theta1", "theta2", "weight"]
    rows = []
    for j, point in enumerate(grid.points):
        if w[j] < floor:
            continue
        row = [fmt(point.xi[0]), fmt(point.xi[1])] if poisson else []
        rows.append(row + [fmt(point.theta1), fmt(point.theta2), fmt(w[j])])
    _write_tsv(Path(path), header, rows)


def write_trace_tsv(path: str | Path, em: EmResult) -> None:
    rows = ([str(i), fmt(v)] for i, v in enumerate(em.loglik_trace))
    _write_tsv(Path(path), ["iteration", "loglik"], rows)


def write_estimates_tsv(path: str | Path, report: EstimateReport) -> None:
    rows = [
        ["naive", ABSENT if report.naive is None else fmt(report.naive)],
        ["extreme_collapse", fmt(report.extreme_collapse)],
        ["gmle", fmt(report.gmle_plugin)],
        ["psi_star", fmt(report.psi_star)],
    ]
    _write_tsv(Path(path), ["estimator", "value"], rows)


def write_posteriors_tsv(
    path: str | Path, obs: Sequence[Observation], posterior_means: np.ndarray
) -> None:
    rows = (
        [str(i), str(o.x), str(o.k), fmt(pm)]
        for i, (o, pm) in enumerate(zip(obs, posterior_means))
    )
    _write_tsv(Path(path), ["stratum", "x", "k", "posterior_mean"], rows)


def write_summary_tsv(path: str | Path, summary) -> None:
    rows = []
    for name, stats in summary.per_estimator.items():
        sd = "" if stats.sd is None else fmt(stats.sd)
        rows.append([name, fmt(stats.mean), sd, str(summary.reps), fmt(summary.true_p)])
    _write_tsv(Path(path), ["estimator", "mean", "sd", "reps", "true_p"], rows)


def write_ci_tsv(
    path: str | Path, lower: float, upper: float, alpha: float, mode: str, dev: float
) -> None:
    _write_tsv(
        Path(path),
        ["lower", "upper", "alpha", "mode", "deviance_at_gmle"],
        [[fmt(lower), fmt(upper), fmt(alpha), mode, fmt(dev)]],
    )


def write_general_tsv(path: str | Path, curve: ThresholdCurve) -> None:
    gaps = np.diff(np.append(curve.thresholds, curve.z_max))
    rows = (
        [fmt(c), fmt(g), fmt(r), fmt(m)]
        for c, g, r, m in zip(curve.thresholds, gaps, curve.raw, curve.monotone)
    )
    _write_tsv(
        Path(path), ["threshold", "gap", "survival_raw", "survival_monotone"], rows
    )


def write_general_estimate_tsv(path: str | Path, value: float) -> None:
    _write_tsv(Path(path), ["estimator", "value"], [["general", fmt(value)]])


def write_run_json(path: str | Path, config: dict) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")
