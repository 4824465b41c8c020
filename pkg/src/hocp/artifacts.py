"""Deterministic run artifacts: CSV tables, summary JSON and SVG figures.

Numbers are serialized with a 12-significant-digit cap (`%.12g`), which keeps
re-runs byte-identical.  Dimension changes across jumps are encoded as two
rows sharing a timestamp: the pre-jump row in the old phase, the post-jump
row in the new one, with absent compartments left as empty cells.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import model as m
from .config import RunConfig
from .solver import GridSearchResult, Solution, quad_nodes
from .svgplot import PlotStyle, Series, emit_svg

STATE_COLUMNS = ("H_v", "H_s", "V", "S", "E", "I", "J", "R")
CONTROL_COLUMNS = ("u_j", "u_sigma_v", "u_sigma_s", "u_v")
PHASE_NAMES = {1: "rto", 2: "wfh", 3: "protocol", 4: "rto"}

SOLVE_FILES = (
    "summary.json", "states.csv", "controls.csv", "adjoints.csv",
    "hamiltonian.csv", "cost.csv", "iterations.csv",
    "states.svg", "controls.svg", "hamiltonian.svg", "cost.svg",
)
SWEEP_FILES = ("sweep.csv", "sweep.svg", "hgap.svg")


def fmt_num(x) -> str:
    """Shortest decimal within 12 significant digits; empty for missing."""
    if x is None:
        return ""
    x = float(x)
    if np.isnan(x):
        return ""
    if x == 0.0:
        x = 0.0  # normalize -0.0
    return f"{x:.12g}"


def round12(obj):
    """Recursively cap floats at 12 significant digits for JSON emission."""
    if isinstance(obj, dict):
        return {k: round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round12(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if np.isnan(v):
            return None
        return float(f"{v:.12g}") if v != 0.0 else 0.0
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [round12(v) for v in obj.tolist()]
    return obj


def _write_csv(path: Path, header: tuple[str, ...], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def _state_cells(phase: int, x: np.ndarray) -> dict[str, float]:
    return dict(zip(m.PHASE_LABELS[phase], x))


def _control_cells(phase: int, u: np.ndarray) -> dict[str, float]:
    return dict(zip(m.CONTROL_NAMES[phase], u))


def write_states_csv(path: Path, sol: Solution) -> None:
    header = ("time", "phase", "mode") + STATE_COLUMNS + ("mass",)
    rows = []
    for phase, seg in zip((1, 2, 3, 4), sol.trajectory.segments):
        mode = PHASE_NAMES[phase]
        for t, x in zip(seg.times, seg.states):
            cells = _state_cells(phase, x)
            rows.append(
                (fmt_num(t), str(phase), mode)
                + tuple(fmt_num(cells.get(c)) for c in STATE_COLUMNS)
                + (fmt_num(float(x.sum())),)
            )
    _write_csv(path, header, rows)


def write_controls_csv(path: Path, sol: Solution) -> None:
    header = ("time", "phase", "mode") + CONTROL_COLUMNS
    rows = []
    for phase, seg in zip((1, 2, 3, 4), sol.trajectory.segments):
        mode = PHASE_NAMES[phase]
        for t, u in zip(seg.times, seg.controls):
            cells = _control_cells(phase, u)
            rows.append(
                (fmt_num(t), str(phase), mode)
                + tuple(fmt_num(cells.get(c)) for c in CONTROL_COLUMNS)
            )
    _write_csv(path, header, rows)


def write_adjoints_csv(path: Path, sol: Solution) -> None:
    header = ("time", "phase", "mode") + tuple(
        f"lambda_{c}" for c in STATE_COLUMNS
    )
    rows = []
    for phase, seg, lam in zip((1, 2, 3, 4), sol.trajectory.segments,
                               sol.adjoint.lam_segments):
        mode = PHASE_NAMES[phase]
        for t, lv in zip(seg.times, lam):
            cells = _state_cells(phase, lv)
            rows.append(
                (fmt_num(t), str(phase), mode)
                + tuple(fmt_num(cells.get(c)) for c in STATE_COLUMNS)
            )
    _write_csv(path, header, rows)


def write_hamiltonian_csv(path: Path, sol: Solution) -> None:
    header = ("time", "phase", "mode", "hamiltonian")
    rows = []
    for phase, seg, tr in zip((1, 2, 3, 4), sol.trajectory.segments,
                              sol.hamiltonian_trace):
        mode = PHASE_NAMES[phase]
        rows.extend(
            (fmt_num(t), str(phase), mode, fmt_num(v))
            for t, v in zip(seg.times, tr)
        )
    _write_csv(path, header, rows)


def _cumulative_cost(sol: Solution, cfg: RunConfig):
    """Trapezoid cumulative running cost per node, phase by phase."""
    model = cfg.model
    out = []
    acc = 0.0
    for phase, seg in zip((1, 2, 3, 4), sol.trajectory.segments):
        ell = np.asarray(m._running_cost_batch(
            phase, seg.states, seg.controls, model.phase_weights(phase)
        ), dtype=float)
        cum = np.concatenate(
            ([0.0], np.cumsum(0.5 * np.diff(seg.times) * (ell[1:] + ell[:-1])))
        ) + acc
        acc = float(cum[-1])
        out.append((seg.times, ell, cum))
    return out


def write_cost_csv(path: Path, sol: Solution, cfg: RunConfig) -> None:
    header = ("time", "phase", "mode", "running_cost", "cumulative_cost")
    rows = []
    for phase, (times, ell, cum) in zip((1, 2, 3, 4), _cumulative_cost(sol, cfg)):
        mode = PHASE_NAMES[phase]
        rows.extend(
            (fmt_num(t), str(phase), mode, fmt_num(e), fmt_num(c))
            for t, e, c in zip(times, ell, cum)
        )
    rows.append((
        fmt_num(sol.trajectory.tf), "total", "", "", fmt_num(sol.cost.total)
    ))
    _write_csv(path, header, rows)


def write_iterations_csv(path: Path, sol: Solution) -> None:
    header = ("iteration", "cost", "control_delta", "gap_ts1", "gap_ts2",
              "gap_ts3", "ts2", "p1", "p3", "alpha", "note")
    rows = [
        (str(r.iteration), fmt_num(r.cost), fmt_num(r.control_delta),
         fmt_num(r.gap_ts1), fmt_num(r.gap_ts2), fmt_num(r.gap_ts3),
         fmt_num(r.ts2), fmt_num(r.p1), fmt_num(r.p3), fmt_num(r.alpha),
         r.note)
        for r in sol.log
    ]
    _write_csv(path, header, rows)


def summary_dict(sol: Solution, cfg: RunConfig) -> dict:
    model = cfg.model
    ts1, ts2, ts3 = sol.switching.times
    pre = sol.switching.states_pre
    xf = sol.trajectory.segments[-1].states[-1]
    return {
        "status": "converged" if sol.converged else "non_converged",
        "boundary_optimum": sol.boundary_optimum,
        "iterations": sol.iterations,
        "final_control_delta": sol.final_control_delta,
        "switching_times": {"ts1": ts1, "ts2": ts2, "ts3": ts3},
        "switching_states_pre": {
            "rto_to_wfh": dict(zip(m.PHASE_LABELS[1], pre[0])),
            "wfh_to_protocol": dict(zip(m.PHASE_LABELS[2], pre[1])),
            "protocol_to_rto": dict(zip(m.PHASE_LABELS[3], pre[2])),
        },
        "multipliers": {"p1": sol.adjoint.p1, "p2": 0.0, "p3": sol.adjoint.p3},
        "hamiltonian_gaps": {
            "ts1": sol.switching.gaps[0],
            "ts2": sol.switching.gaps[1],
            "ts3": sol.switching.gaps[2],
        },
        "terminal_state": dict(zip(m.PHASE_LABELS[4], xf)),
        "cost": {
            "phase1": sol.cost.phase_integrals[0],
            "phase2": sol.cost.phase_integrals[1],
            "phase3": sol.cost.phase_integrals[2],
            "phase4": sol.cost.phase_integrals[3],
            "terminal": sol.cost.terminal,
            "total": sol.cost.total,
        },
        "mass_defect": sol.trajectory.max_mass_defect(),
        "horizon": {"t0": model.t0, "tf": model.tf},
        "solver": {f.name: getattr(cfg.solver, f.name)
                   for f in fields(type(cfg.solver))},
    }


def write_summary_json(path: Path, sol: Solution, cfg: RunConfig) -> None:
    payload = round12(summary_dict(sol, cfg))
    path.write_text(json.dumps(payload, indent=2) + "\n")


# --- figures ----------------------------------------------------------------


def _phase_annotations(sol: Solution):
    ts1, ts2, ts3 = sol.switching.times
    t0 = sol.trajectory.t0
    tf = sol.trajectory.tf
    spans = ((t0, ts1, "rto"), (ts1, ts2, "wfh"), (ts2, ts3, "protocol"),
             (ts3, tf, "rto"))
    vlines = ((ts1, "ts1"), (ts2, "ts2"), (ts3, "ts3"))
    return spans, vlines


def _union_series(sol: Solution, labels_by_phase, data_by_phase,
                  names) -> list[Series]:
    """Stitch per-phase columns into horizon-long series, NaN where absent."""
    times = np.concatenate([seg.times for seg in sol.trajectory.segments])
    series = []
    for name in names:
        chunks = []
        present = False
        for phase in (1, 2, 3, 4):
            labels = labels_by_phase[phase]
            data = data_by_phase[phase - 1]
            if name in labels:
                present = True
                chunks.append(data[:, labels.index(name)])
            else:
                chunks.append(np.full(len(sol.trajectory.segments[phase - 1].times),
                                      np.nan))
        if present:
            series.append(Series(name, times, np.concatenate(chunks)))
    return series


_STATE_LABELS = {ph: list(m.PHASE_LABELS[ph]) for ph in (1, 2, 3, 4)}
_CONTROL_LABELS = {ph: list(m.CONTROL_NAMES[ph]) for ph in (1, 2, 3, 4)}


def states_figure(sol: Solution) -> str:
    spans, vlines = _phase_annotations(sol)
    series = _union_series(
        sol, _STATE_LABELS, [seg.states for seg in sol.trajectory.segments],
        STATE_COLUMNS,
    )
    return emit_svg(series, PlotStyle(
        title="Compartment trajectories", xlabel="time (days)",
        ylabel="population fraction", phase_spans=spans, vlines=vlines,
    ))


def controls_figure(sol: Solution) -> str:
    spans, vlines = _phase_annotations(sol)
    series = _union_series(
        sol, _CONTROL_LABELS, [seg.controls for seg in sol.trajectory.segments],
        CONTROL_COLUMNS,
    )
    return emit_svg(series, PlotStyle(
        title="Applied controls", xlabel="time (days)", ylabel="intensity",
        phase_spans=spans, vlines=vlines,
    ))


def adjoints_figure(sol: Solution) -> str:
    spans, vlines = _phase_annotations(sol)
    series = [
        Series(f"lambda_{s.name}", s.x, s.y)
        for s in _union_series(sol, _STATE_LABELS,
                               list(sol.adjoint.lam_segments), STATE_COLUMNS)
    ]
    return emit_svg(series, PlotStyle(
        title="Adjoint variables", xlabel="time (days)", ylabel="costate",
        phase_spans=spans, vlines=vlines,
    ))


def hamiltonian_figure(sol: Solution) -> str:
    times = np.concatenate([seg.times for seg in sol.trajectory.segments])
    values = np.concatenate(sol.hamiltonian_trace)
    spans, vlines = _phase_annotations(sol)
    return emit_svg([Series("H", times, values)], PlotStyle(
        title="Hamiltonian", xlabel="time (days)", ylabel="H",
        phase_spans=spans, vlines=vlines,
    ))


def cost_figure(sol: Solution, cfg: RunConfig) -> str:
    parts = _cumulative_cost(sol, cfg)
    times = np.concatenate([t for t, _, _ in parts])
    cum = np.concatenate([c for _, _, c in parts])
    spans, vlines = _phase_annotations(sol)
    style = PlotStyle(
        title="Incurred running cost", xlabel="time (days)",
        ylabel="cumulative cost", phase_spans=spans, vlines=vlines,
        markers=((float(times[-1]), float(sol.cost.total), "star"),),
    )
    return emit_svg([Series("cumulative cost", times, cum)], style)


def write_solution_artifacts(out_dir: str | Path, sol: Solution,
                             cfg: RunConfig) -> list[Path]:
    """Write the full artifact set for a solve/simulate run."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_summary_json(out / "summary.json", sol, cfg)
    write_states_csv(out / "states.csv", sol)
    write_controls_csv(out / "controls.csv", sol)
    write_adjoints_csv(out / "adjoints.csv", sol)
    write_hamiltonian_csv(out / "hamiltonian.csv", sol)
    write_cost_csv(out / "cost.csv", sol, cfg)
    write_iterations_csv(out / "iterations.csv", sol)
    (out / "states.svg").write_text(states_figure(sol))
    (out / "controls.svg").write_text(controls_figure(sol))
    (out / "adjoints.svg").write_text(adjoints_figure(sol))
    (out / "hamiltonian.svg").write_text(hamiltonian_figure(sol))
    (out / "cost.svg").write_text(cost_figure(sol, cfg))
    return [out / name for name in SOLVE_FILES + ("adjoints.svg",)]


def write_sweep_artifacts(out_dir: str | Path, result: GridSearchResult,
                          tol_hgap: float) -> list[Path]:
    """sweep.csv plus the cost and Hamiltonian-gap figures over t_s2."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = ("ts2", "cost", "hamiltonian_gap", "status")
    rows = []
    for ts2, cost, gap, reason in zip(result.ts2_values, result.costs,
                                      result.gaps, result.reasons):
        status = reason if reason else "ok"
        rows.append((fmt_num(ts2), fmt_num(cost), fmt_num(gap), status))
    _write_csv(out / "sweep.csv", header, rows)

    written = [out / "sweep.csv"]
    # single-candidate sweeps make no argmin claim and get no figures
    ok = np.isfinite(result.costs)
    xs = result.ts2_values[ok]
    if len(xs) > 1:
        marker = ((result.best_ts2, float(result.costs[result.best_index]),
                   "star"),)
        (out / "sweep.svg").write_text(emit_svg(
            [Series("J", xs, result.costs[ok])],
            PlotStyle(title="Total cost vs switching time",
                      xlabel="ts2 (days)", ylabel="J", markers=marker),
        ))
        (out / "hgap.svg").write_text(emit_svg(
            [Series("H gap at ts2", xs, result.gaps[ok])],
            PlotStyle(title="Hamiltonian gap vs switching time",
                      xlabel="ts2 (days)", ylabel="H(ts2-) - H(ts2+)",
                      vlines=((result.best_ts2, "argmin J"),)),
        ))
        written += [out / "sweep.svg", out / "hgap.svg"]
    return written
