"""Scenario runner: executes coverage or cabin runs and writes their reports"""

import logging
import os
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from src import __version__
from src.cabin.placement import optimize_transmitter_placement
from src.cabin.raytracer import CabinRayTracer, score_paths
from src.cabin.stats import aggregate_stats
from src.constellation.manager import ConstellationManager, CoverageRun
from src.constellation.timeline import cumulative_coverage
from src.errors import ManifestError, ValidationError
from src.scenario.config import LoadedScenario, load_config
from src.scenario.outputs import RunStore

logger = logging.getLogger(__name__)

ARTIFACT = "skybridge"
OUTPUT_ENV = "SKYBRIDGE_OUT"

TIMELINE_HEADER = ["t_s", "serving_sat", "elevation_deg", "slant_range_m"]
HANDOVER_HEADER = ["t_s", "from_sat", "to_sat", "gap_s"]
SATELLITE_HEADER = [
    "sat_id", "status", "inserted_t_s", "first_contact_t_s", "raan_deg", "true_anomaly_deg",
    "sma_m", "eccentricity", "inclination_deg", "arg_periapsis_deg",
]
PROGRESS_HEADER = ["t_s", "cumulative_coverage_pct"]
MATRIX_HEADER = ["tx_id", "rx_id", "best_loss_db", "combined_loss_db", "n_paths"]
PATHS_HEADER = ["tx_id", "rx_id", "n_reflections", "length_m", "loss_db"]
BOXPLOT_HEADER = ["tx_id", "min", "q1", "median", "q3", "max", "mean"]
SWEEP_HEADER = ["value", "coverage_pct", "n_satellites_active", "n_handovers", "max_gap_s"]


def resolve_run_dir(loaded: LoadedScenario, out: Optional[str] = None) -> Path:
    """Run directory: --out, then scenario.output_dir, then $SKYBRIDGE_OUT/<name>, then runs/<name>"""
    if out:
        return Path(out)
    if loaded.config.scenario.output_dir:
        return Path(loaded.config.scenario.output_dir)
    root = os.environ.get(OUTPUT_ENV)
    return Path(root or "runs") / loaded.name


@contextmanager
def _discard_log(run_dir: Path):
    # Route the timeout filter's discards into the run directory for the run's duration
    discarded_logger = logging.getLogger("skybridge.discarded")
    discarded_logger.setLevel(logging.INFO)
    handler = logging.FileHandler(run_dir / "discarded.log", mode="w")
    handler.setFormatter(logging.Formatter("%(message)s"))
    discarded_logger.addHandler(handler)
    try:
        yield
    finally:
        discarded_logger.removeHandler(handler)
        handler.close()


def _progress_rows(run: CoverageRun) -> list[dict]:
    series = cumulative_coverage(run.timeline)
    return [{"t_s": repr(float(t)), "cumulative_coverage_pct": repr(float(p))}
            for t, p in zip(run.timeline.grid, series)]


def simulate_coverage(loaded: LoadedScenario, threads: int = 1, progress: bool = True) -> CoverageRun:
    """Build the flight and constellation from a scenario and run it"""
    flight = loaded.flight()
    manager = ConstellationManager(flight, loaded.policy(), loaded.mask(), threads=threads, progress=progress)
    if loaded.config.constellation.insertion == "parallel":
        return manager.run_parallel(loaded.fixed_satellites(flight.departure_t_s))
    return manager.run_sequential_insertion()


class ScenarioRunner:
    """Runs one scenario and writes every report into its run directory"""

    def __init__(
        self,
        loaded: LoadedScenario,
        run_dir=None,
        threads: int = 1,
        progress: bool = True,
        store: Optional[RunStore] = None,
    ):
        """
        Args:
            loaded: Validated scenario
            run_dir: Output directory (resolved from the scenario when omitted)
            threads: Worker threads; outputs never depend on it
            progress: Show tqdm progress bars
            store: RunStore to write through (built from run_dir by default)
        """
        self.loaded = loaded
        self.store = store or RunStore(run_dir or resolve_run_dir(loaded))
        self.threads = max(1, threads)
        self.progress = progress

    def run(self) -> dict:
        """Execute the scenario

        Workflow:
        1. Create the run directory
        2. Run the coverage simulation or the cabin ray tracing
        3. Write the mode's CSV/JSON reports
        4. Write run_manifest.json with the resolved configuration

        Returns:
            Dict with the headline figures and elapsed seconds
        """
        logger.info(f"Starting {self.loaded.mode} run '{self.loaded.name}' into {self.store.run_dir}")
        start_time = datetime.now()
        self.store.ensure_dir()

        if self.loaded.mode == "coverage":
            with _discard_log(self.store.run_dir):
                stats = self._run_coverage()
            self.store.written.append("discarded.log")
        else:
            stats = self._run_cabin()

        self._write_manifest()
        elapsed = (datetime.now() - start_time).total_seconds()
        stats["elapsed_seconds"] = elapsed
        logger.info(f"Run complete: {len(self.store.outputs())} outputs in {self.store.run_dir} ({elapsed:.1f}s)")
        return stats

    def _run_coverage(self) -> dict:
        run = simulate_coverage(self.loaded, threads=self.threads, progress=self.progress)
        summary = run.summary
        self.store.write_csv("timeline.csv", TIMELINE_HEADER, run.timeline.rows())
        self.store.write_csv("handovers.csv", HANDOVER_HEADER, (e.to_dict() for e in run.events))
        self.store.write_csv("satellites.csv", SATELLITE_HEADER, (s.to_dict() for s in run.satellites))
        self.store.write_csv("coverage_progress.csv", PROGRESS_HEADER, _progress_rows(run))
        self.store.write_json("summary.json", summary)
        if run.budget_exhausted:
            logger.warning(f"Satellite budget exhausted at {summary['coverage_pct']:.2f}% coverage")
        return dict(summary)

    def _run_cabin(self) -> dict:
        scenario, layout = self.loaded.cabin()
        if layout.optimize_placement:
            scenario = optimize_transmitter_placement(scenario, layout.placement_candidates)
        links = CabinRayTracer(scenario, threads=self.threads, progress=self.progress).trace()
        matrix, scored = score_paths(scenario, links)
        best = aggregate_stats(matrix, "best")
        combined = aggregate_stats(matrix, "combined")

        self.store.write_csv("path_loss_matrix.csv", MATRIX_HEADER, matrix.rows())
        self.store.write_json("tx_stats.json", {
            "frequency_hz": scenario.frequency_hz,
            "tx_array": scenario.transmitters[0].array.describe(),
            "ue_array": scenario.receivers[0].array.describe(),
            "ue_boresight": self.loaded.config.cabin.layout.ue_boresight,
            "transmitter_positions_m": {str(tx.id): list(tx.position_m) for tx in scenario.transmitters},
            "best": best.to_dict(),
            "combined": combined.to_dict(),
        })
        if self.loaded.config.cabin.sbr.dump_paths:
            rows = (
                {"tx_id": p.tx_id, "rx_id": p.rx_id, "n_reflections": p.n_reflections,
                 "length_m": repr(p.total_length_m), "loss_db": repr(p.path_loss_db)}
                for key in sorted(scored) for p in scored[key]
            )
            self.store.write_csv("paths.csv", PATHS_HEADER, rows)
        logger.info(
            f"Cabin statistics: global mean {best.global_mean:.2f} dB, "
            f"per-Tx spread {best.balance_db:.2f} dB"
        )
        return {"global_mean_db": best.global_mean, "balance_db": best.balance_db}

    def _write_manifest(self):
        self.store.write_manifest(build_manifest(self.loaded.mode, self.loaded, self.store.outputs()))


def build_manifest(mode: str, loaded: LoadedScenario, outputs: list[str], extra: Optional[dict] = None) -> dict:
    """Run manifest; the wall-clock timestamp lives only under created_at"""
    manifest = {
        "artifact": ARTIFACT,
        "version": __version__,
        "mode": mode,
        "scenario": loaded.name,
        "config": loaded.resolved(),
        "overrides": list(loaded.overrides),
        "outputs": outputs,
    }
    manifest.update(extra or {})
    manifest["created_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return manifest


def sweep(
    config_path,
    key: str,
    values: Sequence[str],
    overrides: Sequence[str] = (),
    run_dir=None,
    threads: int = 1,
    progress: bool = True,
) -> list[dict]:
    """Rerun a coverage scenario once per value of one configuration key

    Returns:
        One row per value: value, coverage_pct, n_satellites_active, n_handovers, max_gap_s
    """
    if not values:
        raise ValidationError("sweep needs at least one value", key=key)
    base = load_config(config_path, overrides)
    if base.mode != "coverage":
        raise ValidationError("sweeps apply to coverage scenarios", file=str(base.source), section="scenario",
                              key="mode")
    store = RunStore(run_dir or resolve_run_dir(base).with_name(f"{base.name}-sweep"))
    logger.info(f"Sweeping {key} over {len(values)} values")
    rows = []
    for value in values:
        loaded = load_config(config_path, [*overrides, f"{key}={value}"])
        summary = simulate_coverage(loaded, threads=threads, progress=progress).summary
        rows.append({
            "value": value,
            "coverage_pct": summary["coverage_pct"],
            "n_satellites_active": summary["n_satellites_active"],
            "n_handovers": summary["n_handovers"],
            "max_gap_s": summary["max_gap_s"],
        })
        logger.info(f"{key}={value}: {summary['coverage_pct']:.2f}% coverage")
    store.write_csv("sweep.csv", SWEEP_HEADER, rows)
    store.write_manifest(build_manifest("sweep", base, store.outputs(), {"sweep_key": key,
                                                                         "sweep_values": list(values)}))
    return rows


def report(run_dir) -> list[str]:
    """Regenerate plot-ready tables from a finished run and summarize it

    Coverage runs get coverage_progress.csv; cabin runs get boxplot.csv.

    Raises:
        ManifestError: run directory or manifest missing or corrupt
    """
    store = RunStore(run_dir)
    manifest = store.read_manifest()
    mode = manifest["mode"]
    lines = [f"{manifest['artifact']} {manifest['version']} {mode} run '{manifest.get('scenario', '')}'"]
    try:
        if mode == "coverage":
            timeline = store.read_csv("timeline.csv")
            served = np.array([row["serving_sat"] != "" for row in timeline], dtype=np.int64)
            series = np.round(100.0 * np.cumsum(served) / max(len(timeline), 1), 2)
            progress = [{"t_s": row["t_s"], "cumulative_coverage_pct": repr(float(p))}
                        for row, p in zip(timeline, series)]
            store.write_csv("coverage_progress.csv", PROGRESS_HEADER, progress)
            summary = store.read_json("summary.json")
            lines += [f"  {k}: {v}" for k, v in summary.items()]
        elif mode == "cabin":
            stats = store.read_json("tx_stats.json")["best"]
            rows = [{name: s[name] for name in BOXPLOT_HEADER}
                    for s in stats["transmitters"]]
            store.write_csv("boxplot.csv", BOXPLOT_HEADER, rows)
            lines.append(f"  global_mean_db: {stats['global_mean_db']:.2f}")
            lines += [f"  tx {r['tx_id']}: mean {r['mean']:.2f} dB, median {r['median']:.2f} dB" for r in rows]
        elif mode == "sweep":
            lines += [f"  {manifest.get('sweep_key')}={r['value']}: {r['coverage_pct']}%"
                      for r in store.read_csv("sweep.csv")]
        else:
            raise ManifestError(f"unknown run mode '{mode}'", file=str(store.run_dir), key="mode")
    except (FileNotFoundError, KeyError) as e:
        raise ManifestError(f"run outputs incomplete: {e}", file=str(store.run_dir)) from e
    return lines
