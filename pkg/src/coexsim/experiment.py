"""Sweep grid over topology x mobility x WPAN interval x seed, and its outputs."""

import argparse
import csv
import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import List, Optional, Sequence

from .scenario import (SCENARIO_FIELDS, TOPOLOGIES, ScenarioConfig, convert_value,
                       read_key_values)
from .simulation import run_scenario

MOBILITY_MODES = ("static", "rwp")
CSV_HEADER = ("topology", "mobility", "interval_s", "seed", "sent", "delivered",
              "frames_with_errors", "bytes_with_errors", "throughput_bps",
              "avg_e2e_delay_s", "avg_jitter_s")
FLOAT_COLUMNS = {"interval_s", "throughput_bps", "avg_e2e_delay_s", "avg_jitter_s"}
# file stem -> CSV column, one plot per metric
PLOT_METRICS = {
    "errors": "bytes_with_errors",
    "throughput": "throughput_bps",
    "delay": "avg_e2e_delay_s",
    "jitter": "avg_jitter_s",
}


class ConfigError(ValueError):
    pass


class SweepError(RuntimeError):
    def __init__(self, cell, cause):
        super().__init__(f"run failed for {format_cell(cell)}: {cause}")
        self.cell = cell


@dataclass
class ExperimentConfig:
    topologies: List[str] = field(default_factory=lambda: list(TOPOLOGIES))
    mobility_modes: List[str] = field(default_factory=lambda: list(MOBILITY_MODES))
    interval_start_s: float = 0.1
    interval_end_s: float = 1.0
    interval_step_s: float = 0.1
    seeds: List[int] = field(default_factory=lambda: [5])
    base: ScenarioConfig = field(default_factory=ScenarioConfig)
    out: Path = Path("results")
    jobs: int = 1

    def __post_init__(self):
        if self.interval_step_s <= 0:
            raise ConfigError("interval step must be positive")
        if self.interval_start_s <= 0 or self.interval_start_s > self.interval_end_s:
            raise ConfigError("need 0 < interval start <= interval end")
        if self.base.duration_s <= 0:
            raise ConfigError("duration must be positive")
        for topo in self.topologies:
            if topo not in TOPOLOGIES:
                raise ConfigError(f"unknown topology {topo!r}")
        for mode in self.mobility_modes:
            if mode not in MOBILITY_MODES:
                raise ConfigError(f"unknown mobility mode {mode!r}")
        if not self.topologies or not self.mobility_modes or not self.seeds:
            raise ConfigError("topologies, mobility modes and seeds must be non-empty")

    def intervals(self) -> List[float]:
        span = self.interval_end_s - self.interval_start_s
        count = int(round(span / self.interval_step_s)) + 1
        values = [round(self.interval_start_s + i * self.interval_step_s, 6) for i in range(count)]
        return [v for v in values if v <= self.interval_end_s + 1e-9]

    def cells(self) -> List[tuple]:
        cells = [(t, m, i, s) for t in self.topologies for m in self.mobility_modes
                 for i in self.intervals() for s in self.seeds]
        return sorted(set(cells), key=cell_key)


def cell_key(cell) -> tuple:
    topology, mobility, interval, seed = cell
    return (TOPOLOGIES.index(topology), MOBILITY_MODES.index(mobility), interval, seed)


def format_cell(cell) -> str:
    topology, mobility, interval, seed = cell
    return f"topology={topology} mobility={mobility} interval={interval:g}s seed={seed}"


@dataclass(frozen=True)
class SweepRow:
    topology: str
    mobility: str
    interval_s: float
    seed: int
    sent: int
    delivered: int
    frames_with_errors: int
    bytes_with_errors: int
    throughput_bps: object
    avg_e2e_delay_s: object
    avg_jitter_s: object

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def cell_config(base: ScenarioConfig, cell) -> ScenarioConfig:
    topology, mobility, interval, seed = cell
    return base.replace(topology=topology, mobility=(mobility == "rwp"),
                        wpan_interval_s=interval, seed=seed)


def run_cell(base: ScenarioConfig, cell) -> SweepRow:
    try:
        result = run_scenario(cell_config(base, cell))
    except Exception as exc:
        raise SweepError(cell, exc) from exc
    topology, mobility, interval, seed = cell
    return SweepRow(topology, mobility, interval, seed, **result.summary.as_row())


def run_sweep(cfg: ExperimentConfig, jobs: Optional[int] = None) -> List[SweepRow]:
    """One simulation per cell; rows come back in cell order whatever ``jobs`` is."""
    cells = cfg.cells()
    jobs = cfg.jobs if jobs is None else jobs
    if jobs <= 1:
        return [run_cell(cfg.base, cell) for cell in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_cell, [cfg.base] * len(cells), cells))


# --- output -----------------------------------------------------------------

def _format(column: str, value) -> str:
    if column in FLOAT_COLUMNS:
        return f"{float(value):.6f}"
    return str(value)


def csv_lines(rows: Sequence[SweepRow]) -> List[List[str]]:
    lines = []
    for row in rows:
        data = row.as_dict()
        lines.append([_format(col, data[col]) for col in CSV_HEADER])
    return lines


def write_csv(rows: Sequence[SweepRow], path) -> Path:
    if not rows:
        raise ValueError("no rows to write")
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(csv_lines(rows))
    return path


def read_csv(path) -> List[dict]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected CSV header")
        return list(reader)


def _plot_tables(records: List[dict]) -> dict:
    """(metric, mobility) -> {interval: {topology: [values]}} from CSV-formatted records."""
    tables = {}
    for rec in records:
        for stem, column in PLOT_METRICS.items():
            per_interval = tables.setdefault((stem, rec["mobility"]), {})
            cell = per_interval.setdefault(Decimal(rec["interval_s"]), {})
            cell.setdefault(rec["topology"], []).append(Decimal(rec[column]))
    return tables


def plot_files(records: List[dict]) -> dict:
    """Series file name -> contents. Values are seed means of the CSV numbers."""
    topologies = [t for t in TOPOLOGIES if any(r["topology"] == t for r in records)]
    files = {}
    for (stem, mobility), per_interval in sorted(_plot_tables(records).items()):
        lines = [f"# {PLOT_METRICS[stem]} ({mobility}); columns: interval_s "
                 + " ".join(topologies)]
        for interval in sorted(per_interval):
            values = []
            for topo in topologies:
                samples = per_interval[interval].get(topo)
                if samples:
                    mean = sum(samples) / len(samples)
                    values.append(f"{mean.quantize(Decimal('0.000001'))}")
                else:
                    values.append("nan")
            lines.append(f"{interval:.6f} " + " ".join(values))
        files[f"{stem}_{mobility}.dat"] = "\n".join(lines) + "\n"
    return files


GNUPLOT_TEMPLATE = """\
# gnuplot {name}
set terminal pngcairo size 800,600
set xlabel "WPAN packet interval (s)"
"""


def gnuplot_script(names: Sequence[str], topologies: Sequence[str]) -> str:
    out = [GNUPLOT_TEMPLATE.format(name="plots.gp")]
    for name in names:
        stem = name[:-4]
        series = ", ".join(f"'{name}' using 1:{i + 2} with linespoints title '{t}'"
                           for i, t in enumerate(topologies))
        out.append(f"set output '{stem}.png'\nset ylabel '{stem}'\nplot {series}\n")
    return "\n".join(out)


def emit_plot_data(rows: Sequence[SweepRow], out_dir) -> List[Path]:
    """Write one series file per (metric, mobility) plus a gnuplot script."""
    if not rows:
        raise ValueError("no rows to plot")
    records = [dict(zip(CSV_HEADER, line)) for line in csv_lines(rows)]
    return write_plot_files(records, out_dir)


def write_plot_files(records: List[dict], out_dir) -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = plot_files(records)
    paths = []
    for name, text in files.items():
        path = out_dir / name
        path.write_text(text)
        paths.append(path)
    topologies = [t for t in TOPOLOGIES if any(r["topology"] == t for r in records)]
    (out_dir / "plots.gp").write_text(gnuplot_script(list(files), topologies))
    return paths


# --- configuration ----------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _split(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="coexsim", description="802.15.4 / 802.11b coexistence sweep")
    p.add_argument("--topology", action="append", help="circular, grid or random (repeatable)")
    p.add_argument("--mobility", action="append", help="static or rwp (repeatable)")
    p.add_argument("--interval", type=float, help="single WPAN packet interval in seconds")
    p.add_argument("--interval-start", type=float)
    p.add_argument("--interval-end", type=float)
    p.add_argument("--interval-step", type=float)
    p.add_argument("--seed", action="append", type=int, help="replication seed (repeatable)")
    p.add_argument("--duration", type=float, help="simulated seconds per run")
    p.add_argument("--wlan-channel", type=int)
    p.add_argument("--wpan-channel", type=int)
    p.add_argument("--config", help="key = value scenario file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int, help="parallel worker processes")
    return p


def _mobility_words(raw: str) -> List[str]:
    modes = []
    for word in _split(raw):
        w = word.lower()
        if w in ("on", "true", "yes", "rwp", "mobile"):
            modes.append("rwp")
        elif w in ("off", "false", "no", "static"):
            modes.append("static")
        else:
            raise ConfigError(f"bad mobility value {word!r}")
    return modes


def _apply_file(values: dict, settings: dict, scenario: dict) -> None:
    for key, raw in values.items():
        if key == "topology":
            settings["topologies"] = _split(raw)
        elif key == "mobility":
            settings["mobility_modes"] = _mobility_words(raw)
        elif key == "seed":
            settings["seeds"] = [convert_value(key, p, int) for p in _split(raw)]
        elif key == "wpan_interval_s":
            value = convert_value(key, raw, float)
            settings["interval_start_s"] = settings["interval_end_s"] = value
        elif key in ("interval_start_s", "interval_end_s", "interval_step_s"):
            settings[key] = convert_value(key, raw, float)
        elif key in SCENARIO_FIELDS:
            scenario[key] = convert_value(key, raw, SCENARIO_FIELDS[key])
        else:
            raise ConfigError(f"unknown configuration key {key!r}")


def parse_config(args: Sequence[str] = (), config_file=None) -> ExperimentConfig:
    """Built-in defaults, overridden by the file, overridden by flags."""
    ns = build_parser().parse_args(list(args))
    settings: dict = {}
    scenario: dict = {}
    path = ns.config or config_file
    try:
        if path:
            _apply_file(read_key_values(path), settings, scenario)
        if ns.topology:
            settings["topologies"] = [t for raw in ns.topology for t in _split(raw)]
        if ns.mobility:
            settings["mobility_modes"] = [m for raw in ns.mobility for m in _mobility_words(raw)]
        if ns.interval is not None:
            settings["interval_start_s"] = settings["interval_end_s"] = ns.interval
        for flag, key in (("interval_start", "interval_start_s"),
                          ("interval_end", "interval_end_s"),
                          ("interval_step", "interval_step_s")):
            if getattr(ns, flag) is not None:
                settings[key] = getattr(ns, flag)
        if ns.seed:
            settings["seeds"] = list(ns.seed)
        for flag, key in (("duration", "duration_s"), ("wlan_channel", "wlan_channel"),
                          ("wpan_channel", "wpan_channel")):
            if getattr(ns, flag) is not None:
                scenario[key] = getattr(ns, flag)
        if ns.out:
            settings["out"] = Path(ns.out)
        if ns.jobs is not None:
            settings["jobs"] = ns.jobs
        settings["base"] = ScenarioConfig(**scenario)
        return ExperimentConfig(**settings)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
