import logging
import sys
import time

from .experiment import ConfigError, SweepError, emit_plot_data, parse_config, run_sweep, write_csv

log = logging.getLogger("coexsim")


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"coexsim: error: {exc}", file=sys.stderr)
        return 2
    cells = cfg.cells()
    log.info("running %d cells (%d jobs)", len(cells), max(cfg.jobs, 1))
    started = time.perf_counter()
    try:
        rows = run_sweep(cfg)
    except SweepError as exc:
        print(f"coexsim: {exc}", file=sys.stderr)
        return 1
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
        csv_path = write_csv(rows, cfg.out / "results.csv")
        plots = emit_plot_data(rows, cfg.out)
    except OSError as exc:
        print(f"coexsim: cannot write output: {exc}", file=sys.stderr)
        return 1
    log.info("wrote %s and %d series files in %.1f s", csv_path, len(plots),
             time.perf_counter() - started)
    return 0
