"""Command line entry point: ``simulate``.

Batch mode runs one deterministic simulation and writes the report tables;
``--manual-qc`` instead boots the live system with quality control routed to
the operator task queue and serves the HTTP API (and the console bundle, when
built) until every order finishes or the wall-clock limit passes.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from .sim import SimConfig, parse_sim_config, run_simulation
from .workorders import default_rule_set, load_rule_set


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Run the production-chain simulator.",
    )
    parser.add_argument("--config", type=Path, default=None,
                        help="key=value config file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--days", type=int, default=None,
                        help="simulated days of order generation")
    parser.add_argument("--rate", type=int, default=None,
                        help="orders per simulated day")
    parser.add_argument("--report-out", type=Path, default=None,
                        help="directory for the report tables")
    parser.add_argument("--store-dir", type=Path, default=None,
                        help="keep the operational journal here")
    parser.add_argument("--manual-qc", action="store_true",
                        help="route QC to the operator task queue and serve HTTP")
    parser.add_argument("--port", type=int, default=None,
                        help="HTTP port for --manual-qc "
                             "(default $ORBITFLOW_PORT or 8080)")
    parser.add_argument("--console-dir", type=Path, default=None,
                        help="static console bundle to serve at /console")
    parser.add_argument("--max-wall-seconds", type=float, default=None,
                        help="stop the live server after this long")
    return parser


def load_config(args: argparse.Namespace) -> SimConfig:
    if args.config is not None:
        cfg = parse_sim_config(args.config.read_text(encoding="ascii"))
    else:
        env_cfg = os.environ.get("ORBITFLOW_CONFIG")
        if env_cfg:
            cfg = parse_sim_config(Path(env_cfg).read_text(encoding="ascii"))
        else:
            cfg = SimConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.days is not None:
        cfg.duration_days = args.days
    if args.rate is not None:
        cfg.order_rate = args.rate
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = load_config(args)
    rules = load_rule_set(cfg.rules_file) if cfg.rules_file else default_rule_set()

    if args.manual_qc:
        return _run_live(args, cfg, rules)

    started = time.monotonic()
    report = run_simulation(
        cfg, rules=rules,
        store_dir=args.store_dir,
        report_dir=args.report_out,
    )
    wall = time.monotonic() - started
    sys.stdout.write(report.summary())
    sys.stdout.write(f"wall time: {wall:.2f}s\n")
    if args.report_out:
        sys.stdout.write(f"report written to {args.report_out}\n")
    return 0 if report.conserved() else 1


def _run_live(args: argparse.Namespace, cfg: SimConfig, rules) -> int:
    from .service import LiveSystem, _default_console_dir, serve

    logging.basicConfig(level=logging.INFO, format="%(message)s")
    cfg.auto_qc = False
    system = LiveSystem(
        cfg,
        rules=rules,
        data_dir=args.store_dir,
        console_dir=args.console_dir or _default_console_dir(),
    )
    port = args.port
    if port is None:
        port = int(os.environ.get("ORBITFLOW_PORT", "8080"))
    server = serve(system, port=port)
    system.start_background()
    print(f"live production chain on http://127.0.0.1:{server.port}/ "
          f"(QC tasks: /tasks?center=QC)", flush=True)
    deadline = (time.monotonic() + args.max_wall_seconds
                if args.max_wall_seconds else None)
    try:
        while True:
            time.sleep(0.2)
            if deadline is not None and time.monotonic() > deadline:
                break
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        system.stop()
        if args.report_out:
            with system._lock:
                report = system.sim.build_report()
            report.write(args.report_out)
            sys.stdout.write(report.summary())
    return 0


if __name__ == "__main__":
    sys.exit(main())
