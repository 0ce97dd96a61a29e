"""``dpa-lab`` command line.

Examples
--------
::

    dpa-lab point --family cc --z1 1.2247 --z2 1.2247 --phi 3.14159 --quantity npt_closed
    dpa-lab figure fig3 --out results/
    dpa-lab table t1 --config scenario.json --format json

Options may come from a JSON file given with ``--config``; flags given on
the command line override it. Failures print a JSON object to stderr and
exit with 2 (bad configuration), 3 (no numerical convergence) or 4
(truncation too small).
"""

import argparse
import datetime
import json
import logging
import sys

from .errors import ConfigError, DpaError
from .figures import FIGURES, TABLES, run_figure, run_table
from .scenario import QUANTITIES, ScenarioConfig, render_csv, run_point

# command-line flags and their types; each maps to the ScenarioConfig field of the same name
_FLAGS = {
    "family": str,
    "z1": float,
    "z2": float,
    "nbar1": float,
    "nbar2": float,
    "r1": float,
    "r2": float,
    "r": float,
    "phi": float,
    "stage": str,
    "nbar_total": float,
    "split": float,
    "cutoff": int,
    "quad_nodes": int,
    "box": float,
    "n_max": int,
    "workers": int,
    "out": str,
    "format": str,
}
_PARAM_KEYS = ("z1", "z2", "nbar1", "nbar2", "r1", "r2", "r")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    parser = _Parser(prog="dpa-lab", description="Delocalized photon addition on two-mode light states.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    point = sub.add_parser("point", help="evaluate one quantity for one scenario")
    point.add_argument("--quantity", default="npt_closed", choices=QUANTITIES)
    figure = sub.add_parser("figure", help="write the data behind one figure")
    figure.add_argument("target", choices=FIGURES)
    table = sub.add_parser("table", help="write one table")
    table.add_argument("target", choices=TABLES)
    for p in (point, figure, table):
        p.add_argument("--config", help="JSON scenario file; flags override it")
        p.add_argument("--family", choices=("cc", "tt", "ss", "tmsv", "vac"))
        p.add_argument("--stage", choices=("before", "after"))
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("-v", "--verbose", action="store_true")
        for name, kind in _FLAGS.items():
            if name in ("family", "stage", "format"):
                continue
            p.add_argument("--" + name.replace("_", "-"), dest=name, type=kind)
    return parser


def load_config(args):
    data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    flags = {name: getattr(args, name, None) for name in _FLAGS}
    flags = {k: v for k, v in flags.items() if v is not None}
    # drop file entries that would clash with the command line
    explicit = [k for k in _PARAM_KEYS if k in flags]
    if "family" in flags and flags["family"] != data.get("family"):
        for key in _PARAM_KEYS:
            data.pop(key, None)
    if "nbar_total" in flags:
        for key in _PARAM_KEYS:
            data.pop(key, None)
    if explicit:
        data.pop("nbar_total", None)
        data.pop("split", None)
    data.update(flags)
    return ScenarioConfig.from_dict(data)


def _error_payload(exc):
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": getattr(exc, "exit_code", 1)}
    cutoff = getattr(exc, "required_cutoff", None)
    if cutoff is not None:
        payload["required_cutoff"] = [cutoff.d1, cutoff.d2] if hasattr(cutoff, "d1") else cutoff
    if getattr(exc, "tail_mass", None) is not None:
        payload["tail_mass"] = exc.tail_mass
    if getattr(exc, "estimates", None):
        payload["estimates"] = list(exc.estimates)
    return payload


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
        config = load_config(args)
        if args.command == "point":
            record = run_point(config, args.quantity)
            record.timestamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
            if config.format == "json":
                sys.stdout.write(json.dumps(record.to_dict(), indent=1, sort_keys=True) + "\n")
            else:
                meta = [
                    ("tool", f"dpa-lab {record.tool_version}"),
                    ("quantity", record.quantity),
                    ("config-hash", config.config_hash()),
                    ("timestamp", record.timestamp),
                ]
                meta += [("convergence", json.dumps(c, sort_keys=True)) for c in record.convergence]
                sys.stdout.write(render_csv(record.columns, record.rows, meta))
        else:
            runner = run_figure if args.command == "figure" else run_table
            for name in runner(args.target, config):
                print(name)
    except DpaError as exc:
        sys.stderr.write(json.dumps(_error_payload(exc), sort_keys=True) + "\n")
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
