"""Command-line entry point.

    tweedie-eb VERB [-c CONFIG] [key=value ...]

Exit status: 0 on success, 2 for a missing input artifact, 3 for a config
error, 4 for a numerical failure. Errors are reported as one JSON line on
stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import describe_keys, load_config
from .errors import ConfigError, MissingArtifactError, StageError
from .pipeline import STAGES, run_pipeline, run_stage

VERBS = {
    "simulate": "generate unit data -> units.csv",
    "fit": "Gibbs-sample every unit -> summaries.csv",
    "score": "posterior scores -> scores.csv",
    "density": "Lindsey fits -> histogram_d{J}.csv, fit_d{J}.csv",
    "correct": "Tweedie correction -> corrections_d{J}.csv",
    "pipeline": "all stages in order",
    "report": "report.txt and figures from existing artifacts",
}

EXIT_OK, EXIT_MISSING, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3, 4


def build_parser() -> argparse.ArgumentParser:
    verbs = "\n".join(f"  {v:<9} {h}" for v, h in VERBS.items())
    epilog = f"verbs:\n{verbs}\n\n{describe_keys()}"
    parser = argparse.ArgumentParser(
        prog="tweedie-eb",
        description="Local empirical Bayes correction of posterior scores.",
        epilog=epilog,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log stage progress")
    sub = parser.add_subparsers(dest="verb", required=True, metavar="VERB")
    for verb, text in VERBS.items():
        p = sub.add_parser(verb, help=text, description=text, epilog=describe_keys(),
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("-c", "--config", help="key = value config file")
        p.add_argument("overrides", nargs="*", metavar="key=value", help="override a config key")
    return parser


def _fail(code: int, kind: str, message: str, stage: str | None = None) -> int:
    payload = {"error": kind, "message": message}
    if stage is not None:
        payload["stage"] = stage
    print(json.dumps(payload), file=sys.stderr)
    return code


def dispatch(verb: str, config_path=None, overrides=()) -> int:
    stage = verb
    try:
        cfg = load_config(config_path, overrides)
        if verb == "pipeline":
            report = run_pipeline(cfg)
            print(report.to_text(), end="")
        else:
            assert verb in STAGES, verb
            result = run_stage(verb, cfg)
            if verb == "report":
                print(result.to_text(), end="")
    except MissingArtifactError as exc:
        return _fail(EXIT_MISSING, "missing_input", str(exc), stage)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    except StageError as exc:
        if isinstance(exc.cause, MissingArtifactError):
            return _fail(EXIT_MISSING, "missing_input", str(exc.cause), exc.stage)
        return _fail(EXIT_NUMERIC, "numerical", str(exc.cause), exc.stage)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return dispatch(args.verb, args.config, args.overrides)


if __name__ == "__main__":
    sys.exit(main())
