"""Linha de comando: `radarkit run` e `radarkit presets`."""
import argparse
import json
import logging
import os
import shutil
import sys
import tempfile
from typing import Any, Dict, List, Optional

from pydantic import ValidationError as SchemaError

from radarkit import __version__, settings
from radarkit.models.config import ExperimentConfig
from radarkit.presets import list_presets, load_preset
from radarkit.services.ensemble_runner import ensemble_runner
from radarkit.services.experiments import RunOutcome, run_experiment
from radarkit.utils.errors import ConfigurationError, RadarkitError
from radarkit.utils.report_utils import render_summary
from radarkit.utils.serialization import read_json, write_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radarkit",
        description="Rastreamento inverso, preferência revelada e projeto de interferência",
    )
    parser.add_argument("--version", action="version", version=f"radarkit {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="executa um experimento")
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="arquivo JSON de configuração (ou um manifest.json)")
    source.add_argument("--preset", help="nome de um preset distribuído")
    run.add_argument("--seed", type=int, default=None, help="substitui a semente da configuração")
    run.add_argument("--out", default=None, help="diretório de saída")
    run.add_argument("--threads", type=int, default=None, help="limite de workers (padrão RADARKIT_THREADS)")

    commands.add_parser("presets", help="lista os presets distribuídos")
    return parser


def _schema_details(error: SchemaError) -> List[Dict[str, Any]]:
    return [
        {"loc": [str(part) for part in item["loc"]], "msg": item["msg"], "type": item["type"]}
        for item in error.errors()
    ]


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.preset:
        config = load_preset(args.preset, seed=args.seed or 0)
    else:
        try:
            payload = read_json(args.config)
        except FileNotFoundError:
            raise ConfigurationError("Arquivo de configuração não encontrado", {"config": [args.config]})
        except json.JSONDecodeError as e:
            raise ConfigurationError("Configuração não é JSON válido", {"config": [f"{args.config}: {e}"]})
        config = ExperimentConfig.model_validate(payload)
        if args.seed is not None:
            config = config.model_copy(update={"seed": args.seed})
    if args.out is not None:
        config = config.model_copy(update={"output_dir": args.out})
    if config.output_dir is None:
        config = config.model_copy(update={
            "output_dir": os.path.join(settings.DEFAULT_OUTPUT_DIR, config.name or config.kind.value)
        })
    return config


def _fallback_dir(args: argparse.Namespace) -> str:
    if args.out:
        return args.out
    return os.path.join(settings.DEFAULT_OUTPUT_DIR, args.preset or "invalid")


def _clear_previous_run(directory: str) -> None:
    """Remove os artefatos listados no report.json de uma execução anterior e o errors.json"""
    stale = ["errors.json"]
    report_path = os.path.join(directory, "report.json")
    if os.path.isfile(report_path):
        try:
            stale.extend(read_json(report_path).get("artifacts", []))
        except (ValueError, AttributeError):
            logger.warning(f"Ignoring unreadable {report_path}")
    for name in stale:
        path = os.path.join(directory, os.path.basename(str(name)))
        if os.path.isfile(path):
            os.remove(path)


def _write_errors(directory: str, payload: Dict[str, Any]) -> None:
    os.makedirs(directory, exist_ok=True)
    _clear_previous_run(directory)
    write_json(os.path.join(directory, "errors.json"), payload)


def _finalize(config: ExperimentConfig, outcome: RunOutcome, staging: str) -> List[str]:
    artifacts = [os.path.basename(path) for path in outcome.artifacts]
    artifacts += ["manifest.json", "report.json", "summary.md"]
    manifest = config.model_dump(mode="json")
    write_json(os.path.join(staging, "manifest.json"), manifest)
    write_json(os.path.join(staging, "report.json"), {
        "status": outcome.status,
        "headline": outcome.headline,
        "flags": outcome.flags,
        "report": outcome.report,
        "artifacts": artifacts,
    })
    summary = render_summary({
        "name": config.name,
        "kind": config.kind.value,
        "seed": config.seed,
        "status": outcome.status,
        "headline": outcome.headline,
        "flags": outcome.flags,
        "artifacts": artifacts,
        "config_json": json.dumps(manifest, indent=2, sort_keys=True),
    })
    with open(os.path.join(staging, "summary.md"), "w", encoding="utf-8") as handle:
        handle.write(summary)
    return artifacts


def _publish(staging: str, target: str) -> None:
    os.makedirs(target, exist_ok=True)
    _clear_previous_run(target)
    for name in sorted(os.listdir(staging)):
        os.replace(os.path.join(staging, name), os.path.join(target, name))


def command_run(args: argparse.Namespace) -> int:
    if args.threads is not None:
        ensemble_runner.configure(args.threads)

    try:
        config = _load_config(args)
    except SchemaError as e:
        logger.error(f"Invalid configuration: {e.error_count()} error(s)")
        _write_errors(_fallback_dir(args), {
            "error": "validation_error",
            "message": "Configuração inválida",
            "details": _schema_details(e),
        })
        return EXIT_INVALID
    except RadarkitError as e:
        logger.error(f"Invalid configuration: {e.message}")
        _write_errors(_fallback_dir(args), e.to_dict())
        return e.exit_status

    target = config.output_dir
    parent = os.path.dirname(os.path.abspath(target))
    os.makedirs(parent, exist_ok=True)
    staging = tempfile.mkdtemp(prefix=".radarkit-staging-", dir=parent)
    try:
        outcome = run_experiment(config, staging)
        artifacts = _finalize(config, outcome, staging)
        _publish(staging, target)
    except RadarkitError as e:
        logger.error(f"Run failed ({e.kind}): {e.message}")
        _write_errors(target, e.to_dict())
        return e.exit_status
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        _write_errors(target, {"error": "error", "message": str(e), "details": {"type": type(e).__name__}})
        return RadarkitError.exit_status
    finally:
        shutil.rmtree(staging, ignore_errors=True)

    if outcome.exit_status:
        logger.warning(f"Run finished with status {outcome.status}")
    status = ensemble_runner.get_processing_status()
    logger.info(
        f"Wrote {len(artifacts)} artifacts to {target} "
        f"(ensemble items: {status['completed_items']} completed, {status['failed_items']} failed, "
        f"{status['max_workers']} workers)"
    )
    return outcome.exit_status


def command_presets(args: argparse.Namespace) -> int:
    for entry in list_presets():
        print(f"{entry['name']:<16} {entry['description']}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=settings.LOG_LEVEL, format=settings.LOG_FORMAT)
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        return command_presets(args)
    return command_run(args)


if __name__ == "__main__":
    sys.exit(main())
