import sys
import os
import argparse
import logging
from pathlib import Path
from typing import List, Tuple

from dotenv import dotenv_values
from tqdm import tqdm

# Add project root to the Python path to allow importing from 'bergman'
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.append(PROJECT_ROOT)

from bergman.cli import main as cli_main
from bergman.config import configure_logging, settings

logger = logging.getLogger("run_battery")


def battery_files(directory: str, pattern: str = "*.conf") -> List[Path]:
    """Battery files in ``directory``, sorted by name so runs are repeatable."""
    return sorted(Path(directory).glob(pattern))


def battery_argv(path: Path, output_dir: str) -> List[str]:
    """
    Turn one battery file into CLI arguments.

    The file's ``command`` key selects the subcommand (for example
    ``sweep weak43``); every other key is read by the CLI through --config.
    The output lands in ``output_dir`` under the battery file's stem unless
    the file names one itself.
    """
    values = dotenv_values(path)
    command = values.get("command")
    if not command:
        raise ValueError(f"{path} has no command key")
    argv = command.split() + ["--config", str(path)]
    if not values.get("output"):
        fmt = values.get("format") or "csv"
        argv += ["--output", str(Path(output_dir) / f"{path.stem}.{fmt}")]
    return argv


def run_battery(files: List[Path], output_dir: str) -> Tuple[int, int]:
    """
    Run every battery file through the CLI.

    Args:
        files: battery files to run, in order
        output_dir: directory for result files without an explicit output

    Returns:
        Tuple of (success_count, error_count)
    """
    success_count = 0
    error_count = 0
    for path in tqdm(files, desc="Battery", unit="run"):
        try:
            status = cli_main(battery_argv(path, output_dir))
        except ValueError as e:
            logger.error("%s: %s", path.name, e)
            status = 2
        if status == 0:
            success_count += 1
        else:
            logger.error("%s exited with status %d", path.name, status)
            error_count += 1
    return success_count, error_count


def main():
    parser = argparse.ArgumentParser(description="Run a directory of key=value experiment files through the bergman CLI.")
    parser.add_argument("directory", nargs="?", default=os.path.join(PROJECT_ROOT, "batteries"),
                        help="Directory holding *.conf battery files")
    parser.add_argument("--output-dir", default=settings.output_dir,
                        help="Where result files go (default: BERGMAN_OUTPUT_DIR)")
    parser.add_argument("--pattern", default="*.conf", help="Glob for battery files")
    args = parser.parse_args()

    configure_logging()
    files = battery_files(args.directory, args.pattern)
    if not files:
        print(f"No battery files matching {args.pattern} in {args.directory}")
        return 1

    print(f"Running {len(files)} battery file(s) from {args.directory}")
    success_count, error_count = run_battery(files, args.output_dir)
    print(f"Battery finished: {success_count} succeeded, {error_count} failed")
    return 0 if error_count == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
