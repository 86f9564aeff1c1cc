"""
Run Configuration

Purpose:
Turn parsed command-line arguments, optionally seeded from a flat
`key=value` file, into a validated RunConfig before any computation starts.

Config file:
    # comment
    rank-bound = 30
    lambda_s = 0.1
    symmetric = true
Keys are long flag names (dashes or underscores). Values use the same
syntax as on the command line; list flags take commas or spaces. Flags given
explicitly on the command line win over the file.
"""

from dataclasses import dataclass, field
from pathlib import Path

from config.settings import SOLVER_THREADS

TRUE_WORDS = {"1", "true", "yes", "on"}
FALSE_WORDS = {"0", "false", "no", "off"}

# Arguments naming files that must exist before a command runs.
INPUT_PATHS = {
    "decompose": ("input",),
    "phase": (),
    "analyze": ("input", "factors", "support"),
    "lda": ("corpus", "vocab", "test"),
    "baseline": ("input",),
}
COMMON_KEYS = {"command", "config", "verbose", "stdout", "threads", "no_timestamp", "seed"}


def read_config_file(path):
    """Parse a key=value file into {key: raw string}."""
    path = Path(path)
    values = {}
    for line_no, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"{path}:{line_no}: expected key=value, got '{line}'.")
        dest = key.strip().lstrip("-").replace("-", "_")
        if dest in values:
            raise ValueError(f"{path}:{line_no}: duplicate key '{key.strip()}'.")
        values[dest] = value.strip()
    return values


def _convert(action, raw, where):
    if action.nargs == 0 and action.const is None:
        try:
            return int(raw)
        except ValueError:
            raise ValueError(f"{where}: expected an integer, got '{raw}'.") from None
    if action.nargs == 0:
        word = raw.lower()
        if word not in TRUE_WORDS | FALSE_WORDS:
            raise ValueError(f"{where}: expected a boolean, got '{raw}'.")
        return (word in TRUE_WORDS) == bool(action.const)

    convert = action.type or str
    try:
        if action.nargs in ("+", "*") or isinstance(action.nargs, int):
            items = [convert(item) for item in raw.replace(",", " ").split()]
            if not items:
                raise ValueError
            return items
        value = convert(raw)
    except (TypeError, ValueError):
        raise ValueError(f"{where}: invalid value '{raw}'.") from None
    if action.choices is not None and value not in action.choices:
        raise ValueError(f"{where}: '{raw}' is not one of {', '.join(map(str, action.choices))}.")
    return value


def file_defaults(subparser, values, path):
    """Map raw file values onto a subcommand's options; unknown keys are rejected."""
    actions = {}
    for action in subparser._actions:
        if action.dest in ("help", "config"):
            continue
        for option in action.option_strings:
            if option.startswith("--"):
                actions[option[2:].replace("-", "_")] = action
    defaults = {}
    for key, raw in values.items():
        if key not in actions:
            raise ValueError(f"{path}: unknown key '{key}' for this command.")
        action = actions[key]
        defaults[action.dest] = _convert(action, raw, f"{path}: {key}")
    return defaults


@dataclass(frozen=True)
class RunConfig:
    command: str
    inputs: tuple = ()
    seed: int = 0
    verbose: int = 0
    stdout: bool = False
    threads: int = SOLVER_THREADS
    timestamp: bool = True
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in INPUT_PATHS:
            raise ValueError(f"Unknown command '{self.command}'.")
        if self.seed < 0:
            raise ValueError(f"Seed must be nonnegative, got {self.seed}.")
        if self.threads < 1:
            raise ValueError(f"--threads must be at least 1, got {self.threads}.")

    @classmethod
    def from_args(cls, args):
        given = vars(args)
        inputs = tuple(Path(given[key]) for key in INPUT_PATHS[args.command] if given.get(key) is not None)
        options = {k: v for k, v in given.items() if k not in COMMON_KEYS}
        return cls(
            command=args.command,
            inputs=inputs,
            seed=args.seed,
            verbose=args.verbose,
            stdout=args.stdout,
            threads=args.threads,
            timestamp=not args.no_timestamp,
            options=options,
        )

    def validate_paths(self):
        for path in self.inputs:
            if not path.is_file():
                raise FileNotFoundError(f"Input file not found: {path}")

    def __getattr__(self, name):
        options = self.__dict__.get("options", {})
        if name in options:
            return options[name]
        raise AttributeError(name)
