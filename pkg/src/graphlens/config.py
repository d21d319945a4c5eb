"""Run configuration: defaults, a flat key=value file format, CLI overrides.

The master seed is mandatory and never defaults to wall clock, so every run
is reproducible from its config alone.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

DEFAULT_SIZES = (8, 16, 32, 64)
DEFAULT_CLASSES = ("star", "wheel", "ladder")


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run needs besides file paths."""

    seed: int
    sizes: tuple[int, ...] = DEFAULT_SIZES
    classes: tuple[str, ...] = DEFAULT_CLASSES
    corpus_count: int = 100
    splice_extra: int = 10
    parts_per_class: int = 30
    tau_step: float = 0.05
    train_fraction: float = 0.8
    lp_node_cap: int = 5000
    walks_per_node: int = 1
    workers: int = 1
    row_normalize: bool = False

    def __post_init__(self) -> None:
        if not self.sizes:
            raise ValueError("at least one lens size is required")
        if list(self.sizes) != sorted(set(self.sizes)):
            raise ValueError("sizes must be ascending and unique")
        if any(s < 2 for s in self.sizes):
            raise ValueError("every lens size must be >= 2")
        if len(self.classes) < 2:
            raise ValueError("at least two classes are required")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if not 0.0 < self.tau_step <= 1.0:
            raise ValueError("tau_step must lie in (0, 1]")
        if self.corpus_count < 1 or self.parts_per_class < 1:
            raise ValueError("corpus_count and parts_per_class must be >= 1")
        if self.splice_extra < 0:
            raise ValueError("splice_extra must be >= 0")
        if self.walks_per_node < 1 or self.workers < 1:
            raise ValueError("walks_per_node and workers must be >= 1")
        if self.lp_node_cap < 1:
            raise ValueError("lp_node_cap must be >= 1")

    def tau_grid(self) -> list[float]:
        """Strictly increasing taus (step, 2*step, ..., <= 1], rounded clean."""
        n = int((1.0 + 1e-9) / self.tau_step)
        return [round(i * self.tau_step, 12) for i in range(1, n + 1)]


def parse_config(text: str) -> dict[str, object]:
    """Parse the flat key=value format into override values.

    Lines are `key = value`; '#' starts a comment; blank lines are ignored.
    Unknown keys and badly typed values raise ValueError.
    """
    overrides: dict[str, object] = {}
    types = {f.name: f.type for f in fields(RunConfig)}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {line_no}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in types:
            raise ValueError(f"config line {line_no}: unknown key {key!r}")
        overrides[key] = _convert(key, value, line_no)
    return overrides


def _convert(key: str, value: str, line_no: int) -> object:
    try:
        if key in ("sizes",):
            return tuple(int(tok) for tok in value.split(",") if tok.strip())
        if key in ("classes",):
            return tuple(tok.strip() for tok in value.split(",") if tok.strip())
        if key in ("tau_step", "train_fraction"):
            return float(value)
        if key in ("row_normalize",):
            lowered = value.lower()
            if lowered in ("true", "1", "yes"):
                return True
            if lowered in ("false", "0", "no"):
                return False
            raise ValueError(value)
        return int(value)
    except ValueError:
        raise ValueError(f"config line {line_no}: bad value {value!r} "
                         f"for {key}") from None


def load_config(path: str | None, cli_overrides: dict[str, object]) -> RunConfig:
    """Merge file values (if any) with CLI overrides; CLI wins."""
    merged: dict[str, object] = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            merged.update(parse_config(fh.read()))
    merged.update({k: v for k, v in cli_overrides.items() if v is not None})
    if "seed" not in merged:
        raise ValueError("a master seed is required (flag --seed or config key seed)")
    return RunConfig(**merged)  # type: ignore[arg-type]
