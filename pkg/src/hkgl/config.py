"""Strict JSON run configuration shared by every CLI subcommand."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .errors import ConfigError
from .geometry import parse_density, parse_manifold
from .graph import ScheduleMode

DEFAULT_T_LIST = [1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01]
COMMANDS = ("sample", "spectrum", "heat", "converge", "pointwise", "varadhan")


def parse_epsilon(text):
    """``auto:<mode>`` or a positive float -> (ScheduleMode, fixed value or None)."""
    text = str(text).strip()
    if text.startswith("auto:"):
        try:
            mode = ScheduleMode(text[5:])
        except ValueError as exc:
            modes = ", ".join(m.value for m in ScheduleMode if m is not ScheduleMode.FIXED)
            raise ConfigError(f"--epsilon: unknown schedule {text[5:]!r} (one of {modes})") from exc
        if mode is ScheduleMode.FIXED:
            raise ConfigError("--epsilon: use a number for a fixed bandwidth")
        return mode, None
    try:
        value = float(text)
    except ValueError as exc:
        raise ConfigError(f"--epsilon: expected auto:<mode> or a number, got {text!r}") from exc
    if not value > 0:
        raise ConfigError(f"--epsilon: bandwidth must be positive, got {value}")
    return ScheduleMode.FIXED, value


@dataclass
class RunConfig:
    command: str
    manifold: str = "circle:1.0"
    density: str = "uniform"
    n: int = 1000
    seed: int = 0
    cloud: str | None = None
    epsilon: str = "auto:eig"
    epsilon_mult: float = 1.0
    alpha: int = 1
    k: int | None = None
    t: float | None = None
    t_list: list = field(default_factory=lambda: list(DEFAULT_T_LIST))
    ns: list | None = None
    C: float = 1.0
    suggest_k: bool = False
    pairs: str | None = None
    oracle: bool = False
    source: str = "estimate"
    repeats: int = 1
    index: int = 1
    out: str | None = None
    vectors: str | None = None
    matrix: str | None = None
    kde_out: str | None = None
    threads: int = 0

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "command" not in data:
            raise ConfigError("config needs a 'command' key")
        return cls(**data)

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--config: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError("--config: top level must be an object")
        return cls.from_dict(data)

    def to_json(self):
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)

    def validate(self):
        """Check every precondition before any computation starts."""
        def fail(flag, msg):
            raise ConfigError(f"--{flag}: {msg}")

        if self.command not in COMMANDS:
            fail("command", f"unknown command {self.command!r}")
        try:
            parse_manifold(self.manifold)
        except ConfigError as exc:
            fail("manifold", str(exc))
        try:
            parse_density(self.density)
        except ConfigError as exc:
            fail("density", str(exc))
        if not isinstance(self.n, int) or self.n < 2:
            fail("n", f"need an integer n >= 2, got {self.n!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            fail("seed", f"need an unsigned 64-bit integer, got {self.seed!r}")
        parse_epsilon(self.epsilon)
        if not self.epsilon_mult > 0:
            fail("epsilon-mult", f"must be positive, got {self.epsilon_mult}")
        if self.alpha not in (0, 1):
            fail("alpha", f"must be 0 or 1, got {self.alpha!r}")
        if self.k is not None and (not isinstance(self.k, int) or self.k < 1):
            fail("k", f"must be a positive integer, got {self.k!r}")
        if self.t is not None and not self.t > 0:
            fail("t", f"must be positive, got {self.t}")
        if not self.C > 0:
            fail("C", f"must be positive, got {self.C}")
        if not isinstance(self.repeats, int) or self.repeats < 1:
            fail("repeats", f"must be a positive integer, got {self.repeats!r}")
        if self.threads < 0:
            fail("threads", f"must be >= 0, got {self.threads}")
        if self.command == "heat":
            if self.t is None:
                fail("t", "heat needs a diffusion time")
            if self.k is None and not self.suggest_k:
                fail("k", "give --k or --suggest-k")
        if self.command == "converge":
            ns = self.ns or []
            if len(ns) < 3:
                fail("ns", f"need at least 3 sample sizes, got {len(ns)}")
            if any(not isinstance(x, int) or x < 3 for x in ns):
                fail("ns", "sample sizes must be integers >= 3")
            if any(b <= a for a, b in zip(ns, ns[1:])):
                fail("ns", "sample sizes must be strictly ascending")
            if self.k is not None and not 2 <= self.k <= 25:
                fail("k", f"converge needs 2 <= k <= 25, got {self.k}")
        if self.command == "varadhan":
            if not self.t_list:
                fail("t-list", "varadhan needs descending diffusion times")
            if any(not t > 0 for t in self.t_list):
                fail("t-list", "times must be positive")
            if any(b >= a for a, b in zip(self.t_list, self.t_list[1:])):
                fail("t-list", "times must be strictly descending")
            if self.source not in ("estimate", "oracle"):
                fail("source", f"must be 'estimate' or 'oracle', got {self.source!r}")
            if not self.pairs or self.pairs.strip() == "all":
                fail("pairs", "varadhan needs explicit i:j pairs")
        return self
