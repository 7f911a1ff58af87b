"""Project manifest: the researcher-provided plan inputs, stored as TOML.

The manifest is the single `harness-manifest` file at the workspace root.
It names the project, the headline metrics, the protected evaluation
assets, the tier commands and budgets, and the variable groups used by
the one-change-per-experiment rule.
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ValidationError

MANIFEST_NAME = "harness-manifest"

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.-]*$")
_METRIC_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")
_ENV_VAR_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

DEFAULT_TIER_BUDGETS = {1: 120.0, 2: 1800.0, 3: math.inf}
DEFAULT_NODE_ENV_VAR = "SLURM_JOB_NODELIST"
DEFAULT_GPU_PROBE = (
    "nvidia-smi --query-gpu=index,memory.used,utilization.gpu"
    " --format=csv,noheader,nounits"
)


@dataclass
class TierConfig:
    """One tier's run configuration from the manifest."""

    command: str = ""
    # metric name -> regex with one capture group; empty means use the
    # default line-anchored `name=value` pattern
    patterns: dict[str, str] = field(default_factory=dict)


@dataclass
class ProjectManifest:
    name: str
    research_question: str = ""
    metric_names: list[str] = field(default_factory=list)
    protected_paths: list[str] = field(default_factory=list)
    tier_budgets: dict[int, float] = field(
        default_factory=lambda: dict(DEFAULT_TIER_BUDGETS)
    )
    gpu_probe_command: str = DEFAULT_GPU_PROBE
    node_env_var: str = DEFAULT_NODE_ENV_VAR
    # extra agent-facing names (CLAUDE.md, AGENTS.md, ...) written as
    # copies of INSTRUCTIONS.md at init
    instruction_links: list[str] = field(default_factory=list)
    # variable group name -> list of workspace-relative globs
    variable_groups: dict[str, list[str]] = field(default_factory=dict)
    tiers: dict[int, TierConfig] = field(default_factory=dict)
    container_image: str = ""

    def validate(self) -> None:
        if not self.name or not _IDENT_RE.match(self.name):
            raise ValidationError(f"name must be an identifier, got {self.name!r}", field="name")
        if not self.metric_names:
            raise ValidationError("metric_names must be non-empty", field="metric_names")
        if len(set(self.metric_names)) != len(self.metric_names):
            raise ValidationError("metric_names must be unique", field="metric_names")
        for m in self.metric_names:
            if not _METRIC_RE.match(m):
                raise ValidationError(f"invalid metric name {m!r}", field="metric_names")
        for p in self.protected_paths:
            _check_relative(p, "protected_paths")
        budgets = [self.tier_budgets.get(k) for k in (1, 2, 3)]
        if any(b is None or b <= 0 for b in budgets):
            raise ValidationError(
                "tier_budgets must give a positive budget for tiers 1..3",
                field="tier_budgets",
            )
        if not budgets[0] < budgets[1] < budgets[2]:
            raise ValidationError(
                "tier_budgets must be strictly increasing from tier 1 to 3",
                field="tier_budgets",
            )
        if self.node_env_var and not _ENV_VAR_RE.match(self.node_env_var):
            raise ValidationError(
                f"invalid environment variable name {self.node_env_var!r}",
                field="node_env_var",
            )
        for name, globs in self.variable_groups.items():
            if not _IDENT_RE.match(name):
                raise ValidationError(f"invalid variable group name {name!r}", field="variable_groups")
            for g in globs:
                _check_relative(g, "variable_groups")
        for k in self.tiers:
            if k not in (1, 2, 3):
                raise ValidationError(f"unknown tier {k}", field="tiers")
        for link in self.instruction_links:
            _check_relative(link, "instruction_links")


def _check_relative(path: str, field_name: str) -> None:
    p = PurePosixPath(path)
    if p.is_absolute() or path.startswith("~"):
        raise ValidationError(f"{field_name} entry {path!r} must be workspace-relative", field=field_name)
    if ".." in p.parts:
        raise ValidationError(f"{field_name} entry {path!r} escapes the workspace", field=field_name)


def load_manifest(path: Path) -> ProjectManifest:
    """Read and validate a manifest file."""
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ValidationError(f"manifest not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"manifest is not valid TOML: {exc}") from None
    return manifest_from_dict(data)


def manifest_from_dict(data: dict) -> ProjectManifest:
    budgets = dict(DEFAULT_TIER_BUDGETS)
    for key, value in data.get("tier_budgets", {}).items():
        try:
            tier = int(key)
        except ValueError:
            raise ValidationError(f"tier_budgets key {key!r} is not a tier number", field="tier_budgets") from None
        budgets[tier] = float(value)
    tiers = {}
    for key, value in data.get("tiers", {}).items():
        try:
            tier = int(key)
        except ValueError:
            raise ValidationError(f"tiers key {key!r} is not a tier number", field="tiers") from None
        tiers[tier] = TierConfig(
            command=value.get("command", ""),
            patterns=dict(value.get("patterns", {})),
        )
    m = ProjectManifest(
        name=data.get("name", ""),
        research_question=data.get("research_question", ""),
        metric_names=list(data.get("metric_names", [])),
        protected_paths=list(data.get("protected_paths", [])),
        tier_budgets=budgets,
        gpu_probe_command=data.get("gpu_probe_command", DEFAULT_GPU_PROBE),
        node_env_var=data.get("node_env_var", DEFAULT_NODE_ENV_VAR),
        instruction_links=list(data.get("instruction_links", [])),
        variable_groups={k: list(v) for k, v in data.get("variable_groups", {}).items()},
        tiers=tiers,
        container_image=data.get("container_image", ""),
    )
    m.validate()
    return m


def save_manifest(manifest: ProjectManifest, path: Path) -> None:
    manifest.validate()
    path.write_text(manifest_to_toml(manifest), encoding="utf-8")


def manifest_to_toml(m: ProjectManifest) -> str:
    lines = [
        f"name = {_toml_str(m.name)}",
        f"research_question = {_toml_str(m.research_question)}",
        f"metric_names = {_toml_list(m.metric_names)}",
        f"protected_paths = {_toml_list(m.protected_paths)}",
        f"gpu_probe_command = {_toml_str(m.gpu_probe_command)}",
        f"node_env_var = {_toml_str(m.node_env_var)}",
        f"instruction_links = {_toml_list(m.instruction_links)}",
        f"container_image = {_toml_str(m.container_image)}",
        "",
        "[tier_budgets]",
    ]
    for tier in sorted(m.tier_budgets):
        lines.append(f'"{tier}" = {_toml_float(m.tier_budgets[tier])}')
    if m.variable_groups:
        lines += ["", "[variable_groups]"]
        for name in sorted(m.variable_groups):
            lines.append(f"{name} = {_toml_list(m.variable_groups[name])}")
    for tier in sorted(m.tiers):
        cfg = m.tiers[tier]
        lines += ["", f"[tiers.{tier}]", f"command = {_toml_str(cfg.command)}"]
        if cfg.patterns:
            lines.append(f"[tiers.{tier}.patterns]")
            for name in sorted(cfg.patterns):
                lines.append(f"{name} = {_toml_str(cfg.patterns[name])}")
    return "\n".join(lines) + "\n"


def _toml_str(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"')
    out = out.replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r")
    return f'"{out}"'


def _toml_list(items: list[str]) -> str:
    return "[" + ", ".join(_toml_str(i) for i in items) + "]"


def _toml_float(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return repr(float(x))
