"""Bundled rule assets: the universal and domain rules shipped as data files.

Rule bodies are versioned data, not code: they live under
``labrig/assets/commandments/`` with a sha256 integrity manifest
(``assets/manifest.sum``). Loading fails closed on any missing or
tampered asset.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources

from .errors import LabrigError

UNIVERSAL_IDS = ("I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X")
COMPUTE_IDS = ("C1", "C2", "C3", "C4")
MATH_IDS = ("M1", "M2", "M3")
ALL_IDS = UNIVERSAL_IDS + COMPUTE_IDS + MATH_IDS


class AssetError(LabrigError):
    """An asset is missing, corrupt, or the manifest is malformed."""


@dataclass(frozen=True)
class PromptAsset:
    id: str
    title: str
    body: str
    digest: str

    @property
    def heading(self) -> str:
        return f"{self.id}. {self.title}"


def _asset_root():
    return resources.files("labrig") / "assets"


def _read_manifest() -> dict[str, str]:
    """Map of asset-relative path -> expected sha256 hex digest."""
    try:
        text = (_asset_root() / "manifest.sum").read_text(encoding="utf-8")
    except FileNotFoundError:
        raise AssetError("assets/manifest.sum missing") from None
    expected = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            digest, rel = line.split(None, 1)
        except ValueError:
            raise AssetError(f"malformed manifest line: {line!r}") from None
        expected[rel.strip()] = digest
    return expected


def source_revision() -> str:
    """The pinned revision string recorded in the assets manifest."""
    text = (_asset_root() / "manifest.sum").read_text(encoding="utf-8")
    for line in text.splitlines():
        if line.startswith("# source-revision:"):
            return line.split(":", 1)[1].strip()
    raise AssetError("assets manifest records no source revision")


def load_assets() -> dict[str, PromptAsset]:
    """Load and verify all 17 rule assets, keyed by id.

    Fails closed: a missing file, a digest mismatch, or an unexpected
    id set raises AssetError rather than returning a partial set.
    """
    expected = _read_manifest()
    root = _asset_root()
    assets: dict[str, PromptAsset] = {}
    for asset_id in ALL_IDS:
        rel = f"commandments/{asset_id}.md"
        if rel not in expected:
            raise AssetError(f"asset {rel} not listed in manifest.sum")
        try:
            raw = (root / rel).read_bytes()
        except FileNotFoundError:
            raise AssetError(f"asset {rel} missing") from None
        digest = hashlib.sha256(raw).hexdigest()
        if digest != expected[rel]:
            raise AssetError(f"asset {rel} digest mismatch: content was altered")
        text = raw.decode("utf-8")
        first, _, rest = text.partition("\n")
        prefix = f"# {asset_id}. "
        if not first.startswith(prefix):
            raise AssetError(f"asset {rel} has malformed heading: {first!r}")
        title = first[len(prefix):].strip()
        body = rest.lstrip("\n").rstrip("\n")
        if not body:
            raise AssetError(f"asset {rel} has an empty body")
        assets[asset_id] = PromptAsset(id=asset_id, title=title, body=body, digest=digest)
    extras = set(expected) - {f"commandments/{i}.md" for i in ALL_IDS}
    if extras:
        raise AssetError(f"manifest lists unknown assets: {sorted(extras)}")
    return assets


def domain_ids(domain: str) -> tuple[str, ...]:
    if domain == "compute":
        return COMPUTE_IDS
    if domain == "math":
        return MATH_IDS
    raise ValueError(f"unknown domain {domain!r}: expected 'compute' or 'math'")
