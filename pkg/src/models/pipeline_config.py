"""Structured pipeline configuration loaded from YAML."""

import hashlib
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml

from .curation import SplitSpec
from .errors import ArtifactIOError, ConfigError, ParseError
from .mixture import MixtureSpec
from .scene import CompositorParams, SceneConfig


OUTPUT_FORMATS = ('json', 'yolo', 'coco')
SELECTION_STRATEGIES = ('fps', 'mean_distance')


def _reject_unknown(cls, data: dict, section: str) -> None:
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"Unknown {section} key: {unknown[0]}")


@dataclass
class SpritesSection:
    """Sprite ingestion settings."""

    roots: List[str] = field(default_factory=list)
    stride: int = 12
    alpha_threshold: int = 0
    trim: bool = True
    catalog: str = "sprites/catalog.json"

    def validate(self) -> bool:
        if self.stride < 1:
            raise ValueError(f"sprites.stride must be at least 1, got {self.stride}")
        if not (0 <= self.alpha_threshold < 255):
            raise ValueError(f"sprites.alpha_threshold must lie in [0, 255), got {self.alpha_threshold}")
        return True

    @classmethod
    def from_dict(cls, data: dict) -> 'SpritesSection':
        _reject_unknown(cls, data, 'sprites')
        kwargs = dict(data)
        if 'roots' in kwargs:
            kwargs['roots'] = [str(r) for r in kwargs['roots'] or []]
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            'roots': list(self.roots),
            'stride': self.stride,
            'alpha_threshold': self.alpha_threshold,
            'trim': self.trim,
            'catalog': self.catalog
        }


@dataclass
class CurationSection:
    """Dedup, diversity selection and split settings."""

    tau: float = 0.05
    k: Optional[int] = None
    strategy: str = 'fps'
    split_ratios: Tuple[float, float, float] = (0.714, 0.143, 0.143)
    seed: int = 0
    embedding_cache: Optional[str] = None

    def validate(self) -> bool:
        if self.tau < 0:
            raise ValueError(f"curation.tau must be nonnegative, got {self.tau}")
        if self.k is not None and self.k < 0:
            raise ValueError(f"curation.k must be nonnegative, got {self.k}")
        if self.strategy not in SELECTION_STRATEGIES:
            raise ValueError(f"curation.strategy must be one of {SELECTION_STRATEGIES}, got {self.strategy}")
        self.split_spec().validate()
        return True

    def split_spec(self) -> SplitSpec:
        return SplitSpec(ratios=tuple(float(r) for r in self.split_ratios), seed=self.seed)

    @classmethod
    def from_dict(cls, data: dict) -> 'CurationSection':
        _reject_unknown(cls, data, 'curation')
        kwargs = dict(data)
        if 'split_ratios' in kwargs:
            kwargs['split_ratios'] = tuple(float(r) for r in kwargs['split_ratios'])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            'tau': self.tau,
            'k': self.k,
            'strategy': self.strategy,
            'split_ratios': list(self.split_ratios),
            'seed': self.seed,
            'embedding_cache': self.embedding_cache
        }


@dataclass
class MixturesSection:
    """Mixture names and seeds; an empty spec list means the full strategy suite."""

    specs: List[str] = field(default_factory=list)
    seeds: List[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    total: int = 1000

    def validate(self) -> bool:
        for name in self.specs:
            MixtureSpec.from_name(name)
        if not self.seeds:
            raise ValueError("mixtures.seeds must not be empty")
        if self.total < 4:
            raise ValueError(f"mixtures.total must be at least 4, got {self.total}")
        return True

    @classmethod
    def from_dict(cls, data: dict) -> 'MixturesSection':
        _reject_unknown(cls, data, 'mixtures')
        kwargs = dict(data)
        if 'seeds' in kwargs:
            kwargs['seeds'] = [int(s) for s in kwargs['seeds']]
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {'specs': list(self.specs), 'seeds': list(self.seeds), 'total': self.total}


@dataclass
class OutputSection:
    """Where and in which annotation formats datasets are written."""

    root: str = "."
    formats: List[str] = field(default_factory=lambda: ['json', 'yolo'])
    backgrounds: Optional[str] = None

    def validate(self) -> bool:
        for fmt in self.formats:
            if fmt not in OUTPUT_FORMATS:
                raise ValueError(f"output.formats entries must be among {OUTPUT_FORMATS}, got {fmt}")
        return True

    @classmethod
    def from_dict(cls, data: dict) -> 'OutputSection':
        _reject_unknown(cls, data, 'output')
        return cls(**data)

    def to_dict(self) -> dict:
        return {'root': self.root, 'formats': list(self.formats), 'backgrounds': self.backgrounds}


@dataclass
class PipelineConfig:
    """Every pipeline setting; its digest stamps the provenance of produced manifests."""

    sprites: SpritesSection = field(default_factory=SpritesSection)
    scene: SceneConfig = field(default_factory=SceneConfig)
    compositor: CompositorParams = field(default_factory=CompositorParams)
    curation: CurationSection = field(default_factory=CurationSection)
    mixtures: MixturesSection = field(default_factory=MixturesSection)
    output: OutputSection = field(default_factory=OutputSection)
    master_seed: int = 0

    _SECTIONS = {
        'sprites': SpritesSection,
        'scene': SceneConfig,
        'compositor': CompositorParams,
        'curation': CurationSection,
        'mixtures': MixturesSection,
        'output': OutputSection
    }

    def validate(self) -> bool:
        """Validate every section."""
        try:
            self.sprites.validate()
            self.scene.validate()
            self.compositor.validate()
            self.curation.validate()
            self.mixtures.validate()
            self.output.validate()
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"Pipeline configuration invalid: {e}") from e
        return True

    def to_dict(self) -> dict:
        data = {name: getattr(self, name).to_dict() for name in self._SECTIONS}
        data['master_seed'] = self.master_seed
        return data

    @classmethod
    def from_dict(cls, data: Optional[dict]) -> 'PipelineConfig':
        """Build from nested sections; unknown keys raise ConfigError."""
        data = data or {}
        if not isinstance(data, dict):
            raise ConfigError("Pipeline configuration must be a mapping")

        unknown = sorted(set(data) - set(cls._SECTIONS) - {'master_seed'})
        if unknown:
            raise ConfigError(f"Unknown configuration section: {unknown[0]}")

        kwargs: Dict[str, Any] = {}
        for name, section_cls in cls._SECTIONS.items():
            section = data.get(name) or {}
            if not isinstance(section, dict):
                raise ConfigError(f"Section {name} must be a mapping")
            try:
                kwargs[name] = section_cls.from_dict(section)
            except ConfigError:
                raise
            except (TypeError, ValueError, KeyError) as e:
                raise ConfigError(f"Section {name} is malformed: {e}") from e

        kwargs['master_seed'] = int(data.get('master_seed', 0))
        return cls(**kwargs)

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> 'PipelineConfig':
        """Load a YAML pipeline file."""
        path = Path(path)
        try:
            text = path.read_text(encoding='utf-8')
        except OSError as e:
            raise ArtifactIOError(f"Cannot read config {path}: {e}") from e

        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, 'problem_mark', None)
            raise ParseError(
                f"Invalid YAML in {path}",
                line=mark.line + 1 if mark else None,
                column=mark.column + 1 if mark else None
            ) from e

        config = cls.from_dict(data)
        config.validate()
        return config

    def digest(self) -> str:
        """SHA-256 of the canonical JSON of the effective configuration."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()
