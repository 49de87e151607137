"""Dataset curation: embedding, near-duplicate removal, diversity selection and splitting."""

import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from PIL import Image

from ..models.annotation import DatasetManifest, Split
from ..models.curation import Embedding, SplitSpec
from ..models.errors import ArtifactIOError, KTooLarge, ParseError, UnknownImage
from ..utils.parallel import ordered_map
from ..utils.raster import ensure_rgba, load_rgba
from ..utils.rng import seeded_rng
from .dataset_io import write_json


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

EMBED_SIDE = 32
DEFAULT_TAU = 0.05
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

# Guards floor(ratio * n) against products such as 0.143 * 1400 landing just below an integer
SPLIT_EPSILON = 1e-9

STRATEGIES = ('fps', 'mean_distance')


def embed(image: np.ndarray, image_name: str = "") -> Embedding:
    """Default embedding: 32x32 bilinear grayscale, mean-subtracted, L2-normalised.

    Constant images map to the zero vector with zero_variance set.
    """
    ensure_rgba(image)
    gray = image[:, :, :3].astype(np.float64) @ LUMA_WEIGHTS
    small = Image.fromarray(gray.astype(np.float32)).resize((EMBED_SIDE, EMBED_SIDE), Image.Resampling.BILINEAR)

    vector = np.asarray(small, dtype=np.float64).ravel()
    vector = vector - vector.mean()
    norm = float(np.linalg.norm(vector))
    if norm < 1e-12:
        return Embedding(vector=np.zeros(EMBED_SIDE * EMBED_SIDE), image_name=image_name, zero_variance=True)
    return Embedding(vector=vector / norm, image_name=image_name)


class EmbeddingProvider:
    """Computes embeddings from pixels with the default grayscale provider."""

    name = "grayscale32"

    def embed(self, image_name: str, image: Optional[np.ndarray] = None) -> Embedding:
        if image is None:
            raise ValueError(f"{self.name} provider needs pixels for {image_name}")
        return embed(image, image_name)


class PrecomputedEmbeddingProvider(EmbeddingProvider):
    """Serves embeddings from a cache file mapping image name to vector.

    Vectors are L2-normalised on load so externally computed features can be used directly.
    """

    name = "precomputed"

    def __init__(self, cache_path: PathLike):
        self.cache_path = Path(cache_path)
        self.vectors = load_embedding_cache(self.cache_path)

    def embed(self, image_name: str, image: Optional[np.ndarray] = None) -> Embedding:
        if image_name not in self.vectors:
            raise UnknownImage(f"No cached embedding for {image_name} in {self.cache_path}")
        return self.vectors[image_name]


def load_embedding_cache(path: PathLike) -> Dict[str, Embedding]:
    """Read a JSON object {image_name: [floats]}."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except OSError as e:
        raise ArtifactIOError(f"Cannot read embedding cache {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"Invalid embedding cache {path}: {e.msg}", line=e.lineno, column=e.colno) from e

    if not isinstance(data, dict):
        raise ParseError(f"Embedding cache {path} must be a JSON object")

    embeddings = {}
    dimension = None
    for name, values in data.items():
        vector = np.asarray(values, dtype=np.float64)
        if dimension is None:
            dimension = vector.shape[0]
        elif vector.shape[0] != dimension:
            raise ParseError(f"Embedding for {name} has dimension {vector.shape[0]}, expected {dimension}")
        norm = float(np.linalg.norm(vector))
        if norm < 1e-12:
            embeddings[name] = Embedding(np.zeros(dimension), name, zero_variance=True)
        else:
            embeddings[name] = Embedding(vector / norm, name)

    logger.info(f"Loaded {len(embeddings)} cached embeddings from {path}")
    return embeddings


def save_embedding_cache(embeddings: Sequence[Embedding], path: PathLike) -> None:
    write_json({e.image_name: e.vector.tolist() for e in embeddings}, path)


def _embed_file(task: Tuple[str, str]) -> Embedding:
    path, name = task
    return embed(load_rgba(path), name)


def embed_images(images_dir: PathLike, image_names: Sequence[str], jobs: int = 1) -> List[Embedding]:
    """Default embeddings of named images under images_dir, in input order."""
    images_dir = Path(images_dir)
    tasks = [(str(images_dir / name), name) for name in image_names]
    embeddings = ordered_map(_embed_file, tasks, jobs=jobs, chunksize=8)
    flagged = sum(1 for e in embeddings if e.zero_variance)
    if flagged:
        logger.warning(f"{flagged} images have zero variance and map to the zero vector")
    return embeddings


def _matrix(embeddings: Sequence[Embedding]) -> np.ndarray:
    if not embeddings:
        return np.empty((0, 0))
    dimension = embeddings[0].dimension
    for e in embeddings:
        if e.dimension != dimension:
            raise ValueError(f"Embedding {e.image_name} has dimension {e.dimension}, expected {dimension}")
    return np.stack([e.vector for e in embeddings])


def pairwise_distances(embeddings: Sequence[Embedding]) -> np.ndarray:
    """Euclidean distance matrix."""
    points = _matrix(embeddings)
    distances = np.zeros((len(points), len(points)))
    # Direct differences, one row at a time
    for index, point in enumerate(points):
        distances[index] = np.linalg.norm(points - point, axis=1)
    return distances


def dedup(embeddings: Sequence[Embedding], tau: float = DEFAULT_TAU) -> List[int]:
    """Greedy scan keeping an item iff it lies farther than tau from every kept item.

    Returns:
        Ascending indices of kept items
    """
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")

    points = _matrix(embeddings)
    kept: List[int] = []
    for index in range(len(points)):
        if kept:
            distances = np.linalg.norm(points[kept] - points[index], axis=1)
            if np.any(distances <= tau):
                continue
        kept.append(index)

    logger.info(f"Dedup at tau={tau}: kept {len(kept)} of {len(points)}")
    return kept


def select_diverse(embeddings: Sequence[Embedding], k: int, strategy: str = 'fps') -> List[int]:
    """Pick k diverse items.

    fps seeds with the item of largest mean distance to the rest, then keeps
    adding the item whose distance to the selection is largest. mean_distance
    ranks items by mean distance alone. Ties go to the lowest index.

    Returns:
        Selected indices in selection order

    Raises:
        KTooLarge: k exceeds the population
    """
    population = len(embeddings)
    if k > population:
        raise KTooLarge(f"Cannot select {k} items from {population}")
    if strategy not in STRATEGIES:
        raise ValueError(f"Unknown selection strategy: {strategy}")
    if k <= 0:
        return []

    distances = pairwise_distances(embeddings)
    mean_distance = distances.sum(axis=1) / max(population - 1, 1)

    if strategy == 'mean_distance':
        return [int(i) for i in np.argsort(-mean_distance, kind='stable')[:k]]

    selected = [int(np.argmax(mean_distance))]
    nearest = distances[selected[0]].copy()
    nearest[selected[0]] = -np.inf
    while len(selected) < k:
        chosen = int(np.argmax(nearest))
        selected.append(chosen)
        nearest = np.minimum(nearest, distances[chosen])
        nearest[selected] = -np.inf

    logger.info(f"Selected {k} of {population} items by {strategy}")
    return selected


def split_sizes(n: int, ratios: Tuple[float, float, float]) -> Tuple[int, int, int]:
    """(train, val, test) sizes: val and test floored, remainder to train."""
    val = math.floor(ratios[1] * n + SPLIT_EPSILON)
    test = math.floor(ratios[2] * n + SPLIT_EPSILON)
    return n - val - test, val, test


def split(manifest: DatasetManifest, spec: SplitSpec) -> Tuple[DatasetManifest, DatasetManifest, DatasetManifest]:
    """Shuffle with spec.seed and cut into disjoint train, val and test manifests."""
    spec.validate()
    n = len(manifest)
    n_train, n_val, _ = split_sizes(n, spec.ratios)
    order = seeded_rng(spec.seed).permutation(n)
    records = [manifest.records[i] for i in order]

    parts = (
        (Split.TRAIN, records[:n_train]),
        (Split.VAL, records[n_train:n_train + n_val]),
        (Split.TEST, records[n_train + n_val:])
    )
    result = tuple(
        manifest.derive(part, split=name, split_seed=spec.seed) for name, part in parts
    )
    logger.info(f"Split {n} records into {len(result[0])}/{len(result[1])}/{len(result[2])}")
    return result
