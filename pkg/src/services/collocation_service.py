from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from more_itertools import chunked

from hcsp.errors import ConfigurationError


@dataclass(frozen=True)
class CollocationPoints:
    t: np.ndarray
    x: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return int(self.t.shape[0])

    def subset(self, index) -> "CollocationPoints":
        index = np.asarray(index)
        return CollocationPoints(t=self.t[index], x=None if self.x is None else self.x[index])


def sample_collocation(
    window: tuple[float, float], domain: Optional[tuple[float, float]], n: int, seed: int
) -> CollocationPoints:
    """n puntos uniformes en ventana x dominio (solo ventana para la EDO), reproducibles por semilla."""
    if n < 1:
        raise ConfigurationError(f"se necesita al menos un punto de colocación, no {n}")
    rng = np.random.default_rng(seed)
    t = rng.uniform(window[0], window[1], size=n)
    x = None if domain is None else rng.uniform(domain[0], domain[1], size=n)
    return CollocationPoints(t=t, x=x)


def iter_minibatches(points: CollocationPoints, batch_size: int, seed: int) -> Iterator[CollocationPoints]:
    """
    Recorre lotes de una permutación barajada en cada época, indefinidamente.
    Con batch_size >= len(points) devuelve siempre el conjunto completo.
    """
    if batch_size >= len(points):
        while True:
            yield points
    rng = np.random.default_rng(seed)
    while True:
        for chunk in chunked(rng.permutation(len(points)), batch_size):
            yield points.subset(chunk)
