"""Shared builders for the test suite."""

import numpy as np

from fair_nrm import Instance, ModelParams, NoiseSpec


def make_demo_instance(T=1000, gamma=(15.0, 12.0, 30.0), sigma=1.0) -> Instance:
    return Instance(
        A=[[1.0, 1.0], [3.0, 1.0], [0.0, 5.0]],
        gamma=list(gamma),
        price_lo=1.0,
        price_hi=5.0,
        T=T,
        params=ModelParams(alpha=[8.0, 9.0], B=[[-1.5, 0.0], [0.0, -3.0]]),
        noise=NoiseSpec(sigma=sigma, clip=1.0),
    )


def random_negative_definite(rng: np.random.Generator, n: int, scale: float = 2.0) -> np.ndarray:
    """Random matrix with strictly negative-definite symmetric part."""
    skew = rng.normal(size=(n, n))
    skew = 0.5 * (skew - skew.T)
    diag = -np.diag(rng.uniform(0.5, scale, size=n))
    rot = np.linalg.qr(rng.normal(size=(n, n)))[0]
    return rot @ diag @ rot.T + 0.3 * skew
