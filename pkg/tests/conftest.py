"""Shared fixtures: a session-wide cache of diagonalized chains, since several
test modules probe the same parameter points.  Large systems (N > 12) are not
cached; their eigenvector sets run to hundreds of MB."""

from __future__ import annotations

import pytest

from spinchain_otoc import ChainSpec, EigenSystem, build_hamiltonian, diagonalize

CACHE_SITE_LIMIT = 12


@pytest.fixture(scope="session")
def eigensystems():
    cache: dict = {}

    def get(n: int, jz: float, h: float = 0.0, boundary: str | None = None,
            site_cap: int = 14) -> EigenSystem:
        key = (n, jz, h, boundary, site_cap)
        if key in cache:
            return cache[key]
        spec = ChainSpec(n_sites=n, jz_over_j=jz, h_over_j=h,
                         boundary=boundary, site_cap=site_cap)
        es = diagonalize(build_hamiltonian(spec))
        if n <= CACHE_SITE_LIMIT:
            cache[key] = es
        return es

    return get
