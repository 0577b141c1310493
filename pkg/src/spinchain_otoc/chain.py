"""Spin-1/2 chain description, magnetization sectors, and the XXZ Hamiltonian.

Basis convention: a configuration is a bit pattern, bit i = site i, bit value
1 = spin up (sigma_z eigenvalue +1).  Total magnetization S_z = n_up - n_down
is conserved, so the Hamiltonian is built as one dense block per S_z sector.
All energies are in units of J (times in 1/J).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import CapacityError, DomainError

# Dense full-spectrum diagonalization is the whole point here; beyond 14 sites
# the largest sector block (C(16,8) = 12870) stops being desk-scale.
DENSE_SITE_CAP = 14


class Boundary(str, Enum):
    OPEN = "open"
    PERIODIC = "periodic"


class PauliKind(str, Enum):
    SIGMA_X = "sigma_x"
    SIGMA_Y = "sigma_y"
    SIGMA_Z = "sigma_z"


def default_boundary(n_sites: int) -> Boundary:
    """Periodic for even chains, open for odd ones."""
    return Boundary.PERIODIC if n_sites % 2 == 0 else Boundary.OPEN


def bulk_site(n_sites: int) -> int:
    """Default observation site, farthest from open boundaries."""
    return n_sites // 2


@dataclass(frozen=True)
class ChainSpec:
    """Physical description of the chain; everything needed to build H."""

    n_sites: int
    jz_over_j: float
    h_over_j: float = 0.0
    boundary: Boundary | str | None = None
    energy_scale: float = 1.0
    site_cap: int = DENSE_SITE_CAP

    def __post_init__(self):
        if self.n_sites < 2:
            raise DomainError(f"n_sites must be >= 2, got {self.n_sites}")
        if self.n_sites > self.site_cap:
            raise CapacityError(
                f"n_sites={self.n_sites} exceeds dense cap {self.site_cap}"
            )
        if not self.energy_scale > 0:
            raise DomainError(f"energy_scale must be positive, got {self.energy_scale}")
        boundary = self.boundary
        if boundary is None:
            boundary = default_boundary(self.n_sites)
        else:
            try:
                boundary = Boundary(boundary)
            except ValueError:
                raise DomainError(f"unknown boundary {self.boundary!r}") from None
        object.__setattr__(self, "boundary", boundary)

    @property
    def dimension(self) -> int:
        return 2**self.n_sites

    @property
    def bonds(self) -> tuple[tuple[int, int], ...]:
        n = self.n_sites
        pairs = [(i, i + 1) for i in range(n - 1)]
        if self.boundary is Boundary.PERIODIC:
            pairs.append((n - 1, 0))
        return tuple(pairs)

    @property
    def bulk_site(self) -> int:
        return bulk_site(self.n_sites)


@dataclass(frozen=True)
class LocalOperatorSpec:
    """A single-site Pauli operator."""

    kind: PauliKind | str
    site: int

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", PauliKind(self.kind))
        except ValueError:
            raise DomainError(f"unknown Pauli kind {self.kind!r}") from None
        if self.site < 0:
            raise DomainError(f"site must be nonnegative, got {self.site}")

    def validate_for(self, spec: ChainSpec) -> None:
        if self.site >= spec.n_sites:
            raise DomainError(
                f"site {self.site} out of range for {spec.n_sites}-site chain"
            )


@dataclass(frozen=True)
class SectorBasis:
    """All configurations with a fixed magnetization S_z, sorted by encoding."""

    sz: int
    states: np.ndarray  # int64 bit patterns, strictly increasing

    @property
    def dimension(self) -> int:
        return len(self.states)

    def positions(self, configs: np.ndarray) -> np.ndarray:
        """Indices of the given bit patterns within this sector."""
        pos = np.searchsorted(self.states, configs)
        if np.any(pos >= len(self.states)) or np.any(self.states[pos] != configs):
            raise DomainError("configuration not in sector")
        return pos


def _popcount(values: np.ndarray) -> np.ndarray:
    return np.bitwise_count(values.astype(np.uint64)).astype(np.int64)


def build_sector_basis(spec: ChainSpec) -> list[SectorBasis]:
    """Partition all 2^N configurations into magnetization sectors."""
    n = spec.n_sites
    configs = np.arange(spec.dimension, dtype=np.int64)
    sz = 2 * _popcount(configs) - n
    sectors = []
    for label in range(-n, n + 1, 2):
        states = configs[sz == label]
        sectors.append(SectorBasis(sz=label, states=states))
    return sectors


@dataclass(frozen=True)
class HamiltonianBlocks:
    """The XXZ Hamiltonian as one dense real-symmetric block per sector."""

    spec: ChainSpec
    sectors: tuple[SectorBasis, ...]
    blocks: dict[int, np.ndarray] = field(repr=False)

    def sector(self, sz: int) -> SectorBasis:
        return self.sectors[(sz + self.spec.n_sites) // 2]


def build_hamiltonian(spec: ChainSpec, sectors: list[SectorBasis] | None = None) -> HamiltonianBlocks:
    """H/J = sum_bonds (sx sx + sy sy + (Jz/J) sz sz) + (h/J) sum_i sz_i.

    The XX+YY part flips each anti-aligned bond with amplitude 2; the rest is
    diagonal in the configuration basis.
    """
    if sectors is None:
        sectors = build_sector_basis(spec)
    n = spec.n_sites
    bonds = spec.bonds
    blocks: dict[int, np.ndarray] = {}
    for sector in sectors:
        states = sector.states
        dim = sector.dimension
        zbits = (((states[:, None] >> np.arange(n)[None, :]) & 1) * 2 - 1).astype(
            np.float64
        )
        diag = spec.h_over_j * zbits.sum(axis=1)
        for i, j in bonds:
            diag += spec.jz_over_j * zbits[:, i] * zbits[:, j]
        h = np.zeros((dim, dim), dtype=np.float64)
        h[np.diag_indices(dim)] = diag
        for i, j in bonds:
            anti = np.nonzero(zbits[:, i] != zbits[:, j])[0]
            flipped = states[anti] ^ ((1 << i) | (1 << j))
            target = sector.positions(flipped)
            # add.at: the N=2 periodic chain lists the same pair twice
            np.add.at(h, (target, anti), 2.0)
        blocks[sector.sz] = h
    return HamiltonianBlocks(spec=spec, sectors=tuple(sectors), blocks=blocks)


@dataclass(frozen=True)
class OperatorBlock:
    """One (target sector <- source sector) block of a local Pauli operator.

    Pauli action maps each source configuration to exactly one target, so the
    block is a scaled permutation stored as parallel index/amplitude arrays.
    """

    rows: np.ndarray
    cols: np.ndarray
    amps: np.ndarray
    shape: tuple[int, int]

    def apply_left(self, m: np.ndarray) -> np.ndarray:
        """Dense product (block @ m) for m with one row per source state."""
        dtype = np.result_type(self.amps.dtype, m.dtype)
        out = np.zeros((self.shape[0], m.shape[1]), dtype=dtype)
        out[self.rows] = self.amps[:, None] * m[self.cols]
        return out

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=self.amps.dtype)
        out[self.rows, self.cols] = self.amps
        return out


@dataclass(frozen=True)
class ConfigOperator:
    """A local Pauli operator in the configuration basis, sector-blocked.

    sigma_z produces diagonal (S_z -> S_z) blocks only; sigma_x / sigma_y
    connect S_z to S_z +- 2 (one flipped spin).
    """

    op_spec: LocalOperatorSpec
    blocks: dict[tuple[int, int], OperatorBlock] = field(repr=False)

    @property
    def hermitian(self) -> bool:
        return True


def build_local_operator(spec: ChainSpec, op: LocalOperatorSpec,
                         sectors: list[SectorBasis] | None = None) -> ConfigOperator:
    """Sector-blocked matrix of a single-site Pauli operator."""
    op.validate_for(spec)
    if sectors is None:
        sectors = build_sector_basis(spec)
    by_label = {s.sz: s for s in sectors}
    site_mask = 1 << op.site
    blocks: dict[tuple[int, int], OperatorBlock] = {}
    for sector in sectors:
        states = sector.states
        dim = sector.dimension
        if op.kind is PauliKind.SIGMA_Z:
            amps = (((states >> op.site) & 1) * 2 - 1).astype(np.float64)
            idx = np.arange(dim)
            blocks[(sector.sz, sector.sz)] = OperatorBlock(
                rows=idx, cols=idx, amps=amps, shape=(dim, dim)
            )
            continue
        bit = ((states >> op.site) & 1).astype(bool)
        for value, delta in ((False, +2), (True, -2)):
            target_label = sector.sz + delta
            if target_label not in by_label:
                continue
            cols = np.nonzero(bit == value)[0]
            if len(cols) == 0:
                continue
            target = by_label[target_label]
            rows = target.positions(states[cols] ^ site_mask)
            if op.kind is PauliKind.SIGMA_X:
                amps = np.ones(len(cols), dtype=np.float64)
            else:  # sigma_y: down->up carries -i, up->down carries +i
                amps = np.full(len(cols), -1j if value is False else 1j,
                               dtype=np.complex128)
            blocks[(target_label, sector.sz)] = OperatorBlock(
                rows=rows, cols=cols, amps=amps,
                shape=(target.dimension, dim),
            )
    return ConfigOperator(op_spec=op, blocks=blocks)
