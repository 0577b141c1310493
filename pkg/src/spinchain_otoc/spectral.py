"""Sector-wise diagonalization, degenerate-set bookkeeping, and eigenbasis operators.

Global eigenindices sort all sector eigenvalues ascending, so degenerate sets
are contiguous index ranges.  Operators in the eigenbasis stay sector-blocked;
nothing ever materializes the full 2^N x 2^N matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, ConfigOperator, HamiltonianBlocks, LocalOperatorSpec, SectorBasis
from .errors import DomainError, NumericError

# Relative spread below which two levels count as degenerate by default: far
# above eigensolver noise, far below physical finite-size gaps at N <= 14.
DEFAULT_DEG_RTOL = 1e-9
EIGEN_RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True)
class DegeneratePartition:
    """Partition of the sorted spectrum into degenerate sets.

    Sets are contiguous global-index ranges [offsets[k], offsets[k+1]); set
    labels theta are 1-based with theta=1 the ground set.
    """

    offsets: np.ndarray  # (K+1,) int
    set_of: np.ndarray  # (D,) int, 0-based set index per global eigenindex
    set_energies: np.ndarray  # (K,) mean energy per set
    tol: float

    @property
    def n_sets(self) -> int:
        return len(self.offsets) - 1

    def size(self, k: int) -> int:
        return int(self.offsets[k + 1] - self.offsets[k])

    def indices(self, k: int) -> np.ndarray:
        return np.arange(self.offsets[k], self.offsets[k + 1])

    def slice_of(self, k: int) -> slice:
        return slice(int(self.offsets[k]), int(self.offsets[k + 1]))

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def ground(self) -> slice:
        return self.slice_of(0)


def group_degenerate(energies: np.ndarray, tol_deg: float) -> DegeneratePartition:
    """Greedy gap partition: a new set starts wherever E_{k+1} - E_k > tol_deg."""
    if not tol_deg > 0:
        raise DomainError(f"tol_deg must be positive, got {tol_deg}")
    energies = np.asarray(energies, dtype=np.float64)
    if energies.ndim != 1 or len(energies) == 0:
        raise DomainError("energies must be a nonempty 1-d array")
    if np.any(np.diff(energies) < 0):
        raise DomainError("energies must be sorted ascending")
    gaps = np.diff(energies)
    starts = np.concatenate(([0], np.nonzero(gaps > tol_deg)[0] + 1, [len(energies)]))
    set_of = np.zeros(len(energies), dtype=np.int64)
    set_of[starts[1:-1]] = 1
    set_of = np.cumsum(set_of)
    set_energies = np.array(
        [energies[a:b].mean() for a, b in zip(starts[:-1], starts[1:])]
    )
    return DegeneratePartition(
        offsets=starts.astype(np.int64),
        set_of=set_of,
        set_energies=set_energies,
        tol=float(tol_deg),
    )


def width_capped_partition(energies: np.ndarray, tol_deg: float) -> DegeneratePartition:
    """Partition where each set spans at most tol_deg in energy.

    Used for window-resolved grouping: an average over a window T cannot
    resolve pairs closer than pi/(2T), but greedy gap chaining would let set
    widths grow unboundedly in a dense spectrum, merging pairs the window does
    resolve.  Exactly equal energies always stay in one set.
    """
    if not tol_deg > 0:
        raise DomainError(f"tol_deg must be positive, got {tol_deg}")
    energies = np.asarray(energies, dtype=np.float64)
    if np.any(np.diff(energies) < 0):
        raise DomainError("energies must be sorted ascending")
    starts = [0]
    anchor = energies[0]
    for k in range(1, len(energies)):
        if energies[k] - anchor > tol_deg:
            starts.append(k)
            anchor = energies[k]
    starts.append(len(energies))
    offsets = np.array(starts, dtype=np.int64)
    set_of = np.zeros(len(energies), dtype=np.int64)
    set_of[offsets[1:-1]] = 1
    set_of = np.cumsum(set_of)
    set_energies = np.array(
        [energies[a:b].mean() for a, b in zip(offsets[:-1], offsets[1:])]
    )
    return DegeneratePartition(
        offsets=offsets, set_of=set_of, set_energies=set_energies, tol=float(tol_deg)
    )


def singleton_partition(energies: np.ndarray) -> DegeneratePartition:
    """Every eigenindex its own set: the nondegenerate-spectrum assumption."""
    d = len(energies)
    return DegeneratePartition(
        offsets=np.arange(d + 1, dtype=np.int64),
        set_of=np.arange(d, dtype=np.int64),
        set_energies=np.asarray(energies, dtype=np.float64).copy(),
        tol=0.0,
    )


def window_tolerance(window: float) -> float:
    """Degeneracy tolerance pi/(2T): levels closer than this have not dephased
    within an averaging window T."""
    if not window > 0:
        raise DomainError(f"averaging window must be positive, got {window}")
    return np.pi / (2.0 * window)


@dataclass
class StateVector:
    """Coefficients c_alpha in the global eigenbasis."""

    coefficients: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))


class EigenSystem:
    """Sector-resolved spectral decomposition of an XXZ Hamiltonian."""

    def __init__(self, hamiltonian: HamiltonianBlocks, tol_deg: float | None = None,
                 validate: bool = True):
        self.chain: ChainSpec = hamiltonian.spec
        self.sectors: tuple[SectorBasis, ...] = hamiltonian.sectors
        self.vectors: dict[int, np.ndarray] = {}
        energies_parts = []
        labels_parts = []
        for sector in self.sectors:
            block = hamiltonian.blocks[sector.sz]
            w, u = np.linalg.eigh(block)
            _fix_gauge(u)
            if validate:
                _check_residual(block, w, u, sector.sz)
            self.vectors[sector.sz] = u
            energies_parts.append(w)
            labels_parts.append(np.full(len(w), sector.sz, dtype=np.int64))
        energies = np.concatenate(energies_parts)
        labels = np.concatenate(labels_parts)
        positions = np.concatenate([np.arange(len(w), dtype=np.int64) for w in energies_parts])
        order = np.argsort(energies, kind="stable")
        self.energies: np.ndarray = energies[order]
        self.sector_of: np.ndarray = labels[order]
        self.pos_in_sector: np.ndarray = positions[order]
        # global index of each within-sector eigencolumn
        self.sector_global: dict[int, np.ndarray] = {}
        inverse = np.empty(len(order), dtype=np.int64)
        inverse[order] = np.arange(len(order))
        offset = 0
        for sector, w in zip(self.sectors, energies_parts):
            self.sector_global[sector.sz] = inverse[offset:offset + len(w)]
            offset += len(w)
        width = float(self.energies[-1] - self.energies[0])
        if tol_deg is None:
            tol_deg = DEFAULT_DEG_RTOL * width if width > 0 else 1e-12
        self.tol_deg: float = float(tol_deg)
        self._partitions: dict[tuple[str, float], DegeneratePartition] = {}
        self.partition: DegeneratePartition = self.partition_for(self.tol_deg)

    @property
    def dimension(self) -> int:
        return len(self.energies)

    def partition_for(self, tol: float, method: str = "gap") -> DegeneratePartition:
        key = (method, float(tol))
        if key not in self._partitions:
            if method == "gap":
                self._partitions[key] = group_degenerate(self.energies, tol)
            elif method == "width":
                self._partitions[key] = width_capped_partition(self.energies, tol)
            else:
                raise DomainError(f"unknown grouping method {method!r}")
        return self._partitions[key]

    def sector_basis(self, sz: int) -> SectorBasis:
        return self.sectors[(sz + self.chain.n_sites) // 2]

    def to_eigen(self, config_vec: np.ndarray) -> np.ndarray:
        """Expand a full 2^N configuration-space vector in the eigenbasis."""
        if len(config_vec) != self.chain.dimension:
            raise DomainError("configuration vector has wrong dimension")
        out = np.zeros(self.dimension, dtype=np.result_type(config_vec.dtype, np.float64))
        for sector in self.sectors:
            u = self.vectors[sector.sz]
            out[self.sector_global[sector.sz]] = u.T @ config_vec[sector.states]
        return out

    def to_config(self, eigen_vec: np.ndarray) -> np.ndarray:
        """Inverse of to_eigen."""
        if len(eigen_vec) != self.dimension:
            raise DomainError("eigenbasis vector has wrong dimension")
        out = np.zeros(self.chain.dimension, dtype=np.result_type(eigen_vec.dtype, np.float64))
        for sector in self.sectors:
            u = self.vectors[sector.sz]
            out[sector.states] = u @ eigen_vec[self.sector_global[sector.sz]]
        return out

    def eigenvector_config(self, global_index: int) -> np.ndarray:
        """One eigenvector as a full 2^N configuration-space vector."""
        sz = int(self.sector_of[global_index])
        pos = int(self.pos_in_sector[global_index])
        sector = self.sector_basis(sz)
        out = np.zeros(self.chain.dimension, dtype=np.float64)
        out[sector.states] = self.vectors[sz][:, pos]
        return out

    def ground_member_index(self, partition: DegeneratePartition | None = None) -> int:
        """Deterministic pick inside the ground set: the member with the largest
        amplitude on the lowest configuration the set touches at all."""
        part = partition if partition is not None else self.partition
        ground = np.arange(part.offsets[0], part.offsets[1])
        if len(ground) == 1:
            return int(ground[0])
        best_config = None
        amplitudes = []
        for g in ground:
            sz = int(self.sector_of[g])
            sector = self.sector_basis(sz)
            col = self.vectors[sz][:, int(self.pos_in_sector[g])]
            support = np.nonzero(np.abs(col) > 1e-12)[0]
            first = sector.states[support[0]] if len(support) else None
            amplitudes.append((col, sector.states))
            if first is not None and (best_config is None or first < best_config):
                best_config = first
        if best_config is None:
            return int(ground[0])
        best, best_amp = int(ground[0]), -1.0
        for g, (col, states) in zip(ground, amplitudes):
            pos = np.searchsorted(states, best_config)
            if pos < len(states) and states[pos] == best_config:
                a = abs(col[pos])
                if a > best_amp + 1e-15:
                    best, best_amp = int(g), a
        return best


def _fix_gauge(u: np.ndarray) -> None:
    """Make the largest-magnitude component of each eigenvector real positive."""
    lead = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[lead, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    u *= signs[None, :]


def _check_residual(block: np.ndarray, w: np.ndarray, u: np.ndarray, sz: int) -> None:
    scale = max(float(np.max(np.abs(w))), 1e-300) if len(w) else 1.0
    residual = block @ u - u * w[None, :]
    worst = float(np.max(np.linalg.norm(residual, axis=0))) if len(w) else 0.0
    if worst > EIGEN_RESIDUAL_RTOL * scale:
        raise NumericError(
            f"eigenpair residual {worst:.3e} exceeds tolerance in sector S_z={sz}"
        )


def diagonalize(hamiltonian: HamiltonianBlocks, tol_deg: float | None = None,
                validate: bool = True) -> EigenSystem:
    """Diagonalize every sector block and assemble the global eigensystem."""
    return EigenSystem(hamiltonian, tol_deg=tol_deg, validate=validate)


class OperatorMatrix:
    """A local observable in the eigenbasis, stored as cross-sector blocks.

    Only sector pairs connected by the operator's selection rule exist.  All
    vector arguments are in global eigenindex order.
    """

    def __init__(self, op_spec: LocalOperatorSpec, es: EigenSystem,
                 blocks: dict[tuple[int, int], np.ndarray], hermitian: bool = True):
        self.op_spec = op_spec
        self.es = es
        self.blocks = blocks
        self.hermitian = hermitian
        self._diag: np.ndarray | None = None
        self._total_entries = sum(b.size for b in blocks.values())

    @property
    def dtype(self) -> np.dtype:
        return np.result_type(*(b.dtype for b in self.blocks.values()))

    def matvec(self, x: np.ndarray, dagger: bool = False) -> np.ndarray:
        return self.matmat(x[:, None], dagger=dagger)[:, 0]

    def matmat(self, x: np.ndarray, dagger: bool = False) -> np.ndarray:
        """Block-wise product op @ x (or op^dagger @ x) in global coordinates.

        Rows of x that are entirely zero are pruned before each gemm; initial
        states confined to a few sectors then cost only those sectors' blocks.
        """
        es = self.es
        out = np.zeros((es.dimension, x.shape[1]), dtype=np.result_type(self.dtype, x.dtype))
        for (t, s), block in self.blocks.items():
            gathered = x[es.sector_global[t if dagger else s]]
            nz = np.flatnonzero(np.any(gathered, axis=1))
            if len(nz) == 0:
                continue
            target = es.sector_global[s if dagger else t]
            if 2 * len(nz) < gathered.shape[0]:
                sub = block[nz, :] if dagger else block[:, nz]
                out[target] += _gemm_adj(sub, gathered[nz]) if dagger else _gemm(sub, gathered[nz])
            else:
                out[target] += _gemm_adj(block, gathered) if dagger else _gemm(block, gathered)
        return out

    def global_diagonal(self, dagger: bool = False) -> np.ndarray:
        if self._diag is None:
            diag = np.zeros(self.es.dimension, dtype=self.dtype)
            for (t, s), block in self.blocks.items():
                if t == s:
                    diag[self.es.sector_global[t]] = np.diagonal(block)
            self._diag = diag
        return np.conj(self._diag) if dagger else self._diag

    def elements(self, rows: np.ndarray, cols: np.ndarray, dagger: bool = False) -> np.ndarray:
        """Matrix elements at paired (rows[i], cols[i]) global positions."""
        if dagger:
            return np.conj(self.elements(cols, rows))
        es = self.es
        out = np.zeros(len(rows), dtype=self.dtype)
        n = es.chain.n_sites
        key = ((es.sector_of[rows] + n) // 2) * (n + 1) + (es.sector_of[cols] + n) // 2
        for k in np.unique(key):
            sel = np.nonzero(key == k)[0]
            t = int(es.sector_of[rows[sel[0]]])
            s = int(es.sector_of[cols[sel[0]]])
            block = self.blocks.get((t, s))
            if block is not None:
                out[sel] = block[es.pos_in_sector[rows[sel]], es.pos_in_sector[cols[sel]]]
        return out

    def subblock(self, rows: np.ndarray, cols: np.ndarray, dagger: bool = False) -> np.ndarray:
        """Dense sub-matrix at arbitrary global rows x cols."""
        if dagger:
            return self.subblock(cols, rows).conj().T
        es = self.es
        out = np.zeros((len(rows), len(cols)), dtype=self.dtype)
        row_secs = es.sector_of[rows]
        col_secs = es.sector_of[cols]
        for t in np.unique(row_secs):
            rsel = np.nonzero(row_secs == t)[0]
            rpos = es.pos_in_sector[rows[rsel]]
            for s in np.unique(col_secs):
                block = self.blocks.get((int(t), int(s)))
                if block is None:
                    continue
                csel = np.nonzero(col_secs == s)[0]
                cpos = es.pos_in_sector[cols[csel]]
                out[np.ix_(rsel, csel)] = block[np.ix_(rpos, cpos)]
        return out

    def dephased_matmat(self, x: np.ndarray, partition: DegeneratePartition,
                        dagger: bool = False) -> np.ndarray:
        """Product of the set-dephased operator sum_theta P_theta op P_theta with x.

        Singleton sets reduce to the global diagonal, pairs to vectorized 2x2
        blocks; large sets fall back to a masked full product.
        """
        out = np.zeros((len(x), x.shape[1]), dtype=np.result_type(self.dtype, x.dtype))
        offs = partition.offsets
        sizes = partition.sizes
        ones = np.nonzero(sizes == 1)[0]
        if len(ones):
            idx = offs[ones]
            out[idx] = self.global_diagonal(dagger)[idx, None] * x[idx]
        twos = np.nonzero(sizes == 2)[0]
        if len(twos):
            a = offs[twos]
            b = a + 1
            e_aa = self.elements(a, a, dagger)[:, None]
            e_ab = self.elements(a, b, dagger)[:, None]
            e_ba = self.elements(b, a, dagger)[:, None]
            e_bb = self.elements(b, b, dagger)[:, None]
            out[a] = e_aa * x[a] + e_ab * x[b]
            out[b] = e_ba * x[a] + e_bb * x[b]
        # beyond this, extraction cost |set|^2 competes with one masked full product
        cutoff = max(64, int(np.sqrt(self._total_entries)))
        for k in np.nonzero(sizes > 2)[0]:
            sl = partition.slice_of(k)
            m = sizes[k]
            if m <= cutoff:
                idx = np.arange(sl.start, sl.stop)
                out[sl] = self.subblock(idx, idx, dagger) @ x[sl]
            else:
                masked = np.zeros_like(x)
                masked[sl] = x[sl]
                out[sl] = self.matmat(masked, dagger)[sl]
        return out

    def dephased_matvec(self, x: np.ndarray, partition: DegeneratePartition,
                        dagger: bool = False) -> np.ndarray:
        return self.dephased_matmat(x[:, None], partition, dagger=dagger)[:, 0]


def _gemm(block: np.ndarray, x: np.ndarray) -> np.ndarray:
    # real blocks with complex right-hand sides: two real gemms beat one zgemm,
    # but only on contiguous buffers (.real of a complex array is strided)
    if block.dtype == np.float64 and np.iscomplexobj(x):
        return block @ np.ascontiguousarray(x.real) + 1j * (
            block @ np.ascontiguousarray(x.imag)
        )
    return block @ x


def _gemm_adj(block: np.ndarray, x: np.ndarray) -> np.ndarray:
    if block.dtype == np.float64 and np.iscomplexobj(x):
        return block.T @ np.ascontiguousarray(x.real) + 1j * (
            block.T @ np.ascontiguousarray(x.imag)
        )
    return block.conj().T @ x


def to_eigenbasis(config_op: ConfigOperator, es: EigenSystem) -> OperatorMatrix:
    """W_{alpha gamma} = <psi_alpha| W |psi_gamma>, block-wise per sector pair."""
    blocks: dict[tuple[int, int], np.ndarray] = {}
    for (t, s), cblock in config_op.blocks.items():
        if cblock.shape[1] != es.sector_basis(s).dimension:
            raise DomainError("operator dimensions do not match eigensystem")
        u_s = es.vectors[s]
        u_t = es.vectors[t]
        blocks[(t, s)] = u_t.conj().T @ cblock.apply_left(u_s)
    return OperatorMatrix(config_op.op_spec, es, blocks, hermitian=config_op.hermitian)


def project_state(state: StateVector, partition: DegeneratePartition, theta: int) -> StateVector:
    """Zero all coefficients outside degenerate set theta (1-based label)."""
    if theta < 1 or theta > partition.n_sets:
        raise DomainError(f"no degenerate set theta={theta}")
    out = np.zeros_like(state.coefficients)
    sl = partition.slice_of(theta - 1)
    out[sl] = state.coefficients[sl]
    return StateVector(coefficients=out)
