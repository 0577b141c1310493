"""Independent brute-force oracles the tests compare the package against.

Everything here is deliberately naive: full 2^N kron matrices, literal
quadruple loops, dense spectral time evolution.  None of it shares code with
the package paths it checks.
"""

from __future__ import annotations

import numpy as np

# single-site matrices in (down, up) ordering: bit value 1 = up = sigma_z +1
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SZ = np.array([[-1, 0], [0, 1]], dtype=complex)
PAULI = {"sigma_x": SX, "sigma_y": SY, "sigma_z": SZ}


def dense_local(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """Operator on one site, site i = bit i (lowest bit is site 0)."""
    out = np.array([[1.0 + 0.0j]])
    for k in range(n - 1, -1, -1):
        out = np.kron(out, op if k == site else np.eye(2))
    return out


def dense_hamiltonian(n: int, jz: float, h: float, periodic: bool) -> np.ndarray:
    bonds = [(i, i + 1) for i in range(n - 1)]
    if periodic:
        bonds.append((n - 1, 0))
    ham = np.zeros((2**n, 2**n), dtype=complex)
    for i, j in bonds:
        ham += dense_local(SX, i, n) @ dense_local(SX, j, n)
        ham += dense_local(SY, i, n) @ dense_local(SY, j, n)
        ham += jz * (dense_local(SZ, i, n) @ dense_local(SZ, j, n))
    for i in range(n):
        ham += h * dense_local(SZ, i, n)
    return ham


def dense_otoc_dynamics(ham: np.ndarray, w: np.ndarray, v: np.ndarray,
                        psi0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """F(t) = <psi0| W(t)^dag V^dag W(t) V |psi0> via dense spectral evolution."""
    evals, evecs = np.linalg.eigh(ham)
    values = np.empty(len(times), dtype=complex)
    for k, t in enumerate(times):
        u = (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T
        wt = u.conj().T @ w @ u
        values[k] = psi0.conj() @ (wt.conj().T @ (v.conj().T @ (wt @ (v @ psi0))))
    return values


def literal_saturation_terms(set_of: np.ndarray, c: np.ndarray, b: np.ndarray,
                             w: np.ndarray, vdag: np.ndarray) -> dict[str, complex]:
    """Terms (i)-(iii) of the saturation value by explicit quadruple loops."""
    d = len(c)
    t1 = t2 = t3 = 0.0 + 0.0j
    for a in range(d):
        if c[a] == 0:
            continue
        ca = np.conj(c[a])
        for bt in range(d):
            if b[bt] == 0:
                continue
            weight = ca * b[bt]
            for g in range(d):
                wdag_ag = np.conj(w[g, a])
                if wdag_ag == 0:
                    continue
                for gp in range(d):
                    amp = weight * wdag_ag * vdag[g, gp] * w[gp, bt]
                    if amp == 0:
                        continue
                    same_ab = set_of[a] == set_of[bt]
                    same_ggp = set_of[g] == set_of[gp]
                    if same_ab and same_ggp:
                        t1 += amp
                    if set_of[a] == set_of[g] and set_of[bt] == set_of[gp]:
                        t2 += amp
                    if same_ab and same_ggp and set_of[a] == set_of[g]:
                        t3 += amp
    return {"i": t1, "ii": t2, "iii": t3}


def literal_term_iv(set_of: np.ndarray, set_energies: np.ndarray, c: np.ndarray,
                    b: np.ndarray, w: np.ndarray, vdag: np.ndarray,
                    tol: float) -> complex:
    """Resonant remainder by explicit loops: every set quadruple whose energy
    mismatch vanishes within tol, except the two patterns terms (i)-(iii)
    already count."""
    d = len(c)
    total = 0.0 + 0.0j
    for a in range(d):
        if c[a] == 0:
            continue
        for bt in range(d):
            if b[bt] == 0:
                continue
            for g in range(d):
                for gp in range(d):
                    t, tp, f, fp = set_of[a], set_of[bt], set_of[g], set_of[gp]
                    if t == tp and f == fp:
                        continue
                    if t == f and tp == fp:
                        continue
                    mismatch = (set_energies[tp] - set_energies[t]
                                + set_energies[f] - set_energies[fp])
                    if abs(mismatch) > tol:
                        continue
                    total += (np.conj(c[a]) * b[bt] * np.conj(w[g, a])
                              * vdag[g, gp] * w[gp, bt])
    return total


def literal_saturation(set_of, set_energies, c, b, w, vdag, tol=None) -> complex:
    terms = literal_saturation_terms(set_of, c, b, w, vdag)
    total = terms["i"] + terms["ii"] - terms["iii"]
    if tol is not None:
        total += literal_term_iv(set_of, set_energies, c, b, w, vdag, tol)
    return total
