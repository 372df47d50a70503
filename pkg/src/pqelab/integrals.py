"""FCIDUMP ingestion and spin-orbital integrals.

Spatial orbital ``P`` becomes spin-orbitals ``2P`` (alpha) and ``2P + 1``
(beta). Two-body integrals are stored in physicists' ordering so that

    H = sum_pq h[p, q] a+_p a_q + 1/2 sum_pqrs v[p, q, r, s] a+_p a+_q a_s a_r

with ``v[p, q, r, s] = <pq|rs> = (pr|qs)``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class FcidumpError(ValueError):
    """Base class for FCIDUMP ingestion failures."""


class FcidumpHeaderError(FcidumpError):
    pass


class FcidumpParseError(FcidumpError):
    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class FcidumpValidationError(FcidumpError):
    pass


@dataclass(frozen=True, eq=False)
class SpinOrbitalIntegrals:
    """One- and two-body coefficients over ``m`` real spin-orbitals.

    Attributes
    ----------
    m : int
        Number of spin-orbitals.
    n_electrons : int
    e_core : float
        Constant energy offset (nuclear repulsion, frozen core), Hartree.
    h : ndarray, shape (m, m)
    v : ndarray, shape (m, m, m, m)
        Physicists' ordering ``<pq|rs>``.
    orbital_energies : ndarray, shape (m,)
    ms2 : int
        Twice the Sz of the target sector.
    metadata : dict
        Sidecar values (reference energies, bond distance), possibly empty.
    """

    m: int
    n_electrons: int
    e_core: float
    h: np.ndarray
    v: np.ndarray
    orbital_energies: np.ndarray
    ms2: int = 0
    metadata: dict = field(default_factory=dict)

    @property
    def norb(self):
        return self.m // 2

    @property
    def occupied(self):
        return tuple(range(self.n_electrons))

    @property
    def virtual(self):
        return tuple(range(self.n_electrons, self.m))


def spatial_to_spin(h_spatial, eri_spatial):
    """Expand spatial integrals (chemists' ``(ij|kl)``) to spin-orbital form.

    Returns ``(h, v)`` with ``v`` in physicists' ordering.
    """
    h_spatial = np.asarray(h_spatial, dtype=float)
    eri_spatial = np.asarray(eri_spatial, dtype=float)
    norb = h_spatial.shape[0]
    m = 2 * norb
    spin = np.arange(m) % 2
    same = (spin[:, None] == spin[None, :]).astype(float)

    h = np.kron(h_spatial, np.eye(2))
    # (PR|QS) on spin labels, then the two spin deltas
    idx = np.arange(m) // 2
    chem = eri_spatial[np.ix_(idx, idx, idx, idx)]  # (pr|qs) indexed [p, r, q, s]
    v = chem.transpose(0, 2, 1, 3) * same[:, None, :, None] * same[None, :, None, :]
    return h, v


def spin_to_spatial(h, v):
    """Contract spin-orbital integrals back to spatial chemists' form."""
    h_spatial = np.asarray(h)[0::2, 0::2].copy()
    # alpha-alpha-alpha-alpha block, physicists' -> chemists'
    eri = np.asarray(v)[0::2, 0::2, 0::2, 0::2].transpose(0, 2, 1, 3).copy()
    return h_spatial, eri


def hartree_fock_orbital_energies(h, v, n_electrons):
    """Diagonal of the Fock matrix built on the lowest ``n_electrons`` spin-orbitals."""
    occ = np.arange(n_electrons)
    diag = np.diagonal(h).copy()
    if n_electrons:
        pi = np.arange(h.shape[0])
        coulomb = v[pi[:, None], occ[None, :], pi[:, None], occ[None, :]]
        exchange = v[pi[:, None], occ[None, :], occ[None, :], pi[:, None]]
        diag += (coulomb - exchange).sum(axis=1)
    return diag


def hf_energy(ints):
    """Energy of the reference determinant occupying the lowest spin-orbitals."""
    occ = np.arange(ints.n_electrons)
    if occ.size == 0:
        return float(ints.e_core)
    one = np.trace(ints.h[np.ix_(occ, occ)])
    sub = ints.v[np.ix_(occ, occ, occ, occ)]
    coulomb = np.einsum("ijij->", sub)
    exchange = np.einsum("ijji->", sub)
    return float(ints.e_core + one + 0.5 * (coulomb - exchange))


_HEADER_KEY = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=")


def _parse_header(header):
    body = re.sub(r"&FCI|&END", " ", header, flags=re.I).replace("/", " ")
    keys = list(_HEADER_KEY.finditer(body))
    values = {}
    for k, match in enumerate(keys):
        stop = keys[k + 1].start() if k + 1 < len(keys) else len(body)
        raw = body[match.end():stop]
        values[match.group(1).upper()] = [tok for tok in re.split(r"[,\s]+", raw) if tok]
    for key in ("NORB", "NELEC"):
        if key not in values or not values[key]:
            raise FcidumpHeaderError(f"FCIDUMP header lacks {key}")
    try:
        norb = int(values["NORB"][0])
        nelec = int(values["NELEC"][0])
        ms2 = int(values.get("MS2", ["0"])[0])
    except ValueError as exc:
        raise FcidumpHeaderError(f"non-integer header value: {exc}") from None
    if norb <= 0 or nelec < 0 or nelec > 2 * norb:
        raise FcidumpHeaderError(f"inconsistent header NORB={norb} NELEC={nelec}")
    return norb, nelec, ms2


def parse_fcidump(text, sidecar=None):
    """Parse FCIDUMP text into :class:`SpinOrbitalIntegrals`.

    Parameters
    ----------
    text : str
        Contents of the FCIDUMP file.
    sidecar : dict, optional
        Parsed sidecar metadata. Its ``orbital_energies`` entry (spatial,
        one per orbital) is used when present; otherwise orbital energies
        are the Fock diagonal of the reference determinant.
    """
    lines = text.splitlines()
    end = None
    for i, line in enumerate(lines):
        if re.search(r"&END|^\s*/\s*$", line, flags=re.I):
            end = i
            break
    if end is None:
        raise FcidumpHeaderError("FCIDUMP header is not terminated by &END or /")
    norb, nelec, ms2 = _parse_header("\n".join(lines[: end + 1]))

    h_spatial = np.zeros((norb, norb))
    eri = np.zeros((norb, norb, norb, norb))
    e_core = 0.0
    for lineno, line in enumerate(lines[end + 1:], start=end + 2):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 5:
            raise FcidumpParseError(lineno, f"expected 'value i j k l', got {line.strip()!r}")
        try:
            value = float(fields[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(tok) for tok in fields[1:])
        except ValueError:
            raise FcidumpParseError(lineno, f"malformed record {line.strip()!r}") from None
        if any(x < 0 or x > norb for x in (i, j, k, l)):
            raise FcidumpValidationError(
                f"line {lineno}: orbital index out of range 1..{norb} in {line.strip()!r}"
            )
        if i == j == k == l == 0:
            e_core += value
        elif j == k == l == 0:
            # orbital-energy record, carries no Hamiltonian term
            continue
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise FcidumpValidationError(f"line {lineno}: zero index in one-body record")
            h_spatial[i - 1, j - 1] = h_spatial[j - 1, i - 1] = value
        elif i == 0 or j == 0 or k == 0 or l == 0:
            raise FcidumpValidationError(f"line {lineno}: zero index in two-body record")
        else:
            a, b, c, d = i - 1, j - 1, k - 1, l - 1
            for p, q, r, s in (
                (a, b, c, d), (b, a, c, d), (a, b, d, c), (b, a, d, c),
                (c, d, a, b), (d, c, a, b), (c, d, b, a), (d, c, b, a),
            ):
                eri[p, q, r, s] = value

    h, v = spatial_to_spin(h_spatial, eri)
    metadata = dict(sidecar or {})
    if metadata.get("orbital_energies") is not None:
        eps_spatial = np.asarray(metadata["orbital_energies"], dtype=float)
        if eps_spatial.shape != (norb,):
            raise FcidumpValidationError(
                f"sidecar orbital_energies has {eps_spatial.size} entries, expected {norb}"
            )
        eps = np.repeat(eps_spatial, 2)
    else:
        eps = hartree_fock_orbital_energies(h, v, nelec)
    return SpinOrbitalIntegrals(
        m=2 * norb,
        n_electrons=nelec,
        e_core=e_core,
        h=h,
        v=v,
        orbital_energies=eps,
        ms2=ms2,
        metadata=metadata,
    )


def sidecar_path(path):
    return Path(path).with_suffix(".json")


def load_sidecar(path):
    side = sidecar_path(path)
    if not side.exists():
        return {}
    return json.loads(side.read_text())


def load_fcidump(path):
    """Read an FCIDUMP file and its ``.json`` sidecar (if any) from disk."""
    path = Path(path)
    return parse_fcidump(path.read_text(), sidecar=load_sidecar(path))
