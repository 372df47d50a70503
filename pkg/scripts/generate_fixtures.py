"""Regenerate the FCIDUMP fixtures under ``fixtures/``.

Needs PySCF, which the package itself never imports. Each fixture is a
``<name>.fcidump`` file plus a ``<name>.json`` sidecar holding the reference
values printed by PySCF (RHF energy, lowest two FCI roots of the
(N, Sz=0) sector, canonical orbital energies).

    python scripts/generate_fixtures.py [--out fixtures]
"""

import argparse
import json
from pathlib import Path

import numpy as np
from pyscf import ao2mo, fci, gto, scf
from pyscf.tools import fcidump


def _linear_chain(symbol, n, d):
    return [(symbol, (0.0, 0.0, i * d)) for i in range(n)]


GEOMETRIES = {
    "h2": lambda d: _linear_chain("H", 2, d),
    "h4": lambda d: _linear_chain("H", 4, d),
    "h6": lambda d: _linear_chain("H", 6, d),
    "lih": lambda d: [("Li", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, d))],
    "beh2": lambda d: [("H", (0.0, 0.0, -d)), ("Be", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, d))],
}


def _grid(start, stop, step):
    return [round(x, 4) for x in np.arange(start, stop + step / 2, step)]


GRIDS = {
    "h2": [0.5, 0.7414, 1.0, 1.5, 2.0, 2.5],
    "h4": sorted(set(_grid(0.4, 3.0, 0.1) + [0.75])),
    "h6": _grid(0.5, 3.0, 0.25),
    "lih": _grid(0.5, 4.0, 0.25),
    "beh2": _grid(0.5, 4.0, 0.5),
}


def build(name, d, out_dir):
    mol = gto.M(atom=GEOMETRIES[name](d), basis="sto-3g", unit="Angstrom", verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.max_cycle = 500
    e_hf = mf.kernel()
    if not mf.converged:
        mf = scf.newton(mf)
        e_hf = mf.kernel()
    if not mf.converged:
        raise RuntimeError(f"RHF did not converge for {name} at {d}")

    norb = mf.mo_coeff.shape[1]
    h1 = mf.mo_coeff.T @ mf.get_hcore() @ mf.mo_coeff
    eri = ao2mo.restore(1, ao2mo.full(mol, mf.mo_coeff), norb)
    solver = fci.direct_spin1.FCI()
    solver.conv_tol = 1e-13
    solver.nroots = 4
    energies, _ = solver.kernel(h1, eri, norb, mol.nelectron, ecore=mol.energy_nuc())
    energies = np.sort(np.asarray(energies))
    e_gs = float(energies[0])
    excited = [float(e) for e in energies[1:] if e - e_gs > 1e-10]

    stem = f"{name}_{d:.4f}"
    fcidump.from_integrals(
        str(out_dir / f"{stem}.fcidump"), h1, eri, norb, mol.nelectron,
        nuc=mol.energy_nuc(), ms=0,
    )
    sidecar = {
        "molecule": name,
        "basis": "sto-3g",
        "bond_distance_angstrom": d,
        "hf_energy": float(e_hf),
        "fci_ground_energy": e_gs,
        "fci_first_excited_energy": excited[0] if excited else None,
        "orbital_energies": [float(e) for e in mf.mo_energy],
    }
    (out_dir / f"{stem}.json").write_text(json.dumps(sidecar, indent=2) + "\n")
    return stem, e_hf, e_gs


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "fixtures"))
    parser.add_argument("--molecules", nargs="*", default=list(GRIDS))
    args = parser.parse_args()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in args.molecules:
        for d in GRIDS[name]:
            stem, e_hf, e_gs = build(name, d, out_dir)
            print(f"{stem:16s} E_HF = {e_hf:.12f}  E_FCI = {e_gs:.12f}")


if __name__ == "__main__":
    main()
