"""Two atoms where A can decay into B but B never influences A.

Run: ``python3 demos/two_atom.py``
"""

import numpy as np

from semicausal.choi import unvec, vec
from semicausal.quantum_semicausal import (check_semicausal_generator, extract_normal_form,
                                           reduced_generator, two_atom_example)
from semicausal.tensor_linalg import BipartiteSystem, expm, partial_trace


def main() -> None:
    sys2 = BipartiteSystem(2, 2)
    gkls, L_s = two_atom_example()
    rep = check_semicausal_generator(L_s, sys2, "schrodinger")
    print("The generator hands A's excitation to B and lets B decay on its own.")
    print(f"  semicausal residual      {rep.semicausal_residual:.1e}")
    print(f"  conditional CP min eig   {rep.min_cond_cp_eig:.1e}")
    print(f"  verdict                  {'semicausal' if rep.passed else 'rejected'}")

    nf, trace = extract_normal_form(gkls.heisenberg(), sys2)
    print(f"\nNormal form recovered with an environment of dimension {nf.d_E}.")
    print("A's reduced generator (Schroedinger picture, row-major vec):")
    print(np.array2string(reduced_generator(nf, "schrodinger").real, precision=3, suppress_small=True))

    print("\nA starts excited, B in the ground state. Whatever B does, A only sees decay:")
    print("     t    P_A(excited)   exp(-t)   P_B(excited)")
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[2, 2] = 1.0
    for t in (0.0, 0.5, 1.0, 2.0, 4.0):
        rho = unvec(expm(L_s, t) @ vec(rho0), 4, 4)
        pa = partial_trace(rho, sys2, "B")[1, 1].real
        pb = partial_trace(rho, sys2, "A")[1, 1].real
        print(f"  {t:4.1f}   {pa:12.6f}   {np.exp(-t):7.6f}   {pb:12.6f}")


if __name__ == "__main__":
    main()
