"""JSON fixtures for the worked examples.

``python -m qcontext.fixtures DIR`` regenerates the shipped ``fixtures/``
directory.
"""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from .channel import completely_random_channel
from .measure import make_joint, make_povm
from .mub import qubit_mub_triple
from .opcore import projector
from .serialize import dump_json, encode_channel, encode_context, encode_joint, encode_matrix, encode_povm
from .sharp_order import context_from_basis, make_sharp, standard_context

R2 = 1 / np.sqrt(2)
R3 = np.sqrt(3)

EXAMPLE1_PSI = [[R2, R2], [-R2, R2]]
EXAMPLE2_PSI = [[R3 / 2, 0.5], [-0.5, R3 / 2]]
EXAMPLE3_A = np.array([[0, 1], [1, 0]], dtype=complex)
EXAMPLE3_B = np.array([[0, 1j], [-1j, 0]], dtype=complex)
EXAMPLE4_A = np.array([[1, 0, 1], [0, 1, 0], [1, 0, 1]], dtype=complex)


def example5_matrix(a, b, c) -> np.ndarray:
    return np.array([[a, b], [c, a]], dtype=complex)


def build_fixtures() -> dict:
    std2 = standard_context(2)
    std3 = standard_context(3)
    ex1_b = context_from_basis(EXAMPLE1_PSI)
    ex2_b = context_from_basis(EXAMPLE2_PSI)
    triple = qubit_mub_triple()
    coarse3 = make_sharp([np.diag([1, 1, 0]), np.diag([0, 0, 1])])

    std_povm = make_povm(["0", "1"], list(std2.branches))
    diag_povm = make_povm(["+", "-"], list(ex1_b.branches))
    unsharp = make_povm(["yes", "no"], [np.diag([0.75, 0.25]), np.diag([0.25, 0.75])])
    # commuting sharp observables on C^3 and their product joint
    P = [np.diag([1, 0, 0]), np.diag([0, 1, 0]), np.diag([0, 0, 1])]
    Q = [np.diag([1, 1, 0]), np.diag([0, 0, 1])]
    joint = make_joint(["p1", "p2", "p3"], ["q1", "q2"],
                       {(f"p{j + 1}", f"q{k + 1}"): P[j] @ Q[k] for j in range(3) for k in range(2)})

    return {
        "identity2.json": encode_matrix(np.eye(2)),
        "std.json": encode_context(std2),
        "example1_A.json": encode_context(std2),
        "example1_B.json": encode_context(ex1_b),
        "example2_B.json": encode_context(ex2_b),
        "example3_A.json": encode_matrix(EXAMPLE3_A),
        "example3_B.json": encode_matrix(EXAMPLE3_B),
        "example3_AB.json": encode_matrix(EXAMPLE3_A @ EXAMPLE3_B),
        "example4_A.json": encode_matrix(EXAMPLE4_A),
        "example5_A.json": encode_matrix(example5_matrix(0.5, 1 - 2j, 0.25 + 1j)),
        "std3.json": encode_context(std3),
        "ctx3.json": encode_channel(std3),
        "coarse3.json": encode_channel(coarse3),
        "mub_triple_1.json": encode_context(triple[0]),
        "mub_triple_2.json": encode_context(triple[1]),
        "mub_triple_3.json": encode_context(triple[2]),
        "random_channel2.json": encode_channel(completely_random_channel(2)),
        "half_identity_pair.json": {"dim": 2, "branches": [encode_matrix(np.eye(2) * R2)] * 2},
        "doubled_identity.json": {"dim": 2, "branches": [encode_matrix(np.eye(2))] * 2},
        "rho_example2_psi1.json": encode_matrix(projector(EXAMPLE2_PSI[0])),
        "rho_mixed2.json": encode_matrix(np.eye(2) / 2),
        "povm_std2.json": encode_povm(std_povm),
        "povm_diag2.json": encode_povm(diag_povm),
        "povm_unsharp2.json": encode_povm(unsharp),
        "povm_bad2.json": {"dim": 2, "outcomes": ["a", "b"],
                           "effects": [encode_matrix(np.diag([0.5, 0.5])),
                                       encode_matrix(np.diag([0.25, 0.5]))]},
        "joint3.json": encode_joint(joint),
        "povm_p3.json": encode_povm(joint.marginal_x()),
        "povm_q3.json": encode_povm(joint.marginal_y()),
    }


def write_fixtures(directory) -> list:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, obj in build_fixtures().items():
        dump_json(obj, directory / name)
        written.append(name)
    return written


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "fixtures"
    for name in write_fixtures(target):
        print(Path(target) / name)
