"""Independent numpy reference for the test corpus in this directory.

Writes
  asym_q2.json      asymmetric fuzzy torus, q=2, k1 = 1, k2 = exp(0.4 h1)
  witness_form.json selfadjoint one-form whose plain fluctuation breaks eps'
  nu_2i.json        fuzzy 2-torus (q=2) with both twists set to 2*identity
  reference.json    frozen numbers the Rust tests compare against

Run from this directory:  python3 oracle.py
"""
import json

import numpy as np

s1 = np.array([[0, 1], [1, 0]], complex)
s2 = np.array([[0, -1j], [1j, 0]])
s3 = np.diag([1, -1]).astype(complex)
I2 = np.eye(2)


def P(q):
    p = np.zeros((q * q, q * q), complex)
    for i in range(q):
        for j in range(q):
            p[i + j * q, j + i * q] = 1
    return p


def L(a):
    return np.kron(np.eye(a.shape[0]), a)


def R(b):
    return np.kron(b.T, np.eye(b.shape[0]))


def ad(h):
    return L(h) - R(h)


def clock_shift(q, p=1):
    lam = np.exp(2j * np.pi * p / q)
    return np.diag([lam ** k for k in range(q)]), np.roll(np.eye(q), 1, axis=0).astype(complex)


def nrm(m):
    return np.linalg.norm(m, 2)


def herm_fn(m, f):
    w, v = np.linalg.eigh(m)
    return v @ np.diag(f(w)) @ v.conj().T


def mat(m):
    m = np.asarray(m, complex)
    return {
        "rows": m.shape[0],
        "cols": m.shape[1],
        "data": [[float(z.real), float(z.imag)] for z in m.reshape(-1)],
    }


def doc(gens, d, U, sign, gamma, gsign, eps_p, summands, provenance):
    return {
        "format_version": 1,
        "hilbert_dim": d.shape[0],
        "algebra": {"generators": [mat(g) for g in gens], "basis": None},
        "d": mat(d),
        "j": {"unitary": mat(U), "square_sign": sign},
        "grading": None if gamma is None else mat(gamma),
        "grading_sign": gsign,
        "epsilon_prime": eps_p,
        "multitwist": [{"d_ell": mat(dl), "nu_ell": mat(nu), "nu_bar_rep": None} for dl, nu in summands],
        "provenance": provenance,
    }


q = 2
C, S = clock_shift(q)
h1 = (C + C.conj().T) / 2
h2 = (S + S.conj().T) / 2
Pq = P(q)
gens = [np.kron(I2, L(C)), np.kron(I2, L(S))]
U = np.kron(1j * s2, Pq)
gamma = np.kron(s3, np.eye(q * q))
D1 = np.kron(s1, ad(h1))
D2 = np.kron(s2, ad(h2))
n = 2 * q * q


def conjJ(m):
    return U @ m.conj() @ U.conj().T


# asymmetric torus
k1 = np.eye(n)
k2 = np.kron(I2, L(herm_fn(h1, lambda w: np.exp(0.4 * w))))
Ds, nus = [], []
for k, d in ((k1, D1), (k2, D2)):
    K = conjJ(k)
    Ds.append(K @ d @ K)
    nus.append(np.linalg.inv(k) @ K)
asserts = "structural,mt_zero_order,mt_first_order,epsilon_prime,regularity,grading_twist"
asym = doc(gens, Ds[0] + Ds[1], U, -1, gamma, -1, 1, list(zip(Ds, nus)),
           f"builder=oracle.py asymmetric-torus q=2 p=1 k1=1 k2=exp(0.4*h1); asserts={asserts}")

# witness one-form: two random terms in 1 (x) L(M_2), symmetrized
rng = np.random.default_rng(20240611)
terms = []
for _ in range(2):
    a = rng.normal(size=(q, q)) + 1j * rng.normal(size=(q, q))
    b = rng.normal(size=(q, q)) + 1j * rng.normal(size=(q, q))
    terms.append((np.kron(I2, L(a)), np.kron(I2, L(b))))
omegas = []
for d in Ds:
    w = sum(a @ (d @ b - b @ d) for a, b in terms)
    omegas.append((w + w.conj().T) / 2)


def eps_rel(d, nu):
    lhs = d @ U @ nu.conj()
    rhs = nu @ U @ d.conj()
    return nrm(lhs - rhs) / max(nrm(d) * nrm(nu), 1.0)


plain = [eps_rel(d + w, nu) for d, w, nu in zip(Ds, omegas, nus)]
eps_pres = []
for d, w, nu in zip(Ds, omegas, nus):
    eps_pres.append(eps_rel(d + w + nu @ conjJ(w) @ nu, nu))
form = {
    "format_version": 1,
    "kind": "one_form",
    "symmetrize": True,
    "terms": [{"a": mat(a), "b": mat(b)} for a, b in terms],
}

# nu = 2I on the plain fuzzy 2-torus
two = 2 * np.eye(n)
bad = doc(gens, D1 + D2, U, -1, gamma, -1, 1, [(D1, two), (D2, two)],
          "builder=oracle.py fuzzy-torus2 q=2 p=1 twists=2I; asserts=structural,mt_zero_order,mt_first_order,epsilon_prime,regularity")

ref = {
    "asym_spectrum": sorted(float(x) for x in np.linalg.eigvalsh(Ds[0] + Ds[1])),
    "plain_eps_prime_relative": [float(x) for x in plain],
    "eps_preserving_eps_prime_relative": [float(x) for x in eps_pres],
    "torus2_q2_spectrum": sorted(float(x) for x in np.linalg.eigvalsh(D1 + D2)),
    "nu_2i_regularity_relative": float(nrm(two @ U @ two.conj() - U) / max(nrm(two) ** 2, 1.0)),
}

# small numat references
M = np.array([[(i + 2 * j) / (1 + i * j) + 1j * np.sin(i - j) for j in range(5)] for i in range(5)])
ref["opnorm_fixed5"] = float(nrm(M))
H = M + M.conj().T
ref["eigs_fixed5_hermitian"] = [float(x) for x in np.linalg.eigvalsh(H)]

for name, obj in (("asym_q2.json", asym), ("witness_form.json", form), ("nu_2i.json", bad), ("reference.json", ref)):
    with open(name, "w") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")
print(json.dumps(ref, indent=1))
