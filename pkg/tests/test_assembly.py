import numpy as np
import pytest
import scipy.linalg as la
import sympy

from eigenbox import spaces
from eigenbox.assembly import METHODS, assemble, assemble_courant, dump_matrix
from eigenbox.eigensolve import solve_generalized
from eigenbox.mesh import build_lshape_mesh, build_square_mesh, uniform_red_refine
from eigenbox.potentials import harmonic, piecewise_constant, zero


def _sym_err(M):
    return abs(M - M.T).max() if M.nnz else 0.0


@pytest.mark.parametrize("method", METHODS)
def test_pairs_symmetric_and_definite(mesh32, method):
    pair = assemble(method, mesh32, piecewise_constant(np.linspace(0, 3, mesh32.nt)))
    assert _sym_err(pair.A) == 0 and _sym_err(pair.B) == 0
    assert np.linalg.eigvalsh(pair.A.toarray()).min() > 0
    bev = np.linalg.eigvalsh(pair.B.toarray())
    assert bev.min() > -1e-14
    assert np.sum(bev > 1e-12 * bev.max()) == pair.rank_b


def test_cr_two_triangles_by_hand(unit_square_2):
    # one interior edge: stiffness 2 * 4 |grad lambda|^2 |T| = 8, mass 2 |T| / 3 = 1/3
    pair = assemble("CR", unit_square_2, zero())
    assert np.allclose(pair.A.toarray(), [[8.0]])
    assert np.allclose(pair.B.toarray(), [[1 / 3]])
    assert np.isclose(solve_generalized(pair, 1).eigenvalues[0], 24.0)


def _charpoly_roots(A, B):
    """Exact rational characteristic polynomial det(A - x B) and its real roots."""
    As = sympy.Matrix(A.shape[0], A.shape[1], lambda i, j: sympy.nsimplify(A[i, j], rational=True, tolerance=1e-14))
    Bs = sympy.Matrix(B.shape[0], B.shape[1], lambda i, j: sympy.nsimplify(B[i, j], rational=True, tolerance=1e-14))
    x = sympy.Symbol("x")
    poly = sympy.Poly((As - x * Bs).det(), x)
    return sorted(float(r) for r in poly.nroots(n=30) if abs(sympy.im(r)) < 1e-20)


def test_cr_lshape_against_characteristic_polynomial():
    m = build_lshape_mesh(1.0, 2)  # five interior edges
    pair = assemble("CR", m, zero())
    assert pair.ndof == 5
    roots = _charpoly_roots(pair.A.toarray(), pair.B.toarray())
    lam = solve_generalized(pair, 5).eigenvalues
    assert np.allclose(lam, roots, rtol=1e-10)


def test_mcr_constant_potential_block(mesh32):
    c = 2.5
    V = piecewise_constant(np.full(mesh32.nt, c), offset=0.0)
    p0 = assemble("mCR", mesh32, zero())
    pc = assemble("mCR", mesh32, V)
    block = (pc.A - p0.A).toarray()
    # c times the Pi0 mass, whose rank is the number of triangles
    space = spaces.ecr_space(mesh32)
    means = np.zeros((space.ndof, mesh32.nt))
    ints = spaces.integrals(mesh32, space.local)
    for t in range(mesh32.nt):
        for mm in range(space.dofmap.shape[1]):
            if space.dofmap[t, mm] >= 0:
                means[space.dofmap[t, mm], t] += ints[t, mm]
    expect = c * means @ np.diag(1 / mesh32.areas) @ means.T
    assert np.allclose(block, expect, atol=1e-13)
    assert np.linalg.matrix_rank(block) == mesh32.nt


def test_scr_structure(mesh32):
    pair = assemble("sCR", mesh32, zero())
    npw = 4 * mesh32.nt
    B = pair.B.toarray()
    assert np.linalg.matrix_rank(B) == npw
    assert np.all(B[npw:] == 0) and np.all(B[:, npw:] == 0)
    assert pair.ndof - pair.rank_b == spaces.ecr_space(mesh32).ndof


def test_pi0_methods_reject_smooth_potential(mesh32):
    for method in ("RT", "mCR", "sCR"):
        with pytest.raises(ValueError):
            assemble(method, mesh32, harmonic())
    assemble("CR", mesh32, harmonic())
    assemble("eCR", mesh32, harmonic())


def test_unknown_method(mesh32):
    with pytest.raises(ValueError):
        assemble("dG", mesh32, zero())


def test_courant_upper_bound_and_shift():
    m = uniform_red_refine(build_square_mesh(0.5, 4, center=(0.5, 0.5)))
    lam0 = solve_generalized(assemble_courant(m, zero()), 3).eigenvalues
    assert lam0[0] >= 2 * np.pi**2
    c = 7.25
    lamc = solve_generalized(assemble_courant(m, piecewise_constant(np.full(m.nt, c), offset=0.0)), 3).eigenvalues
    assert np.allclose(lamc - lam0, c, rtol=0, atol=1e-9)


def test_harmonic_quadrature_exact(mesh32):
    # V = |x|^2/2 is quadratic, so its mass matrix is exact with the degree-10 rule;
    # compare with the closed-form fourth-moment product of the coefficient matrices
    m = mesh32
    s1 = spaces.s1_space(m)
    P = m.vertices[m.triangles]
    CV = 0.5 * (np.einsum("ti,tj->tij", P[..., 0], P[..., 0]) + np.einsum("ti,tj->tij", P[..., 1], P[..., 1]))
    # int V phi_m phi_n = int (lambda^T CV lambda)(lambda^T C_m lambda) ... needs degree 6: use triple product
    rule_free = np.einsum("tij,tmkl->tmijkl", CV, s1.local)
    from itertools import product
    from math import factorial
    E6 = np.empty((3,) * 6)
    for idx in product(range(3), repeat=6):
        a = np.bincount(idx, minlength=3)
        E6[idx] = 2.0 * np.prod([factorial(x) for x in a]) / factorial(8)
    loc = m.areas[:, None, None] * np.einsum("tmijkl,tnpq,ijklpq->tmn", rule_free, s1.local, E6, optimize=True)
    from eigenbox.assembly import local_potential_mass
    assert np.allclose(local_potential_mass(m, s1.local, harmonic()), loc, atol=1e-14)


def test_affine_patch_test(mesh32):
    # CR interpolation of a globally affine function is exact, hence its broken energy too
    m = mesh32
    f = lambda x: 2.0 * x[..., 0] - 3.0 * x[..., 1] + 0.5
    means = spaces.edge_means(m, f)
    c = means[m.tri_edges]  # local CR coefficients incl. boundary edges
    C = np.einsum("tj,jab->tab", c, np.stack([spaces.coef_cr(j) for j in range(3)]))
    en = spaces.energy_inner(m, C, C)
    assert np.isclose(en, 13.0 * m.areas.sum())
    vals = spaces.evaluate(C, np.eye(3))
    assert np.allclose(vals, f(m.vertices[m.triangles]))


def test_rt_spectrum_invariant_under_reordering(rng):
    m = uniform_red_refine(build_square_mesh(0.5, 2, center=(0.5, 0.5)))
    pair = assemble("RT", m, piecewise_constant(rng.uniform(0, 5, m.nt), offset=0.0))
    n = pair.ndof
    perm = rng.permutation(n)
    A, B = pair.A.toarray(), pair.B.toarray()
    lam = solve_generalized(pair, m.nt).eigenvalues
    lp = solve_generalized((A[np.ix_(perm, perm)], B[np.ix_(perm, perm)]), m.nt).eigenvalues
    assert np.allclose(lam, lp, rtol=1e-9)
    # dense oracle: finite eigenvalues of the full QZ problem
    w = la.eigvals(A, B)
    fin = np.sort(np.real(w[np.isfinite(w) & (np.abs(w) < 1e8)]))
    assert np.allclose(fin[:m.nt], lam, rtol=1e-9)


def test_dump_matrix(tmp_path, mesh32):
    pair = assemble("CR", mesh32, harmonic())
    path = tmp_path / "A.txt"
    dump_matrix(pair.A, path)
    lines = path.read_text().splitlines()
    n, _, nnz = map(int, lines[0].split())
    assert n == pair.ndof and nnz == len(lines) - 1
    data = np.loadtxt(lines[1:])
    M = np.zeros((n, n))
    M[data[:, 0].astype(int), data[:, 1].astype(int)] = data[:, 2]
    assert np.array_equal(M, pair.A.toarray())  # 17 digits round-trip exactly


def test_assembly_deterministic(mesh32):
    a = assemble("sCR", mesh32, zero()).A
    b = assemble("sCR", mesh32, zero()).A
    assert np.array_equal(a.data, b.data) and np.array_equal(a.indices, b.indices)
