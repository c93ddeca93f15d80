import numpy as np
import pytest

from cmlab import (
    FreeParticle,
    Grid,
    GridMismatchError,
    HarmonicWell,
    MultiWell,
    Tabulated,
    build_hamiltonian,
    inner_product,
    reference_eigenpairs,
)


def test_dense_free_particle_dirichlet_stencil():
    g = Grid(1, (1.0,), (4,), "dirichlet")
    h = g.spacing[0]
    a = build_hamiltonian(g, FreeParticle()).materialize_dense()
    expected = np.diag(np.full(4, 1.0 / h**2))
    expected += np.diag(np.full(3, -0.5 / h**2), 1) + np.diag(np.full(3, -0.5 / h**2), -1)
    np.testing.assert_array_equal(a, expected)


def test_dense_free_particle_periodic_corners():
    g = Grid(1, (1.0,), (6,), "periodic")
    h = g.spacing[0]
    a = build_hamiltonian(g, FreeParticle()).materialize_dense()
    assert a[0, 5] == pytest.approx(-0.5 / h**2)
    assert a[5, 0] == pytest.approx(-0.5 / h**2)
    assert a[0, 1] == pytest.approx(-0.5 / h**2)
    assert a[0, 2] == 0.0


def test_harmonic_well_adds_to_diagonal():
    g = Grid(1, (1.0,), (8,), "dirichlet")
    free = build_hamiltonian(g, FreeParticle()).materialize_dense()
    well = build_hamiltonian(g, HarmonicWell(omega=1.0)).materialize_dense()
    x = g.coordinates()[:, 0]
    np.testing.assert_allclose(np.diag(well) - np.diag(free), 0.5 * (x - 0.5) ** 2, atol=1e-15)
    np.testing.assert_array_equal(well - np.diag(np.diag(well)), free - np.diag(np.diag(free)))


def test_apply_zero_is_zero():
    g = Grid(2, (1.0, 1.0), (8, 8), "dirichlet")
    H = build_hamiltonian(g, HarmonicWell(omega=2.0))
    out = H.apply(g.zeros())
    assert np.all(out.values == 0.0)


def test_apply_matches_discrete_sine_eigenrelation():
    g = Grid(1, (1.0,), (64,), "dirichlet")
    H = build_hamiltonian(g, FreeParticle())
    h = g.spacing[0]
    x = g.coordinates()[:, 0]
    for k in (1, 2, 5):
        u = np.sin(k * np.pi * x)
        lam = (1.0 - np.cos(k * np.pi * h)) / h**2
        np.testing.assert_allclose(H.apply_array(u), lam * u, atol=1e-10 * lam)


def test_quadratic_form_matches_dense(rng):
    g = Grid(1, (2.0,), (60,), "periodic")
    H = build_hamiltonian(g, HarmonicWell(omega=1.5))
    a = H.materialize_dense()
    w = g.cell_volume
    for _ in range(20):
        u = rng.standard_normal(60)
        direct = inner_product(g.function(u), H.apply(g.function(u)))
        dense = w * float(u @ (a @ u))
        assert direct == pytest.approx(dense, rel=1e-12, abs=1e-12)


def test_dense_exactly_symmetric(rng):
    vals = tuple(rng.standard_normal(48))
    g = Grid(2, (1.0, 1.5), (6, 8), "periodic")
    a = build_hamiltonian(g, Tabulated(vals)).materialize_dense()
    assert np.abs(a - a.T).max() == 0.0


def test_dense_matches_apply_on_random_vectors(rng):
    for boundary in ("dirichlet", "periodic"):
        g = Grid(2, (1.0, 1.0), (7, 5), boundary)
        H = build_hamiltonian(g, MultiWell(centers=((0.3, 0.4),), depth=2.0, width=0.2))
        a = H.materialize_dense()
        for _ in range(20):
            u = rng.standard_normal(35)
            scale = max(1.0, np.abs(a @ u).max())
            np.testing.assert_allclose(H.apply_array(u), a @ u, atol=1e-12 * scale)


def test_apply_is_linear(rng):
    g = Grid(1, (3.0,), (80,), "dirichlet")
    H = build_hamiltonian(g, HarmonicWell(omega=0.7))
    u = rng.standard_normal(80)
    v = rng.standard_normal(80)
    alpha, beta = 1.7, -0.3
    lhs = H.apply_array(alpha * u + beta * v)
    rhs = alpha * H.apply_array(u) + beta * H.apply_array(v)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * max(1.0, np.abs(rhs).max()))


def test_symmetry_of_quadratic_form(rng):
    g = Grid(2, (1.0, 1.0), (9, 9), "dirichlet")
    H = build_hamiltonian(g, HarmonicWell(omega=1.0))
    for _ in range(100):
        u = g.function(rng.standard_normal(81))
        v = g.function(rng.standard_normal(81))
        a = inner_product(u, H.apply(v))
        b = inner_product(H.apply(u), v)
        assert a == pytest.approx(b, rel=1e-10, abs=1e-10)


def test_second_order_consistency():
    lam_exact = np.pi**2 / 2

    def lowest(n):
        g = Grid(1, (1.0,), (n,), "dirichlet")
        H = build_hamiltonian(g, FreeParticle())
        return reference_eigenpairs(H, 1).eigenvalues[0]

    err_coarse = abs(lowest(64) - lam_exact)
    err_fine = abs(lowest(128) - lam_exact)
    assert 3.5 <= err_coarse / err_fine <= 4.5


def test_free_particle_dirichlet_positive_definite():
    g = Grid(1, (1.0,), (32,), "dirichlet")
    H = build_hamiltonian(g, FreeParticle())
    ritz = np.linalg.eigvalsh(H.materialize_dense())
    assert np.all(ritz > 0)


def test_2d_dirichlet_ground_state():
    g = Grid(2, (1.0, 1.0), (24, 24), "dirichlet")
    H = build_hamiltonian(g, FreeParticle())
    lam1 = reference_eigenpairs(H, 1).eigenvalues[0]
    assert lam1 == pytest.approx(np.pi**2, rel=5e-3)


def test_tabulated_size_mismatch_raises():
    g = Grid(1, (1.0,), (16,), "dirichlet")
    with pytest.raises(ValueError):
        build_hamiltonian(g, Tabulated(tuple(range(15))))
    with pytest.raises(ValueError):
        build_hamiltonian(g, Tabulated((float("nan"),) * 16))


def test_dense_limit_enforced():
    g = Grid(1, (1.0,), (64,), "dirichlet")
    H = build_hamiltonian(g, FreeParticle(), dense_limit=32)
    with pytest.raises(ValueError, match="iterative"):
        H.materialize_dense()


def test_apply_grid_mismatch_raises():
    g = Grid(1, (1.0,), (16,), "dirichlet")
    other = Grid(1, (1.0,), (17,), "dirichlet")
    H = build_hamiltonian(g, FreeParticle())
    with pytest.raises(GridMismatchError):
        H.apply(other.zeros())
