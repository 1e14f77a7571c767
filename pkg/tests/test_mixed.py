import numpy as np
import pytest

from dkslab.graphs import GnpParams, Graph, default_p, gen_gnp
from dkslab.mixed import (SymmetricMatrix, build_Z, check_mixed_psd, compare_with_sa, decomposition_floor,
                          level_for_psd, min_eigenvalue, spectral_bound, z_entries)
from dkslab.sa import SAAssignment


def test_symmetric_storage():
    m = np.array([[2.0, 1.0], [1.0, 3.0]])
    s = SymmetricMatrix(m)
    assert s[0, 1] == s[1, 0] == 1.0
    assert np.array_equal(s.to_dense(), m)
    assert min_eigenvalue(s) == pytest.approx((5 - np.sqrt(5)) / 2)
    with pytest.raises(ValueError):
        SymmetricMatrix(np.array([[np.nan]]))


def test_z_entries_against_definition():
    g = gen_gnp(GnpParams(30, 0.3, 1))
    L = 3
    z = build_Z(g, L).to_dense()
    a = g.dense(np.float64)
    n = g.n
    expected = np.where(a > 0, n ** -0.75 / L ** 2, 1 / (n * L * L))
    np.fill_diagonal(expected, n ** -0.5 / L)
    assert np.allclose(z, expected, rtol=1e-12, atol=0)
    ent = z_entries(n, L)
    assert float(ent["diag"]) == pytest.approx(z[0, 0])


def test_z_matches_sa_pairs():
    n = 500
    g = gen_gnp(GnpParams(n, default_p(n), 4))
    assert compare_with_sa(g, 3, SAAssignment(g, 3)) == []


def test_sa_mismatch_detected_on_long_paths():
    g = Graph.cycle(8)
    bad = compare_with_sa(g, 3, SAAssignment(g, 3))
    assert (0, 4) in bad and (0, 1) not in bad


def test_small_level_not_psd_and_floor_is_valid():
    n = 500
    g = gen_gnp(GnpParams(n, default_p(n), 1))
    v = check_mixed_psd(g, 3)
    assert not v.pass_Z
    assert v.lambda_min_Z >= v.decomposition_bound - 1e-12
    assert v.decomposition_bound < 0
    assert v.pass_A


def test_psd_at_chosen_level():
    n = 300
    g = gen_gnp(GnpParams(n, default_p(n), 2))
    v = check_mixed_psd(g, level_for_psd(n))
    assert v.passed
    assert set(v.to_dict()) >= {"lambda_min_Z", "lambda_min_A", "bound_A", "pass_Z", "pass_A"}


def test_bounds():
    assert spectral_bound(1) == 0.0
    assert decomposition_floor(10000, 1, 0.0) == pytest.approx(0.01 - 1e-4)
    assert level_for_psd(500) == 10


def test_decomposition_identity():
    g = gen_gnp(GnpParams(40, 0.3, 3))
    n, L = g.n, 4
    j = 1 / (n * L * L)
    a = g.dense(np.float64)
    rebuilt = j * np.ones((n, n)) + (n ** -0.5 / L - j) * np.eye(n) + (n ** -0.75 / L ** 2 - j) * a
    assert np.allclose(build_Z(g, L).to_dense(), rebuilt, rtol=1e-12, atol=1e-15)
