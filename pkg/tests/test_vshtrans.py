import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sphelem.fields import gradient_test_coeffs, gradient_test_field, vsh_error
from sphelem.grid import build_uniform_partition, sample_vector_cartesian, sample_vector_spherical
from sphelem.sphtrans import SphCoeffs
from sphelem.vshtrans import VshCoeffs, vsh_basis_sample, vsh_forward, vsh_synthesize

PART = build_uniform_partition(3, 4, 24)
FAMILY = {"r": "r", "psi": "v1", "phi": "v2"}


@given(st.sampled_from(["r", "psi", "phi"]), st.integers(1, 9), st.data())
def test_basis_purity(kind, l, data):
    m = data.draw(st.integers(-l, l))
    v = vsh_forward(sample_vector_spherical(lambda th, ph: vsh_basis_sample(l, m, kind, th, ph), PART), 10)
    for fam in ("r", "v1", "v2"):
        c = getattr(v, fam).a.copy()
        if fam == FAMILY[kind]:
            assert c[l, 10 + m] == pytest.approx(1.0, abs=1e-12)
            c[l, 10 + m] = 0
        assert np.max(np.abs(c)) < 1e-12


def test_radial_constant():
    v = vsh_forward(sample_vector_spherical(lambda th, ph: np.stack([np.ones_like(th), 0 * th, 0 * th], -1), PART), 4)
    assert v.r(0, 0) == pytest.approx(2 * np.sqrt(np.pi), abs=1e-14)
    assert np.max(np.abs(v.v1.a)) < 1e-14 and np.max(np.abs(v.v2.a)) < 1e-14


@pytest.mark.parametrize("k,N", [(5.0, 30), (20.0, 50)])
def test_gradient_field(k, N):
    d = [1.0, 1.0, 1.0]
    part = build_uniform_partition(3, 4, N)
    v = vsh_forward(sample_vector_cartesian(gradient_test_field(k, d), part), 20)
    assert vsh_error(v, gradient_test_coeffs(k, 1.0, d, 20)) < 1e-10


def test_synthesis_roundtrip():
    L = 8
    rng = np.random.default_rng(4)

    def rand():
        c = SphCoeffs.zeros(L)
        for l in range(L + 1):
            c.a[l, L - l : L + l + 1] = rng.normal(size=2 * l + 1) + 1j * rng.normal(size=2 * l + 1)
        return c

    t1, t2 = rand(), rand()
    t1.a[0] = 0
    t2.a[0] = 0
    c = VshCoeffs(L, rand(), t1, t2)
    field = sample_vector_spherical(lambda th, ph: vsh_synthesize(c, th, ph), PART)
    assert vsh_error(vsh_forward(field, L), c) < 1e-12


def test_rows_cover_three_families():
    c = gradient_test_coeffs(3.0, 1.0, [0, 0, 1], 2)
    rows = list(c.rows())
    assert len(rows) == 3 * 9
