import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tncondense.canonicalize import IndexSpec, branched_lift_index, sector_index
from tncondense.lab import (CoarseSampling, VanishingField, branched_lift_model, planar,
                            sector_model, winding_index)


def test_expanding_point():
    assert winding_index(lambda z: 2 * z, 0j, 0.1) == 1


def test_linear_saddle():
    saddle = planar(lambda v: v * np.array([2.0, 0.5]))
    assert winding_index(saddle, 0j, 0.1) == -1


def test_quarter_rotation():
    assert winding_index(lambda z: 1j * z, 0j, 0.1) == 1


def test_contracting_point_off_origin():
    c = 0.3 - 0.2j
    assert winding_index(lambda z: c + 0.5 * (z - c), c, 0.05) == 1


def test_no_fixed_point_inside():
    assert winding_index(lambda z: z + 1.0, 0j, 0.1) == 0


def test_vanishing_displacement_is_reported():
    with pytest.raises(VanishingField):
        winding_index(lambda z: z, 0j, 0.1)


def test_coarse_sampling_is_reported():
    with pytest.raises(CoarseSampling):
        winding_index(sector_model(40), 0j, 1.0, samples=64)


@pytest.mark.parametrize("h,p", [(0, 0), (4, 0), (2, 2), (6, 0), (0, 4)])
def test_sector_models_match_closed_form(h, p):
    index = sector_index(IndexSpec(h, p))
    assert winding_index(sector_model(index), 0j, 1.0) == index


@settings(max_examples=40, deadline=None)
@given(st.integers(-15, 15), st.integers(2, 8), st.booleans())
def test_branched_models_match_closed_form(index, k, rotated):
    spec = IndexSpec.for_index(index, k=k, rotated=rotated)
    G = branched_lift_model(index, k, rotated)
    assert winding_index(G, 0j, 1.0, samples=8192) == branched_lift_index(spec)


def test_lift_commutes_with_branched_cover():
    k, index = 3, -1
    G = branched_lift_model(index, k)
    H = sector_model(index)
    z = np.exp(2j * np.pi * np.linspace(0, 1, 50, endpoint=False))
    assert G(z) ** k == pytest.approx(H(z ** k), abs=1e-12)
