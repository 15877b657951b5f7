import numpy as np
import pytest

from mqiga.infsup import compute_infsup

TABLE = {
    (2, 1): (0.8641, 0.8657, 0.8657, 0.8657, 0.8657, 0.8657, 0.8657),
    (2, 2): (0.9218, 0.9319, 0.9327, 0.9327, 0.9327, 0.9327, 0.9327),
    (2, 3): (0.9422, 0.9617, 0.9666, 0.9670, 0.9670, 0.9670, 0.9670),
    (3, 1): (0.8246, 0.8296, 0.8297, 0.8297, 0.8297, 0.8297, 0.8297),
    (3, 2): (0.8992, 0.9143, 0.9166, 0.9167, 0.9167, 0.9167, 0.9167),
    (3, 3): (0.9255, 0.9509, 0.9580, 0.9591, 0.9592, 0.9592, 0.9592),
}
NS = (8, 16, 32, 64, 128, 256, 512)


@pytest.mark.parametrize("p, L, n, expected", [(2, 1, 8, 0.8641), (3, 3, 512, 0.9592),
                                               (2, 2, 64, 0.9327)])
def test_examples(p, L, n, expected):
    assert compute_infsup(p, L, n) == pytest.approx(expected, abs=5e-4)


@pytest.mark.parametrize("args", [(1, 1, 8), (2, 0, 8), (2, 1, 7), (2, 3, 4)])
def test_invalid(args):
    with pytest.raises(ValueError):
        compute_infsup(*args)


@pytest.fixture(scope="module")
def computed():
    return {(p, L): [compute_infsup(p, L, n) for n in NS] for p, L in TABLE}


def test_in_unit_interval(computed):
    for vals in computed.values():
        assert all(0 < b <= 1 for b in vals)


def test_plateau(computed):
    for vals in computed.values():
        gaps = np.abs(np.diff(vals))[NS.index(32):]
        assert np.all(np.diff(gaps) <= 1e-12)


def test_level_monotone(computed):
    for p in (2, 3):
        for j, n in enumerate(NS):
            if n >= 64:
                assert computed[(p, 1)][j] < computed[(p, 2)][j] < computed[(p, 3)][j]
