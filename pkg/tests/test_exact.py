import numpy as np
import pytest

from centerspace import (
    CenterMatrix,
    InputError,
    SystemParams,
    build_label_map,
    cossim_argmax,
    enumerate_centers,
    matmul_head_argmax,
    predict_labels,
)

from conftest import ref_cosine_argmax


@pytest.fixture(scope="module")
def system_10():
    p = SystemParams(10, 2, 2)
    centers = np.array(list(enumerate_centers(p)), dtype=float)
    return p, centers, CenterMatrix.from_rows(centers)


def test_identity_labeling(system_10):
    _, centers, cm = system_10
    assert np.array_equal(cossim_argmax(centers, cm), np.arange(len(centers)))


def test_result_range(system_10, rng):
    _, centers, cm = system_10
    labels = cossim_argmax(rng.standard_normal((200, 10)), cm)
    assert labels.min() >= 0 and labels.max() < len(centers)


def test_agreement_with_reference_loop(system_10, rng):
    _, centers, cm = system_10
    Z = rng.standard_normal((300, 10))
    got = cossim_argmax(Z, cm)
    want = [ref_cosine_argmax(z, centers) for z in Z]
    assert got.tolist() == want


def test_blocking_does_not_change_answers(system_10, rng):
    _, centers, cm = system_10
    Z = rng.standard_normal((500, 10))
    base = cossim_argmax(Z, cm)
    for br, bc in [(7, 13), (500, 10_000), (1, 1)]:
        assert np.array_equal(cossim_argmax(Z, cm, block_rows=br, block_cols=bc), base)


def test_agreement_with_hash_predict(system_10, rng):
    p, centers, cm = system_10
    lm = build_label_map(centers.astype(np.int8), range(len(centers)), p)
    Z = rng.standard_normal((10_000, 10))
    assert np.array_equal(cossim_argmax(Z, cm), predict_labels(Z, lm))


def test_matmul_equals_cossim_on_equal_norms(system_10, rng):
    _, centers, cm = system_10
    Z = rng.standard_normal((10_000, 10))
    assert np.array_equal(matmul_head_argmax(Z, cm), cossim_argmax(Z, cm))


def test_single_class(rng):
    cm = CenterMatrix.from_rows([[1.0, 1.0, -1.0, -1.0]])
    Z = rng.standard_normal((50, 4))
    assert (matmul_head_argmax(Z, cm) == 0).all()
    assert (cossim_argmax(Z, cm) == 0).all()


def test_mixed_norm_counterexample():
    # prototypes with unequal norms: raw inner product prefers the long one,
    # normalized similarity the short one
    cm = CenterMatrix.from_rows([[1, -1, 0, 0], [1, 0, 0, 0]])
    z = np.array([[1.0, -0.2, 0.0, 0.0]])
    assert matmul_head_argmax(z, cm)[0] == 0
    assert cossim_argmax(z, cm)[0] == 1


def test_scale_invariance(system_10, rng):
    _, _, cm = system_10
    Z = rng.standard_normal((200, 10))
    base = cossim_argmax(Z, cm)
    for c in (1e-3, 7.0, 1e4):
        assert np.array_equal(cossim_argmax(c * Z, cm), base)


def test_zero_norm_row_rejected(system_10):
    _, _, cm = system_10
    Z = np.zeros((1, 10))
    with pytest.raises(InputError):
        cossim_argmax(Z, cm)
    with pytest.raises(InputError):
        matmul_head_argmax(Z, cm)


def test_dimension_mismatch_rejected(system_10):
    _, _, cm = system_10
    with pytest.raises(InputError):
        cossim_argmax(np.ones((2, 9)), cm)


def test_ties_resolve_to_lowest_label():
    cm = CenterMatrix.from_rows([[1, 0, 0, -1], [0, 1, -1, 0]])
    z = np.array([[0.5, 0.5, -0.5, -0.5]])  # exactly equidistant
    assert cossim_argmax(z, cm)[0] == 0


def test_from_label_map_rows_decode_to_their_labels():
    p = SystemParams(6, 2, 2)
    centers = list(enumerate_centers(p))
    lm = build_label_map(centers, range(len(centers)), p)
    cm = CenterMatrix.from_label_map(lm)
    for i, v in enumerate(centers):
        assert np.array_equal(cm.matrix[i].astype(np.int8), v)
    assert np.allclose(cm.norms, p.norm)
