import numpy as np
import pytest

from commbounds.ensembles import BLOCK_SIZE, KINDS, EnsembleSpec, draw, sample, sample_block


@pytest.mark.parametrize("kind", KINDS)
def test_streams_are_bitwise_reproducible(kind):
    spec = EnsembleSpec(4, kind, 300, seed=77)
    a = np.array(list(sample(spec)))
    b = np.array(list(sample(spec)))
    assert a.shape == (300, 4, 4)
    assert a.tobytes() == b.tobytes()


def test_kind_constraints_are_exact():
    sym = np.array(list(sample(EnsembleSpec(5, "symmetric", 50, 1))))
    assert np.array_equal(sym, np.swapaxes(sym, 1, 2))
    diag = np.array(list(sample(EnsembleSpec(5, "diagonal", 50, 1))))
    off = diag * (1 - np.eye(5))
    assert not off.any() and np.all(np.diagonal(diag, axis1=1, axis2=2) != 0)
    nil = np.array(list(sample(EnsembleSpec(5, "nilpotent-upper", 50, 1))))
    assert not np.tril(nil).any()
    ocd = np.array(list(sample(EnsembleSpec(5, "orthogonal-conjugated-diagonal", 50, 1))))
    assert np.array_equal(ocd, np.swapaxes(ocd, 1, 2))
    assert not np.array(list(sample(EnsembleSpec(3, "zero", 5, 1)))).any()


def test_orthogonal_conjugated_spectrum_is_gaussian_like():
    xs = np.array(list(sample(EnsembleSpec(4, "orthogonal-conjugated-diagonal", 2000, 3))))
    ev = np.linalg.eigvalsh(xs).ravel()
    assert abs(ev.mean()) < 0.05 and abs(ev.var() - 1.0) < 0.1


def test_gaussian_moments():
    xs = np.array(list(sample(EnsembleSpec(3, "gaussian", 4000, 9)))).ravel()
    assert abs(xs.mean()) < 0.02 and abs(xs.std() - 1.0) < 0.02


def test_draw_matches_stream_and_count_independence():
    long = EnsembleSpec(3, "gaussian", 700, seed=5)
    short = EnsembleSpec(3, "gaussian", 10, seed=5)
    stream = np.array(list(sample(long)))
    for t in (0, 9, BLOCK_SIZE - 1, BLOCK_SIZE, 699):
        assert np.array_equal(draw(long, t), stream[t])
    assert np.array_equal(np.array(list(sample(short))), stream[:10])


def test_streams_and_seeds_differ():
    a = sample_block(EnsembleSpec(3, "gaussian", 5, 1, stream=0), 0)
    b = sample_block(EnsembleSpec(3, "gaussian", 5, 1, stream=1), 0)
    c = sample_block(EnsembleSpec(3, "gaussian", 5, 2, stream=0), 0)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)


def test_spec_validation():
    for bad in [dict(n=0), dict(kind="hermitian"), dict(count=0), dict(seed=-1), dict(seed=2**64), dict(stream=-1)]:
        args = dict(n=2, kind="gaussian", count=1, seed=0, stream=0)
        args.update(bad)
        with pytest.raises(ValueError):
            EnsembleSpec(**args)
    with pytest.raises(IndexError):
        draw(EnsembleSpec(2, count=3), 3)
    with pytest.raises(IndexError):
        sample_block(EnsembleSpec(2, count=3), 1)
