import numpy as np
import pytest

from fibanyon.fusion_basis import PHI, AnyonState, dim, enumerate_basis
from fibanyon.operators import (F_MATRIX, R_MATRIX, DegenerateMeasurementError, ForcedMeasurementDivergence,
                                LinearOp, apply_braid, braid_generator, charge_projector, create_pair,
                                creation_op, force_fuse_vacuum, fuse_adjacent, fusion_map, fusion_op,
                                measure_charge, pair_projector, postselect_fusion, project_charge)
from fibanyon.trace import RandomSource, ReplaySource

ZERO = AnyonState.basis((1, 0, 1, 0))
ONE = AnyonState.basis((1, 1, 1, 0))


def random_state(n, total, rng):
    d = dim(n, total)
    return AnyonState.from_vector(n, total, rng.normal(size=d) + 1j * rng.normal(size=d)).normalize()


def dense_charge_projector(n, total, i, j, c):
    """Oracle: braid anyons i..j to the front, read the charge off x_len, braid back."""
    d = dim(n, total)
    length = j - i + 1
    b = np.eye(d, dtype=complex)
    for p in range(i - 1, 0, -1):
        # carry anyon p to the right, past the whole block
        for k in range(p, p + length):
            b = braid_generator(n, total, k).dense() @ b
    diag = np.array([1.0 if path[length - 1] == c else 0.0 for path in enumerate_basis(n, total)])
    return b.conj().T @ np.diag(diag) @ b


def test_r_and_f_matrices():
    assert np.allclose(F_MATRIX, F_MATRIX.T)
    assert np.allclose(F_MATRIX @ F_MATRIX, np.eye(2), atol=1e-12)
    assert np.allclose(np.diag(R_MATRIX) ** 10, 1, atol=1e-12)
    assert np.allclose(R_MATRIX.conj().T @ R_MATRIX, np.eye(2))


def test_sigma1_on_the_qubit():
    m = braid_generator(4, 0, 1).dense()
    assert np.allclose(m, np.diag([np.exp(-4j * np.pi / 5), np.exp(3j * np.pi / 5)]))


def test_two_anyons_pick_up_r0():
    assert np.allclose(braid_generator(2, 0, 1).dense(), [[np.exp(-4j * np.pi / 5)]])


@pytest.mark.parametrize("n", range(2, 11))
def test_inverse_and_unitarity(n):
    rng = np.random.default_rng(n)
    for total in (0, 1):
        eye = np.eye(dim(n, total))
        for k in range(1, n):
            s = braid_generator(n, total, k).dense()
            t = braid_generator(n, total, k, -1).dense()
            assert np.allclose(s @ t, eye, atol=1e-12)
            assert np.allclose(t, s.conj().T, atol=1e-12)
            psi = random_state(n, total, rng)
            assert abs(apply_braid(psi, k).norm() - 1) < 1e-12


@pytest.mark.parametrize("n", range(3, 9))
def test_braid_relations(n):
    for total in (0, 1):
        gens = [braid_generator(n, total, k).dense() for k in range(1, n)]
        for k in range(len(gens) - 1):
            a, b = gens[k], gens[k + 1]
            assert np.allclose(a @ b @ a, b @ a @ b, atol=1e-10)
        for i in range(len(gens)):
            for j in range(i + 2, len(gens)):
                assert np.allclose(gens[i] @ gens[j], gens[j] @ gens[i], atol=1e-10)
            assert np.allclose(np.linalg.matrix_power(gens[i], 10), np.eye(len(gens[i])), atol=1e-10)


def test_braid_couples_only_position_k():
    n, total, k = 6, 0, 3
    paths = enumerate_basis(n, total)
    m = braid_generator(n, total, k).dense()
    for r, c in zip(*np.nonzero(np.abs(m) > 1e-14)):
        diff = [t for t in range(n) if paths[r][t] != paths[c][t]]
        assert diff in ([], [k - 1])


def test_braid_index_error():
    with pytest.raises(IndexError):
        braid_generator(4, 0, 4)
    with pytest.raises(IndexError):
        apply_braid(ZERO, 0)


@pytest.mark.parametrize("n", range(2, 9))
def test_range_projectors_match_dense_oracle(n):
    for total in (0, 1):
        if dim(n, total) == 0:
            continue
        eye = np.eye(dim(n, total))
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                p0 = charge_projector(n, total, i, j, 0).dense()
                p1 = charge_projector(n, total, i, j, 1).dense()
                assert np.allclose(p0 + p1, eye, atol=1e-12)
                assert np.allclose(p0 @ p0, p0, atol=1e-12)
                assert np.allclose(p0 @ p1, 0, atol=1e-12)
                assert np.allclose(p0, p0.conj().T, atol=1e-12)
                assert np.allclose(p0, dense_charge_projector(n, total, i, j, 0), atol=1e-10)


def test_pair_projector_is_range_projector():
    for k in range(1, 6):
        assert np.allclose(pair_projector(6, 0, k, 0).dense(), charge_projector(6, 0, k, k + 1, 0).dense())


def test_project_charge_examples():
    post, p = project_charge(ZERO, 1, 2, 0)
    assert p == pytest.approx(1)
    assert np.allclose(post.to_vector(), ZERO.to_vector())
    alpha = AnyonState.from_vector(4, 0, [1, PHI**0.5]).normalize()
    _, p = project_charge(alpha, 1, 2, 0)
    assert p == pytest.approx(1 / (1 + PHI), abs=1e-12)
    assert p == pytest.approx(0.381966, abs=1e-6)
    rng = np.random.default_rng(0)
    for total in (0, 1):
        _, p = project_charge(random_state(7, total, rng), 1, 7, total)
        assert p == pytest.approx(1, abs=1e-12)


def test_born_probabilities_sum_to_one():
    rng = np.random.default_rng(1)
    psi = random_state(8, 0, rng)
    for i in range(1, 9):
        for j in range(i, 9):
            p0 = project_charge(psi, i, j, 0)[1]
            p1 = project_charge(psi, i, j, 1)[1]
            assert p0 + p1 == pytest.approx(1, abs=1e-12)


def test_measure_charge_examples():
    m = measure_charge(ONE, 1, 2, RandomSource(0))
    assert m.observed == 1 and m.probability == pytest.approx(1)
    plus = AnyonState.from_vector(4, 0, [1, 1]).normalize()
    m = measure_charge(plus, 1, 2, ReplaySource([0.2]))
    assert m.observed == 0 and m.probability == pytest.approx(0.5)
    assert np.allclose(m.post_state.to_vector(), [1, 0])
    m = measure_charge(plus, 1, 2, ReplaySource([0.7]))
    assert m.observed == 1
    assert abs(m.post_state.norm() - 1) < 1e-12


def test_measure_uses_one_draw_and_is_reproducible():
    rng = np.random.default_rng(2)
    psi = random_state(8, 0, rng)
    src = RandomSource(11)
    measure_charge(psi, 2, 5, src)
    assert len(src.draws) == 1

    def run(seed):
        s = RandomSource(seed)
        state, out = psi, []
        for i, j in [(1, 3), (2, 5), (4, 7), (3, 4), (2, 8)]:
            m = measure_charge(state, i, j, s)
            out.append(m.observed)
            state = m.post_state
        return out, state.to_vector()

    a, b = run(5), run(5)
    assert a[0] == b[0]
    assert np.array_equal(a[1], b[1])


def test_degenerate_measurement():
    with pytest.raises(DegenerateMeasurementError):
        measure_charge(AnyonState(4, 0, {}), 1, 2, RandomSource(0))


def test_fuse_adjacent_examples():
    c, post = fuse_adjacent(ZERO, 1, RandomSource(0))
    assert c == 0 and post.n == 2 and np.allclose(post.to_vector(), [1])
    c, post = fuse_adjacent(ONE, 1, RandomSource(0))
    assert c == 1 and post.n == 3 and post.total == 0
    assert abs(post.norm() - 1) < 1e-12


def test_fusion_map_is_coisometry():
    for n in range(2, 8):
        for total in (0, 1):
            if dim(n, total) == 0:
                continue
            for k in range(1, n):
                f0 = fusion_op(n, total, k, 0).dense()
                f1 = fusion_op(n, total, k, 1).dense()
                assert np.allclose(f0.conj().T @ f0 + f1.conj().T @ f1, np.eye(dim(n, total)), atol=1e-12)


def test_create_then_fuse_is_identity():
    rng = np.random.default_rng(3)
    psi = random_state(6, 1, rng)
    for pos in range(0, 7):
        created = create_pair(psi, pos)
        assert created.n == 8 and abs(created.norm() - 1) < 1e-12
        back, p = postselect_fusion(created, pos + 1, 0)
        assert p == pytest.approx(1)
        assert np.allclose(back.to_vector(), psi.to_vector())
    twice = create_pair(create_pair(psi, 2), 5)
    back = fusion_map(fusion_map(twice, 6, 0), 3, 0)
    assert np.allclose(back.to_vector(), psi.to_vector())


def test_create_pair_from_vacuum():
    s = create_pair(AnyonState.vacuum(), 0)
    assert s.amps == {(1, 0): 1}


def test_creation_op_is_isometry():
    for n in range(0, 7):
        for total in (0, 1):
            if dim(n, total) == 0:
                continue
            for pos in range(0, n + 1):
                c = creation_op(n, total, pos).dense()
                assert np.allclose(c.conj().T @ c, np.eye(dim(n, total)))


def test_bubble_bookkeeping():
    # cap after cup on the vacuum: the unnormalized overlap times the loop value phi
    created = create_pair(AnyonState.vacuum(), 0)
    assert fusion_map(created, 1, 0).norm() ** 2 * PHI == pytest.approx(PHI)


def test_force_fuse_vacuum_definite_pair():
    state = AnyonState.basis((1, 0, 1, 0, 1, 0, 1, 0))
    src = RandomSource(0)
    post, rounds = force_fuse_vacuum(state, 1, (1, 4), src)
    assert rounds == 1 and post.n == 6
    assert len(src.draws) == 1


def test_force_fuse_vacuum_terminates():
    rng = np.random.default_rng(4)
    rounds = []
    for seed in range(300):
        a = AnyonState.from_vector(4, 0, rng.normal(size=2) + 1j * rng.normal(size=2)).normalize()
        state = AnyonState(8, 0, {p + q: x * y for p, x in a.amps.items() for q, y in a.amps.items()})
        post, r = force_fuse_vacuum(state, 4, (1, 4), RandomSource(seed))
        assert post.n == 6 and abs(post.norm() - 1) < 1e-12
        rounds.append(r)
    assert max(rounds) < 100
    assert np.mean(rounds) >= 1


def test_force_fuse_modes():
    state = AnyonState.from_vector(4, 0, [1, 1]).normalize()
    state = AnyonState(8, 0, {p + q: x * y for p, x in state.amps.items() for q, y in state.amps.items()})
    lit, _ = force_fuse_vacuum(state, 4, (1, 4), RandomSource(8), mode="literal")
    strict, _ = force_fuse_vacuum(state, 4, (1, 4), RandomSource(8), mode="strict")
    assert lit.n == strict.n == 6
    with pytest.raises(ValueError):
        force_fuse_vacuum(state, 4, (1, 4), RandomSource(8), mode="loose")
    # the group charge is definite, so it never rotates the pair out of channel 1
    with pytest.raises(ForcedMeasurementDivergence):
        force_fuse_vacuum(ONE, 1, (1, 4), RandomSource(0), max_iter=3)


def test_linear_op_algebra():
    s = braid_generator(5, 1, 2)
    ident = LinearOp.identity(5, 1)
    assert np.allclose((s @ s.adjoint()).dense(), ident.dense())
    assert np.allclose((2 * s - s).dense(), s.dense())
    psi = random_state(5, 1, np.random.default_rng(5))
    assert np.allclose(s.apply(psi).to_vector(), apply_braid(psi, 2).to_vector())
