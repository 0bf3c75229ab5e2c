import numpy as np
import pytest

from funcobs.errors import InvalidInputError
from funcobs.functional import (
    analyze,
    distinct_eigenvalues,
    is_functionally_detectable,
    is_functionally_observable,
    modal_functional_observability,
    modal_functional_observability_jordan,
    observability_decomposition,
    pbh_functional_check,
)
from funcobs.numeric import SystemTriple, eigendecompose_diagonalizable

from conftest import EX1_A, EX1_C, EX1_F, EX1_JORDAN, EX2_A, EX2_C, EX2_F, EIGHT_A, EIGHT_F, EIGHT_REF_C
from generators import diagonalizable_triple
from oracles import exact_fo, modal_fo_exact


def triple(A, C, F):
    return SystemTriple(np.asarray(A, float), np.asarray(C, float).reshape(-1, len(A)), np.asarray(F, float))


class TestExample1:
    sys = SystemTriple(EX1_A, EX1_C, EX1_F)

    def test_rank_identity(self):
        assert is_functionally_observable(self.sys) == (False, 3, 4)

    def test_detectable(self):
        assert is_functionally_detectable(self.sys)

    def test_jordan_modal_table(self):
        rows = dict(modal_functional_observability_jordan(self.sys, EX1_JORDAN))
        assert rows == {1: True, -1: False, 0: True}

    def test_analyze_flags_pbh_as_necessary_only(self):
        rep = analyze(self.sys)
        assert not rep.diagonalizable
        assert rep.modal_table is None
        assert all(r.necessary_only for r in rep.pbh_table)
        assert {r.eigenvalue.real for r in rep.pbh_table} == {1.0, 0.0, -1.0}

    def test_pbh_misses_failure(self):
        # PBH holds at lambda = 1 and 0 although the triple is not FO
        assert pbh_functional_check(self.sys, 1.0)
        assert pbh_functional_check(self.sys, 0.0)
        assert not pbh_functional_check(self.sys, -1.0)

    def test_inconsistent_jordan_data(self):
        bad = [(EX1_JORDAN[0][0], EX1_JORDAN[1][1])] + EX1_JORDAN[1:]
        with pytest.raises(InvalidInputError):
            modal_functional_observability_jordan(self.sys, bad)

    def test_jordan_data_must_cover_states(self):
        with pytest.raises(InvalidInputError):
            modal_functional_observability_jordan(self.sys, EX1_JORDAN[:2])

    def test_non_triangular_block_rejected(self):
        J = np.array([[1.0, 0], [1, 1]])
        with pytest.raises(InvalidInputError):
            modal_functional_observability_jordan(self.sys, [(J, EX1_JORDAN[0][1])] + EX1_JORDAN[1:])


class TestExample2:
    sys = SystemTriple(EX2_A, EX2_C, EX2_F)

    def test_ranks(self):
        assert is_functionally_observable(self.sys) == (False, 1, 2)

    def test_not_detectable(self):
        assert not is_functionally_detectable(self.sys)

    def test_pbh_true_but_necessary_only(self):
        rep = analyze(self.sys)
        assert len(rep.pbh_table) == 1
        row = rep.pbh_table[0]
        assert row.eigenvalue == 0 and row.holds and row.necessary_only


class TestDetectability:
    def test_stable_unobservable_part_ignored(self):
        sys = triple(np.diag([-1.0, 1.0]), [[0, 1]], [[1, 0]])
        assert not is_functionally_observable(sys)[0]
        assert is_functionally_detectable(sys)

    def test_unstable_unobservable_part_detected(self):
        sys = triple(np.diag([-1.0, 1.0]), [[1, 0]], [[1, 1]])
        assert not is_functionally_detectable(sys)

    def test_margin_widens_unstable_set(self):
        sys = triple(np.diag([-0.01, 1.0]), [[0, 1]], [[1, 0]])
        assert is_functionally_detectable(sys)
        assert not is_functionally_detectable(sys, margin=0.1)

    def test_decomposition_shapes(self):
        sys = triple(np.diag([-1.0, 1.0, 2.0]), [[0, 1, 0]], [[1, 0, 0]])
        dec = observability_decomposition(sys)
        assert dec.rank == 1
        assert dec.unobservable_basis.shape == (3, 2)
        assert dec.unstable_unobservable_basis.shape == (3, 1)
        assert np.allclose(np.abs(dec.unstable_unobservable_basis[:, 0]), [0, 0, 1])

    def test_no_sensors(self):
        sys = triple(np.diag([-1.0, -2.0]), np.zeros((0, 2)), [[1, 1]])
        assert not is_functionally_observable(sys)[0]
        assert is_functionally_detectable(sys)


class TestModal:
    def test_eight_state_ref_C(self):
        sys = SystemTriple(EIGHT_A, EIGHT_REF_C, EIGHT_F)
        assert is_functionally_observable(sys) == (True, 6, 6)
        spec = eigendecompose_diagonalizable(EIGHT_A)
        assert all(ok for _, ok in modal_functional_observability(sys, spec))

    def test_spectral_data_must_match(self):
        sys = triple(np.diag([1.0, 2.0]), [[1, 0]], [[0, 1]])
        other = eigendecompose_diagonalizable(np.diag([1.0, 3.0]))
        with pytest.raises(InvalidInputError):
            modal_functional_observability(sys, other)

    def test_identity_F(self):
        A = np.array([[0.0, 1, 0], [0, 0, 1], [-1, -2, -3]])
        rep = analyze(triple(A, [[1, 0, 0]], np.eye(3)))
        assert rep.functionally_observable and rep.routes_agree

    @pytest.mark.parametrize("seed", range(25))
    def test_matches_exact_modal_oracle(self, seed):
        rng = np.random.default_rng(1000 + seed)
        A, C, F = diagonalizable_triple(rng)
        sys = triple(A, C, F)
        spec = eigendecompose_diagonalizable(sys.A)
        ours = all(ok for _, ok in modal_functional_observability(sys, spec))
        theirs = all(ok for _, ok in modal_fo_exact(A, C, F))
        assert ours == theirs == exact_fo(A, C, F) == is_functionally_observable(sys)[0]


def test_distinct_eigenvalues_merges_repeats():
    eigs = distinct_eigenvalues(np.diag([1.0, 1.0, -2.0]))
    assert eigs == [1.0, -2.0]
