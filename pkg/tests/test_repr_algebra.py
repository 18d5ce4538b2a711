"""Tests for groups, representation expressions and the locomotion catalog."""

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm as scipy_expm

sys.path.insert(0, str(Path(__file__).parent.parent))
from rpp_experiments.core.errors import (
    ConfigError,
    EmptyLieAlgebraError,
    StructuralError,
    UnknownEnvironmentError,
)
from rpp_experiments.symmetry.catalog import catalog_report, mujoco_catalog
from rpp_experiments.symmetry.groups import (
    GROUP_CONSTRUCTORS,
    O3,
    SL3,
    SO3,
    D4,
    GroupSpec,
    Z2,
    Z4,
    enumerate_finite_group,
    expm,
    get_group,
    group_element,
    sample_group_element,
)
from rpp_experiments.symmetry.reps import (
    Base,
    Pseudoscalar,
    Scalar,
    copies,
    drho_of,
    iter_atoms,
    parse_rep,
    rep_text,
    rho_of,
)


class TestGroups:
    """Group construction, sampling and lookup."""

    def setup_method(self):
        self.rng = np.random.default_rng(0)

    def test_every_builtin_group_constructs(self):
        for name, constructor in GROUP_CONSTRUCTORS.items():
            group = constructor()
            assert group.name == name
            assert group.base_dim >= 2

    def test_get_group_trivial(self):
        group = get_group("Trivial(4)")
        assert group.base_dim == 4
        assert group.is_finite
        assert not group.discrete_generators

    def test_get_group_unknown_name(self):
        with pytest.raises(ConfigError, match="Unknown group"):
            get_group("E(8)")

    def test_singular_discrete_generator_rejected(self):
        with pytest.raises(StructuralError, match="singular"):
            GroupSpec("bad", 2, [np.zeros((2, 2))])

    def test_dependent_lie_generators_rejected(self):
        a = np.array([[0.0, -1.0], [1.0, 0.0]])
        with pytest.raises(StructuralError, match="linearly dependent"):
            GroupSpec("bad", 2, [], [a, 2 * a])

    def test_generator_shape_mismatch_rejected(self):
        with pytest.raises(StructuralError, match="does not match"):
            GroupSpec("bad", 3, [np.eye(2)])

    def test_expm_matches_scipy(self):
        for _ in range(5):
            a = self.rng.standard_normal((3, 3)) * 2.0
            np.testing.assert_allclose(expm(a), scipy_expm(a), rtol=1e-10, atol=1e-10)

    def test_sampled_rotations_are_orthogonal(self):
        for group in (SO3(), O3()):
            for _ in range(20):
                g = sample_group_element(group, self.rng)
                np.testing.assert_allclose(g.T @ g, np.eye(3), atol=1e-10)

    def test_sl3_preserves_volume(self):
        group = SL3()
        for _ in range(10):
            g = sample_group_element(group, self.rng)
            assert abs(np.linalg.det(g) - 1.0) < 1e-8

    def test_group_element_coefficient_count_checked(self):
        with pytest.raises(StructuralError, match="Lie coefficients"):
            group_element(SO3(), (), [0.1, 0.2])

    def test_finite_group_sizes(self):
        assert len(enumerate_finite_group(Z2())) == 2
        assert len(enumerate_finite_group(Z4())) == 4
        assert len(enumerate_finite_group(D4())) == 8

    def test_enumerate_rejects_continuous_group(self):
        with pytest.raises(StructuralError, match="not a finite group"):
            enumerate_finite_group(SO3())

    def test_orthogonality_flag(self):
        assert O3().is_orthogonal
        assert not SL3().is_orthogonal


class TestRepresentations:
    """Rep dimensions, matrices and the text form."""

    def setup_method(self):
        self.rng = np.random.default_rng(1)

    def test_dimensions(self):
        V = Base(3)
        assert (Scalar() + V).dim == 4
        assert (V * V).dim == 9
        assert (V**3).dim == 27
        assert (V**0).dim == 1
        assert copies(Scalar() + V, 5).dim == 20

    def test_block_dimensions(self):
        assert Base(3, (1, 3)).dim == 2
        with pytest.raises(StructuralError, match="exceeds"):
            Base(3, (1, 4))
        with pytest.raises(StructuralError, match="Invalid block"):
            Pseudoscalar((2, 1))

    def test_sum_and_tensor_flatten(self):
        V = Base(2)
        nested = (V + Scalar()) + (V + V)
        assert len(nested.reps) == 4
        assert len(list(iter_atoms(V * (V * V)))) == 3

    def test_homomorphism(self):
        reps = [
            parse_rep("V", 3),
            parse_rep("R+V+P", 3),
            parse_rep("V*V", 3),
            parse_rep("(R+V)^2*V", 3),
        ]
        group = O3()
        for _ in range(50):
            g = sample_group_element(group, self.rng)
            h = sample_group_element(group, self.rng)
            for rep in reps:
                lhs = rho_of(rep, g @ h)
                rhs = rho_of(rep, g) @ rho_of(rep, h)
                assert np.linalg.norm(lhs - rhs) < 1e-7

    def test_pseudoscalar_is_determinant(self):
        reflection = np.diag([1.0, -1.0, 1.0])
        assert rho_of(Pseudoscalar(), reflection)[0, 0] == pytest.approx(-1.0)
        assert rho_of(Pseudoscalar((0, 1)), reflection)[0, 0] == pytest.approx(1.0)

    def test_drho_matches_derivative_of_rho(self):
        rep = parse_rep("V*V+P+V", 3)
        group = SO3()
        t = 1e-5
        for a in group.lie_generators:
            forward = rho_of(rep, scipy_expm(t * a))
            backward = rho_of(rep, scipy_expm(-t * a))
            numeric = (forward - backward) / (2 * t)
            np.testing.assert_allclose(drho_of(rep, a), numeric, atol=1e-6)

    def test_drho_on_finite_group_raises(self):
        with pytest.raises(EmptyLieAlgebraError):
            drho_of(Base(2), np.zeros((2, 2)), group=Z2())

    def test_rho_dimension_mismatch(self):
        with pytest.raises(StructuralError, match="does not match"):
            rho_of(Base(3), np.eye(2))

    def test_text_form(self):
        assert rep_text(parse_rep("R+P^5+R+P^4", 2)) == "R+P^5+R+P^4"
        assert rep_text(Base(3) * Base(3)) == "V*V"
        assert rep_text(parse_rep("(V*V)^2", 3)) == "(V*V)^2"
        assert parse_rep("(R+V)^5", 3).dim == 20

    @pytest.mark.parametrize("text", ["R+", "V^", "(V+R", "Q", "R[0:1]", "V V"])
    def test_malformed_text(self, text):
        with pytest.raises(StructuralError):
            parse_rep(text, 3)


_ATOMS = st.sampled_from([Scalar(), Pseudoscalar(), Base(3), Base(3, (0, 2))])
_REPS = st.recursive(
    _ATOMS,
    lambda children: st.one_of(
        st.tuples(children, children).map(lambda p: p[0] + p[1]),
        st.tuples(children, children).map(lambda p: p[0] * p[1]),
    ),
    max_leaves=4,
)


class TestRepTextProperties:
    @settings(max_examples=60, deadline=None)
    @given(_REPS)
    def test_parse_inverts_text(self, rep):
        assert parse_rep(rep_text(rep), 3) == rep

    @settings(max_examples=30, deadline=None)
    @given(_REPS, st.integers(min_value=0, max_value=2**32 - 1))
    def test_rho_shape_matches_dim(self, rep, seed):
        g = sample_group_element(O3(), np.random.default_rng(seed))
        assert rho_of(rep, g).shape == (rep.dim, rep.dim)


class TestCatalog:
    """Locomotion environment reps."""

    def test_hopper(self):
        state, action, group = mujoco_catalog("Hopper")
        assert group.name == "Z2"
        assert state.dim == 11
        assert action.dim == 3

    def test_walker(self):
        state, action, _ = mujoco_catalog("Walker2d")
        assert state.dim == 17
        assert action.dim == 6

    def test_swimmer_flagged_reading(self):
        state, _, group = mujoco_catalog("Swimmer")
        assert group.name == "Z2xZ2"
        assert state.dim == 10
        row = next(r for r in catalog_report() if r["environment"] == "Swimmer")
        assert row["flagged"] is True

    def test_catalog_reps_are_homomorphisms(self):
        rng = np.random.default_rng(2)
        for row in catalog_report():
            state, action, group = mujoco_catalog(row["environment"])
            for _ in range(10):
                g = sample_group_element(group, rng)
                h = sample_group_element(group, rng)
                for rep in (state, action):
                    lhs = rho_of(rep, g @ h)
                    rhs = rho_of(rep, g) @ rho_of(rep, h)
                    assert np.linalg.norm(lhs - rhs) < 1e-7

    def test_unknown_environment(self):
        with pytest.raises(UnknownEnvironmentError):
            mujoco_catalog("Pong")
        with pytest.raises(KeyError):
            mujoco_catalog("Pong")
