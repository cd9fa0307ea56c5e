import numpy as np
import pytest

from dunkl import (
    StandardConnection,
    b_parameters,
    dihedral_connection,
    dunkl_criterion_3,
    dunkl_family,
    three_line_connection,
)
from errors import FlatnessError, GeometryError
from flat_forms import (
    FlatnessReport,
    action_on_forms_matrix,
    euler_direction_defect,
    flatness_report,
    form_signature,
    interlace,
    invariant_form_of_pair,
    normalized_form,
    q_from_generators,
    q_operator,
    signature_formula,
    three_line_eigen_arguments,
)
from herm_geom import HermitianForm2
from monodromy import MonodromyRep, Probe, monodromy_rep


def _turn(t: float) -> complex:
    return complex(np.exp(2j * np.pi * t))


def _report(conn) -> FlatnessReport:
    return flatness_report(q_operator(monodromy_rep(conn)))


def test_action_of_identity() -> None:
    np.testing.assert_allclose(action_on_forms_matrix(np.eye(2)), np.eye(4), atol=1e-15)


def test_action_of_diagonal_unitary_rotates_off_diagonal_coordinates() -> None:
    theta = 0.35
    r = action_on_forms_matrix(np.diag([np.exp(1j * theta), np.exp(-1j * theta)]))
    np.testing.assert_allclose(r[:2, :2], np.eye(2), atol=1e-15)
    c, s = np.cos(2 * theta), np.sin(2 * theta)
    np.testing.assert_allclose(r[2:, 2:], [[c, s], [-s, c]], atol=1e-15)
    np.testing.assert_allclose(r[:2, 2:], 0, atol=1e-15)


def test_action_matrix_matches_the_action_on_forms(rng: np.random.Generator) -> None:
    for _ in range(10):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        form = HermitianForm2.from_coords(rng.normal(size=4))
        moved = HermitianForm2.from_matrix(a.conj().T @ form.matrix @ a)
        np.testing.assert_allclose(action_on_forms_matrix(a) @ form.coords, moved.coords)


def test_normalized_form_sign_convention() -> None:
    form = normalized_form([-2, 1, 0, 0])
    assert form.frobenius_norm == pytest.approx(1)
    assert form.x0 > 0
    traceless = normalized_form([0, -1, 2, 0])
    assert traceless.x1 > 0
    with pytest.raises(GeometryError):
        _ = normalized_form([0, 0, 0, 0])


def test_trivial_generators_give_zero_q() -> None:
    q = q_from_generators([np.eye(2)] * 3)
    assert q.generator_count == 3
    np.testing.assert_allclose(q.matrix, 0)
    report = flatness_report(q)
    assert report.kernel_dim == 4
    assert report.all_flat


def test_trivial_connection_has_all_forms_flat() -> None:
    report = _report(dunkl_family(2 + 1j, 0.0))
    assert report.all_flat
    assert report.margin == 0


def test_three_line_rep_preserves_one_form() -> None:
    report = _report(three_line_connection(1 / 3, 1 / 3, 1 / 3))
    assert report.kernel_dim == 1
    assert report.min_eig >= -1e-10


def test_three_line_quarter_case_is_definite(three_line_half_rep: MonodromyRep) -> None:
    report = flatness_report(q_operator(three_line_half_rep))
    assert report.kernel_dim == 1
    assert report.definite
    assert report.form is not None
    assert report.form.frobenius_norm == pytest.approx(1)


def test_dihedral_signatures(dihedral_03_report: FlatnessReport) -> None:
    assert dihedral_03_report.kernel_dim == 1
    assert dihedral_03_report.definite
    indefinite = _report(dihedral_connection(0.7))
    assert indefinite.kernel_dim == 1
    assert indefinite.matches_signature((1, 1))
    assert _report(dihedral_connection(1.8)).definite


def test_dihedral_family_always_has_a_flat_form() -> None:
    for a in (0.15, 0.45, 0.55, 1.25, 1.6):
        report = _report(dihedral_connection(a))
        assert report.min_eig < 1e-8
        assert report.kernel_dim >= 1


@pytest.mark.parametrize(
    "b",
    [(0.1, 0.2, 0.3), (0.35, 0.45, 0.6), (0.9, 0.9, 0.9), (0.25, 0.25, 0.25)],
)
def test_signature_of_three_line_form_matches_formula(b) -> None:
    b1, b2, b3 = b
    a = (b2 + b3, b1 + b3, b1 + b2)
    assert b_parameters(*a) == pytest.approx(b)
    p = signature_formula(*b)
    report = _report(three_line_connection(*a))
    assert report.kernel_dim == 1
    assert report.matches_signature((p, 2 - p))


def _a_of(b: np.ndarray) -> tuple[float, float, float]:
    return (float(b[1] + b[2]), float(b[0] + b[2]), float(b[0] + b[1]))


def _off_integers(values: np.ndarray, margin: float = 0.02) -> bool:
    return bool(np.all(np.abs(values - np.round(values)) > margin))


def test_signature_formula_on_random_weights(rng: np.random.Generator) -> None:
    checked = 0
    for b in rng.uniform(0, 1, size=(800, 3)):
        a = _a_of(b)
        if not _off_integers(np.array([*b, b.sum(), *a])):
            continue
        p = signature_formula(*b)
        report = _report(three_line_connection(*a))
        assert report.kernel_dim == 1
        assert report.matches_signature((p, 2 - p)), (b, report.signature)
        checked += 1
        if checked == 300:
            break
    assert checked == 300


def test_signature_formula_examples() -> None:
    assert signature_formula(0.25, 0.25, 0.25) == 0
    assert signature_formula(0.9, 0.9, 0.9) == 2
    assert signature_formula(0.5, 0.25, 0.5) == 1
    with pytest.raises(FlatnessError):
        _ = signature_formula(1.0, 0.2, 0.3)
    with pytest.raises(FlatnessError):
        _ = signature_formula(0.5, 0.2, 0.3)


def test_flat_form_is_covariant_under_conjugation(
    dihedral_03_rep: MonodromyRep, dihedral_03_report: FlatnessReport
) -> None:
    g = np.array([[1, 0.3], [0.2j, 1.5]])
    moved = flatness_report(q_operator(dihedral_03_rep.conjugated(g)))
    assert dihedral_03_report.form is not None and moved.form is not None
    h = dihedral_03_report.form.matrix
    expected = normalized_form(HermitianForm2.from_matrix(g.conj().T @ h @ g).coords)
    np.testing.assert_allclose(moved.form.coords, expected.coords, atol=1e-7)


def test_kernel_dimension_does_not_depend_on_the_restriction_line(
    dihedral_03_report: FlatnessReport,
) -> None:
    probe = Probe(
        np.array([1, 2 + 0.3j], dtype=np.complex128),
        np.array([1, 0.5 + 2j], dtype=np.complex128),
    )
    other = flatness_report(q_operator(monodromy_rep(dihedral_connection(0.3), probe)))
    assert other.kernel_dim == dihedral_03_report.kernel_dim


def test_degenerate_form_points_along_the_euler_direction() -> None:
    rep = monodromy_rep(dunkl_family(2 + 1j, 0.5))
    report = flatness_report(q_operator(rep))
    assert report.kernel_dim >= 1
    assert report.degenerate
    defect = euler_direction_defect(report, rep)
    assert defect is not None
    assert defect < 1e-6


def test_unitary_pair_fixes_the_identity() -> None:
    r = np.diag([_turn(0.07), _turn(0.21)])
    angle = 0.7
    v = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    u = v @ np.diag([1, _turn(0.33)]) @ v.T
    s = np.linalg.inv(u) @ r
    form = invariant_form_of_pair(r, s)
    np.testing.assert_allclose(form.coords, [2**-0.5, 0, 0, 0], atol=1e-8)


def test_pair_form_matches_the_q_kernel() -> None:
    rep = monodromy_rep(three_line_connection(0.5, 0.4, 0.3))
    g1, g2, _ = rep.generators
    r = np.exp(-2j * np.pi * rep.c) * g1
    s = np.linalg.inv(g2)
    pair = invariant_form_of_pair(r, s)
    kernel = flatness_report(q_operator(rep)).form
    assert kernel is not None
    assert 2 * abs(pair.coords @ kernel.coords) == pytest.approx(1, abs=1e-7)


def test_pair_needs_distinct_eigenvalues() -> None:
    with pytest.raises(FlatnessError):
        _ = invariant_form_of_pair(np.eye(2), np.diag([_turn(0.1), _turn(0.2)]))
    with pytest.raises(FlatnessError):
        _ = invariant_form_of_pair(np.diag([2, 0.5]), np.diag([_turn(0.1), _turn(0.2)]))


def test_interlace_examples() -> None:
    assert interlace(_turn(0), _turn(0.5), _turn(0.25), _turn(0.75))
    assert not interlace(_turn(0), _turn(0.1), _turn(0.5), _turn(0.6))
    with pytest.raises(GeometryError):
        _ = interlace(_turn(0), _turn(0), _turn(0.5), _turn(0.6))


def test_interlace_is_symmetric(rng: np.random.Generator) -> None:
    for turns in rng.uniform(size=(50, 4)):
        points = [_turn(t) for t in turns]
        assert interlace(*points) == interlace(points[2], points[3], points[0], points[1])


def test_three_line_arguments_interlace_below_one() -> None:
    assert interlace(*three_line_eigen_arguments(0.3, 0.3, 0.3))


@pytest.mark.parametrize(("b", "definite"), [((0.1, 0.2, 0.3), True), ((0.5, 0.4, 0.35), False)])
def test_interlacing_pair_preserves_a_definite_form(
    b: tuple[float, float, float], definite: bool
) -> None:
    rep = monodromy_rep(three_line_connection(*_a_of(np.array(b))))
    g1, g2, _ = rep.generators
    r = np.exp(-2j * np.pi * rep.c) * g1
    s = np.linalg.inv(g2)
    assert interlace(*np.linalg.eigvals(r), *np.linalg.eigvals(s)) == definite
    (p, q), degenerate = form_signature(invariant_form_of_pair(r, s))
    assert not degenerate
    assert ((p, q) in ((2, 0), (0, 2))) == definite


def test_unitary_three_line_connections_are_dunkl(rng: np.random.Generator) -> None:
    checked = 0
    for a in rng.uniform(0.05, 0.95, size=(200, 3)):
        b = np.array(b_parameters(*a))
        if a.sum() > 1.9 or not _off_integers(np.array([*b, b.sum()]), 0.03):
            continue
        report = _report(three_line_connection(*a))
        assert report.definite == dunkl_criterion_3(*a)[0], a
        checked += 1
        if checked == 40:
            break
    assert checked == 40


def test_definiteness_persists_when_the_weights_shrink(dihedral_03: StandardConnection) -> None:
    three_lines = three_line_connection(0.5, 0.4, 0.3)
    for t in (0.25, 0.5, 0.75, 1.0):
        for conn in (dihedral_03.scaled(t), three_lines.scaled(t)):
            report = _report(conn)
            assert report.kernel_dim == 1
            assert report.definite
