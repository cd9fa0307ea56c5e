import numpy as np
import pytest
from scipy.integrate import solve_ivp

from dunkl import dihedral_connection, dunkl_family, three_line_connection
from errors import PoleError
from monodromy import (
    FuchsianSystem,
    MonodromyRep,
    Probe,
    canonical_loops,
    irreducibility_conditions,
    monodromy_rep,
    product_relation_residual,
    reducibility_detect,
    restrict_to_line,
    transport,
    transport_polyline,
)
from monodromy.fuchsian import GOLDEN
from monodromy.loops import angular_order


def _circle(center: complex, radius: float, count: int = 256) -> np.ndarray:
    theta = np.linspace(0, 2 * np.pi, count + 1)
    vertices = center + radius * np.exp(1j * theta)
    vertices[-1] = vertices[0]
    return vertices


def test_restrict_to_line_solves_for_the_poles() -> None:
    conn = three_line_connection(1, 1, 1)
    system = restrict_to_line(conn, [1, 2], [1, 5])
    np.testing.assert_allclose(system.poles, [-1, -2.5, -4])
    np.testing.assert_allclose(system.residues, conn.residues)
    assert system.basepoint == 0

    dihedral = restrict_to_line(dihedral_connection(0.3), [1, 0.3 + 2j], [1, 5 - 1j])
    assert len(set(np.round(dihedral.poles, 9))) == 4


def test_restriction_line_through_the_origin_is_degenerate() -> None:
    with pytest.raises(PoleError):
        _ = restrict_to_line(three_line_connection(1, 1, 1), [1, 2], [0, 0])


def test_restriction_line_parallel_to_a_singular_line_is_degenerate() -> None:
    with pytest.raises(PoleError):
        _ = restrict_to_line(three_line_connection(1, 1, 1), [1, 1], [1, 5])


def test_angular_order() -> None:
    assert angular_order(-10, [1, 2, 3]) == [0, 1, 2]
    assert angular_order(-10 - 10j, [1, 1j, -1, -1j]) == [2, 1, 0, 3]


def test_single_pole_loop_winds_once() -> None:
    system = FuchsianSystem(np.array([0j]), np.zeros((1, 2, 2), dtype=np.complex128), 1 + 0j)
    (loop,) = canonical_loops(system)
    assert loop.winding_number(0) == 1
    assert loop.min_distance([0]) == pytest.approx(0.25, rel=1e-2)


def test_keyhole_loops_wind_around_their_own_pole_only() -> None:
    poles = np.array([1, 2, 3, 2 + 1j, -1j], dtype=np.complex128)
    system = FuchsianSystem(poles, np.zeros((5, 2, 2), dtype=np.complex128), -10 + 0j)
    loops = canonical_loops(system)
    assert sorted(loop.target for loop in loops) == list(range(5))
    for loop in loops:
        for i, pole in enumerate(poles):
            assert loop.winding_number(pole) == (1 if i == loop.target else 0)


def test_too_large_keyhole_radius_is_rejected() -> None:
    system = FuchsianSystem(
        np.array([1, 1.1], dtype=np.complex128), np.zeros((2, 2, 2), dtype=np.complex128), 0j
    )
    with pytest.raises(PoleError):
        _ = canonical_loops(system, radius=0.5)


def test_transport_of_trivial_system_is_identity() -> None:
    y = transport_polyline(_circle(0, 1), [0.2, -0.3j], np.zeros((2, 2, 2)))
    np.testing.assert_allclose(y, np.eye(2), atol=1e-14)


def test_transport_around_a_diagonal_pole() -> None:
    a = 0.3
    y = transport_polyline(_circle(0, 1), [0], [np.diag([a, 0])])
    np.testing.assert_allclose(y, np.diag([np.exp(2j * np.pi * a), 1]), atol=1e-8)


def test_transport_around_all_poles_of_a_scalar_system() -> None:
    residues = [0.3 * np.eye(2), 0.2 * np.eye(2)]
    y = transport_polyline(_circle(0.5, 3), [0, 1], residues)
    np.testing.assert_allclose(y, np.exp(2j * np.pi * 0.5) * np.eye(2), atol=1e-8)


def test_transport_matches_a_reference_integration(rng: np.random.Generator) -> None:
    poles = np.array([0, 1, 0.4 + 0.8j])
    residues = 0.3 * (rng.normal(size=(3, 2, 2)) + 1j * rng.normal(size=(3, 2, 2)))
    center, radius = 0.5 + 0.2j, 2.0

    def derivative(theta: float, y_flat: np.ndarray) -> np.ndarray:
        turn = radius * np.exp(1j * theta)
        omega = np.einsum("i,ijk->jk", 1j * turn / (center + turn - poles), residues)
        return (omega @ y_flat.reshape(2, 2)).reshape(-1)

    start = np.eye(2, dtype=np.complex128).reshape(-1)
    reference = solve_ivp(
        derivative, (0, 2 * np.pi), start, method="DOP853", rtol=1e-11, atol=1e-12
    )
    assert reference.success
    y = transport_polyline(_circle(center, radius), poles, residues)
    np.testing.assert_allclose(y, reference.y[:, -1].reshape(2, 2), atol=1e-8)


def test_three_line_generators_have_expected_spectra(three_line_half_rep: MonodromyRep) -> None:
    for m in three_line_half_rep.generators:
        values = np.sort_complex(np.linalg.eigvals(m))
        np.testing.assert_allclose(values, [-1, 1], atol=1e-6)
    defects = three_line_half_rep.eigenvalue_defects()
    assert all(d is not None and d < 1e-6 for d in defects)
    assert product_relation_residual(three_line_half_rep) < 1e-6


def test_dihedral_product_relation(dihedral_03_rep: MonodromyRep) -> None:
    np.testing.assert_allclose(
        dihedral_03_rep.product(), np.exp(2j * np.pi * 0.6) * np.eye(2), atol=1e-6
    )
    for m, a in zip(dihedral_03_rep.generators, dihedral_03_rep.traces):
        assert np.linalg.det(m) == pytest.approx(np.exp(2j * np.pi * a), abs=1e-6)


def test_third_roots_satisfy_the_product_relation() -> None:
    rep = monodromy_rep(three_line_connection(1 / 3, 1 / 3, 1 / 3))
    assert product_relation_residual(rep) < 1e-6


def test_permuted_generators_are_reported(dihedral_03_rep: MonodromyRep) -> None:
    g = dihedral_03_rep.generators
    permuted = MonodromyRep(
        generators=g[[1, 0, 3, 2]],
        c=dihedral_03_rep.c,
        traces=dihedral_03_rep.traces,
        line_indices=dihedral_03_rep.line_indices,
        probe=dihedral_03_rep.probe,
        poles=dihedral_03_rep.poles,
    )
    assert np.isfinite(product_relation_residual(permuted))


def test_trivial_representation_has_no_residual() -> None:
    rep = monodromy_rep(dihedral_connection(0.0))
    np.testing.assert_allclose(rep.generators, np.array([np.eye(2)] * 4), atol=1e-14)
    assert product_relation_residual(rep) < 1e-12


def test_resonant_traces_skip_the_eigenvalue_check() -> None:
    rep = monodromy_rep(three_line_connection(1, 0.5, 0.5))
    assert rep.resonant
    defects = rep.eigenvalue_defects()
    assert defects[rep.line_indices.index(0)] is None


def test_reversed_loop_inverts_transport(dihedral_03) -> None:
    system = restrict_to_line(dihedral_03, Probe.default().direction, Probe.default().basepoint)
    for loop in canonical_loops(system)[:2]:
        forward = transport(system, loop)
        backward = transport(system, loop.reversed())
        np.testing.assert_allclose(forward @ backward, np.eye(2), atol=1e-8)
        refined = transport(system, loop.refined(2))
        np.testing.assert_allclose(refined, forward, atol=1e-8)


def test_generator_traces_do_not_depend_on_the_restriction_line(
    dihedral_03_rep: MonodromyRep,
) -> None:
    other = Probe(
        np.array([1, 2 + 0.3j], dtype=np.complex128),
        np.array([1, 0.5 + 2j], dtype=np.complex128),
    )
    rep = monodromy_rep(dihedral_connection(0.3), probe=other)
    for line in range(4):
        assert np.trace(rep.by_line(line)) == pytest.approx(
            np.trace(dihedral_03_rep.by_line(line)), abs=1e-6
        )


def test_irreducibility_of_equal_weights() -> None:
    report = irreducibility_conditions([0.3] * 4)
    values = sorted({round(s.value, 9) for s in report.subset_differences})
    assert values == pytest.approx([-1.2, -0.6, 0.0, 0.6, 1.2])
    assert report.non_integral
    assert not report.differences_off_even
    assert not report.irreducible_by_parity
    assert report.irreducible_unless_positive_even


def test_irreducibility_conditions_examples() -> None:
    assert not irreducibility_conditions([1, 1, 1]).non_integral
    report = irreducibility_conditions([0.5, 0.5, 1 / 3])
    assert len(report.subset_differences) == 8
    assert report.irreducible_by_parity


def test_irreducibility_conditions_limit_the_subset_scan() -> None:
    with pytest.raises(ValueError):
        _ = irreducibility_conditions([0.1] * 21)


def _rep_of(generators: np.ndarray) -> MonodromyRep:
    n = generators.shape[0]
    return MonodromyRep(
        generators=generators,
        c=0j,
        traces=(0j,) * n,
        line_indices=tuple(range(n)),
        probe=Probe.default(),
        poles=np.zeros(n, dtype=np.complex128),
    )


def test_upper_triangular_generators_fix_the_first_axis() -> None:
    generators = np.array([[[2, 1], [0, 0.5]], [[1, 3j], [0, -1]]], dtype=np.complex128)
    report = reducibility_detect(_rep_of(generators))
    assert report.line is not None
    assert report.line.is_infinite


def test_jordan_block_pivot_has_a_single_candidate_line() -> None:
    jordan = np.exp(0.6j) * np.array([[1, 1], [0, 1]])
    upper = np.array([[2, 1j], [0, 0.5]])
    report = reducibility_detect(_rep_of(np.array([jordan, upper], dtype=np.complex128)))
    assert report.defective_generator
    assert report.line is not None
    assert report.line.is_infinite

    lower = upper.T
    report = reducibility_detect(_rep_of(np.array([jordan, lower], dtype=np.complex128)))
    assert report.defective_generator
    assert report.line is None


def test_irreducible_rep_has_no_invariant_line(three_line_half_rep: MonodromyRep) -> None:
    assert reducibility_detect(three_line_half_rep).line is None


def test_degenerate_flat_form_gives_the_basepoint_line() -> None:
    rep = monodromy_rep(dunkl_family(2 + 1j, 0.5))
    line = reducibility_detect(rep).line
    x0 = rep.basepoint
    assert line is not None
    assert complex(line.slope) == pytest.approx(x0[0] / x0[1], abs=1e-6)
    assert x0[0] / x0[1] == pytest.approx(1 / GOLDEN**2)
