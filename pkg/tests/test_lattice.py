"""Lattice models: builders, eta coordinates, metric tensors, MC volumes."""

import json
import math

import numpy as np
import pytest

import mdlvol._kernels as kernels
from mdlvol.errors import NotALatticeError, RejectionRateError
from mdlvol.lattice import (
    EtaCoordinates,
    Lattice,
    build_boolean_lattice,
    build_lattice_from_covers,
    eta_from_distribution,
    hadamard_upper_majorant,
    lattice_from_json,
    lattice_log_volume_mc,
    lattice_volume_bounds,
    limiting_volume_check,
    load_lattice,
    log_simplex_volume,
    metric_tensor,
    sample_eta,
)
from mdlvol.numerics import RngStream

TWO_CHAIN_LOG_VOLUME = math.log(math.pi / 8.0)       # closed form: E[sqrt(t - t^2)]
THREE_CHAIN_LOG_VOLUME = math.log(math.pi / 52.5)    # (pi/4) B(3, 3/2) / Gamma(3)


def chain(length):
    return build_lattice_from_covers(length, [(i, i + 1) for i in range(length - 1)])


def diamond():
    # 0 < a, b, c < 1 with a, b, c pairwise incomparable.
    return build_lattice_from_covers(
        5, [(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)])


class TestBooleanBuilder:
    def test_bool_2_structure(self):
        lat = build_boolean_lattice(2)
        assert lat.size == 4
        assert list(lat.labels) == ["00", "01", "10", "11"]
        # zeta[i, j] = 1 iff subset i is contained in subset j
        expected_zeta = np.array([
            [1, 1, 1, 1],
            [0, 1, 0, 1],
            [0, 0, 1, 1],
            [0, 0, 0, 1],
        ], dtype=np.uint8)
        np.testing.assert_array_equal(lat.zeta, expected_zeta)
        # join = bitwise union
        expected_join = np.array([
            [0, 1, 2, 3],
            [1, 1, 3, 3],
            [2, 3, 2, 3],
            [3, 3, 3, 3],
        ])
        np.testing.assert_array_equal(lat.join_table, expected_join)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 6])
    def test_sizes_and_validation_pass(self, n):
        lat = build_boolean_lattice(n)
        assert lat.size == 2 ** n
        lat.validate()  # O(D^3) structural audit; raises on any defect

    def test_linear_extension_makes_zeta_upper_triangular(self):
        lat = build_boolean_lattice(4)
        assert np.array_equal(lat.zeta, np.triu(lat.zeta))
        assert np.all(np.diag(lat.zeta) == 1)

    def test_least_element_below_everything(self):
        lat = build_boolean_lattice(3)
        assert np.all(lat.zeta[0] == 1)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            build_boolean_lattice(0)
        with pytest.raises(ValueError):
            build_boolean_lattice(21)


class TestCoverBuilder:
    def test_chain_structure(self):
        lat = chain(3)
        np.testing.assert_array_equal(lat.zeta, np.triu(np.ones((3, 3), np.uint8)))
        np.testing.assert_array_equal(
            lat.join_table, np.maximum.outer(np.arange(3), np.arange(3)))

    def test_diamond_joins(self):
        lat = diamond()
        lat.validate()
        # Incomparable middle elements join at the top.
        assert lat.join_table[1, 2] == 4
        assert lat.join_table[1, 3] == 4
        assert lat.join_table[2, 3] == 4

    def test_reorders_to_linear_extension(self):
        # Feed covers in an order that lists the top first.
        lat = build_lattice_from_covers(3, [(2, 1), (1, 0)], labels=["c", "b", "a"])
        assert list(lat.labels) == ["c", "b", "a"][::-1]
        assert np.array_equal(lat.zeta, np.triu(lat.zeta))

    def test_roundtrip_through_cover_pairs(self):
        src = build_boolean_lattice(2)
        rebuilt = build_lattice_from_covers(src.size, src.cover_pairs(),
                                            labels=list(src.labels))
        np.testing.assert_array_equal(src.zeta, rebuilt.zeta)
        np.testing.assert_array_equal(src.join_table, rebuilt.join_table)
        assert src.labels == rebuilt.labels

    def test_cycle_rejected(self):
        with pytest.raises(NotALatticeError):
            build_lattice_from_covers(2, [(0, 1), (1, 0)])

    def test_two_minimal_elements_rejected(self):
        with pytest.raises(NotALatticeError):
            build_lattice_from_covers(3, [(0, 2), (1, 2)])

    def test_missing_join_rejected(self):
        # Bowtie: a, b < c, d with no least upper bound for (a, b).
        covers = [(0, 1), (0, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 5), (4, 5)]
        with pytest.raises(NotALatticeError, match="least upper bound"):
            build_lattice_from_covers(6, covers)

    def test_out_of_range_cover_rejected(self):
        with pytest.raises(ValueError):
            build_lattice_from_covers(2, [(0, 2)])


class TestSerialization:
    def test_json_roundtrip(self):
        src = diamond()
        clone = lattice_from_json(src.to_json())
        np.testing.assert_array_equal(src.zeta, clone.zeta)
        np.testing.assert_array_equal(src.join_table, clone.join_table)
        assert src.labels == clone.labels

    def test_json_payload_shape(self):
        payload = json.loads(build_boolean_lattice(1).to_json())
        assert payload["size"] == 2
        assert {"size", "cover_pairs", "labels"} <= set(payload)

    def test_load_lattice_builtin_spec(self):
        lat = load_lattice("bool:3")
        assert lat.size == 8

    def test_load_lattice_file(self, tmp_path):
        p = tmp_path / "lat.json"
        p.write_text(diamond().to_json(), encoding="utf-8")
        lat = load_lattice(str(p))
        assert lat.size == 5

    def test_load_lattice_bad_spec(self):
        with pytest.raises(ValueError):
            load_lattice("bool:zero")


class TestStructuralValidation:
    def test_doctored_zeta_rejected(self):
        lat = build_boolean_lattice(2)
        bad = np.array(lat.zeta, copy=True)
        bad[1, 1] = 0  # breaks reflexivity
        with pytest.raises(NotALatticeError):
            Lattice(size=4, zeta=bad, join_table=np.array(lat.join_table),
                    labels=lat.labels)

    def test_doctored_join_rejected(self):
        lat = build_boolean_lattice(2)
        bad = np.array(lat.join_table, copy=True)
        bad[1, 2] = 1  # 01 v 10 must be 11 (also breaks symmetry)
        with pytest.raises(NotALatticeError):
            Lattice(size=4, zeta=np.array(lat.zeta), join_table=bad,
                    labels=lat.labels)

    def test_non_least_join_caught_by_validate(self):
        # Symmetric doctoring that passes the cheap upper-bound screen:
        # claim 01 v 10 = 11 is wrong only in the full audit? No cheap
        # defect exists for bool:2, so use a chain where join(0,1) is set
        # to the top instead of the max.
        join = np.maximum.outer(np.arange(3), np.arange(3))
        join[0, 1] = join[1, 0] = 2  # an upper bound, but not the least one
        lat = Lattice(size=3, zeta=np.triu(np.ones((3, 3), np.uint8)),
                      join_table=join, labels=("a", "b", "c"))
        with pytest.raises(NotALatticeError, match="least upper bound"):
            lat.validate()

    def test_transitivity_enforced(self):
        zeta = np.triu(np.ones((4, 4), np.uint8))
        zeta[1, 3] = 0  # 1 <= 2 <= 3 but not 1 <= 3; least element intact
        join = np.maximum.outer(np.arange(4), np.arange(4))
        with pytest.raises(NotALatticeError, match="transitive"):
            Lattice(size=4, zeta=zeta, join_table=join, labels=tuple("abcd"))

    def test_shape_errors_are_value_errors(self):
        with pytest.raises(ValueError):
            Lattice(size=2, zeta=np.ones((3, 3), np.uint8),
                    join_table=np.zeros((2, 2), int), labels=("a", "b"))
        with pytest.raises(ValueError):
            Lattice(size=1, zeta=np.ones((1, 1), np.uint8),
                    join_table=np.zeros((1, 1), int), labels=())


class TestEtaCoordinates:
    def test_uniform_boolean_2(self):
        lat = build_boolean_lattice(2)
        eta = eta_from_distribution(lat, np.full(4, 0.25))
        np.testing.assert_allclose(eta.values, [1.0, 0.5, 0.5, 0.25], atol=1e-15)

    def test_chain_upset_sums(self):
        lat = chain(3)
        eta = eta_from_distribution(lat, [0.2, 0.3, 0.5])
        np.testing.assert_allclose(eta.values, [1.0, 0.8, 0.5], atol=1e-15)

    def test_point_mass_on_top(self):
        lat = build_boolean_lattice(2)
        eta = eta_from_distribution(lat, [0.0, 0.0, 0.0, 1.0])
        np.testing.assert_allclose(eta.values, [1.0, 1.0, 1.0, 1.0], atol=1e-15)

    def test_rejects_bad_distributions(self):
        lat = build_boolean_lattice(1)
        with pytest.raises(ValueError):
            eta_from_distribution(lat, [0.5, 0.6])
        with pytest.raises(ValueError):
            eta_from_distribution(lat, [1.2, -0.2])
        with pytest.raises(ValueError):
            eta_from_distribution(lat, [0.5, 0.25, 0.25])

    def test_eta_coordinates_validation(self):
        with pytest.raises(ValueError):
            EtaCoordinates(np.array([0.9, 0.5]))  # first coordinate must be 1
        with pytest.raises(ValueError):
            EtaCoordinates(np.array([1.0, 1.5]))  # out of [0, 1]

    def test_sample_eta_fields(self):
        lat = build_boolean_lattice(3)
        delta, eta = sample_eta(lat, RngStream(0))
        assert delta.shape == (8,)
        assert delta.min() > 0.0
        assert delta.sum() == pytest.approx(1.0, abs=1e-12)
        assert eta.values[0] == 1.0
        # order compatibility: i <= j implies eta_i >= eta_j
        for i in range(8):
            for j in range(8):
                if lat.zeta[i, j]:
                    assert eta.values[i] >= eta.values[j] - 1e-12

    def test_sample_eta_deterministic(self):
        lat = build_boolean_lattice(2)
        d1, e1 = sample_eta(lat, RngStream(5))
        d2, e2 = sample_eta(lat, RngStream(5))
        np.testing.assert_array_equal(d1, d2)
        np.testing.assert_array_equal(e1.values, e2.values)


class TestMetricTensor:
    def test_uniform_boolean_2_reduced_exact(self):
        lat = build_boolean_lattice(2)
        eta = eta_from_distribution(lat, np.full(4, 0.25))
        g = np.asarray(metric_tensor(lat, eta))
        expected = np.array([
            [0.25, 0.0, 0.125],
            [0.0, 0.25, 0.125],
            [0.125, 0.125, 0.1875],
        ])
        np.testing.assert_allclose(g, expected, atol=1e-15)

    def test_full_metric_first_row_vanishes(self):
        lat = build_boolean_lattice(2)
        eta = eta_from_distribution(lat, [0.1, 0.2, 0.3, 0.4])
        g = np.asarray(metric_tensor(lat, eta, reduced=False))
        assert g.shape == (4, 4)
        np.testing.assert_allclose(g[0], 0.0, atol=1e-15)
        np.testing.assert_allclose(g[:, 0], 0.0, atol=1e-15)

    def test_two_chain_scalar_metric(self):
        lat = chain(2)
        eta = eta_from_distribution(lat, [0.3, 0.7])
        g = np.asarray(metric_tensor(lat, eta))
        assert g.shape == (1, 1)
        assert g[0, 0] == pytest.approx(0.7 * 0.3, abs=1e-15)

    def test_metric_is_psd_at_random_interior_point(self):
        lat = build_boolean_lattice(3)
        _, eta = sample_eta(lat, RngStream(9))
        g = np.asarray(metric_tensor(lat, eta))
        w = np.linalg.eigvalsh(g)
        assert w.min() > 0.0

    def test_matches_covariance_construction(self):
        # Dual route: G'_{ ij } = Cov(1[x >= i], 1[x >= j]) under delta.
        lat = build_boolean_lattice(2)
        probs = np.array([0.4, 0.3, 0.2, 0.1])
        eta = eta_from_distribution(lat, probs)
        g = np.asarray(metric_tensor(lat, eta))
        up = np.asarray(lat.zeta, dtype=float)  # up[i, x] = 1 iff x >= i
        cov = np.zeros((4, 4))
        for i in range(4):
            for j in range(4):
                mask = up[i] * up[j]
                cov[i, j] = float(mask @ probs - (up[i] @ probs) * (up[j] @ probs))
        np.testing.assert_allclose(g, cov[1:, 1:], atol=1e-14)


class TestVolumeMonteCarlo:
    def test_two_chain_matches_closed_form(self):
        est = lattice_log_volume_mc(chain(2), samples=100000, rng=RngStream(7))
        assert abs(est.value - TWO_CHAIN_LOG_VOLUME) < 0.01
        assert abs(est.value - TWO_CHAIN_LOG_VOLUME) <= 3.5 * est.stderr

    def test_three_chain_matches_closed_form(self):
        est = lattice_log_volume_mc(chain(3), samples=100000, rng=RngStream(8))
        assert abs(est.value - THREE_CHAIN_LOG_VOLUME) <= 3.5 * est.stderr

    def test_boolean_lattice_from_distribution_identity(self):
        # bool:1 is the 2-chain in disguise.
        est = lattice_log_volume_mc(build_boolean_lattice(1), samples=50000,
                                    rng=RngStream(3))
        assert abs(est.value - TWO_CHAIN_LOG_VOLUME) <= 3.5 * est.stderr

    @pytest.mark.parametrize("make", [lambda: build_boolean_lattice(2),
                                      lambda: build_boolean_lattice(3),
                                      diamond])
    def test_sandwich_bounds_bracket_estimate(self, make):
        est = lattice_log_volume_mc(make(), samples=8000, rng=RngStream(11))
        assert est.lower <= est.value + 3 * est.stderr
        assert est.value <= est.upper + 3 * est.stderr

    def test_bounds_helper_matches_estimate(self):
        lat = build_boolean_lattice(2)
        lo, up = lattice_volume_bounds(lat, samples=4000, rng=RngStream(13))
        est = lattice_log_volume_mc(lat, samples=4000, rng=RngStream(13))
        assert lo == est.lower
        assert up == est.upper

    def test_singleton_lattice_volume_is_simplex_volume(self):
        lat = build_lattice_from_covers(1, [])
        est = lattice_log_volume_mc(lat, samples=100, rng=RngStream(0))
        assert est.value == pytest.approx(log_simplex_volume(1), abs=1e-12)
        assert est.stderr == 0.0

    def test_deterministic_and_thread_invariant(self):
        lat = build_boolean_lattice(3)
        a = lattice_log_volume_mc(lat, samples=9000, rng=RngStream(1), threads=1)
        b = lattice_log_volume_mc(lat, samples=9000, rng=RngStream(1), threads=4)
        assert a.value == b.value
        assert a.stderr == b.stderr

    def test_rejection_policy_enforced(self, monkeypatch):
        real = kernels.lattice_draw_stats

        def mostly_rejecting(eta, join_red, ladder):
            h, d, ok = real(eta, join_red, ladder)
            ok = np.array(ok, copy=True)
            ok[::2] = False  # reject half the draws
            h = np.array(h, copy=True)
            h[~ok] = np.nan
            return h, d, ok

        monkeypatch.setattr(kernels, "lattice_draw_stats", mostly_rejecting)
        with pytest.raises(RejectionRateError):
            lattice_log_volume_mc(build_boolean_lattice(2), samples=2000,
                                  rng=RngStream(0))

    def test_rejected_draws_are_counted(self, monkeypatch):
        real = kernels.lattice_draw_stats
        state = {"first": True}

        def reject_a_few(eta, join_red, ladder):
            h, d, ok = real(eta, join_red, ladder)
            if state["first"]:
                state["first"] = False
                ok = np.array(ok, copy=True)
                ok[:3] = False
                h = np.array(h, copy=True)
                h[:3] = np.nan
            return h, d, ok

        monkeypatch.setattr(kernels, "lattice_draw_stats", reject_a_few)
        est = lattice_log_volume_mc(build_boolean_lattice(2), samples=2000,
                                    rng=RngStream(0))
        assert est.rejected == 3
        assert est.samples == 1997

    def test_sample_count_validation(self):
        with pytest.raises(ValueError):
            lattice_log_volume_mc(build_boolean_lattice(1), samples=0,
                                  rng=RngStream(0))


class TestAsymptotics:
    def test_hadamard_majorant_formula(self):
        d = 6
        ref = (5 / 2.0) * math.log(0.25) - math.lgamma(6)
        assert hadamard_upper_majorant(d) == pytest.approx(ref, rel=1e-13)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_majorant_dominates_mc_upper_bound(self, n):
        lat = build_boolean_lattice(n)
        est = lattice_log_volume_mc(lat, samples=4000, rng=RngStream(n))
        assert est.upper <= hadamard_upper_majorant(lat.size) + 3 * est.stderr

    def test_majorant_diverges_to_minus_infinity(self):
        vals = [hadamard_upper_majorant(d) for d in (4, 8, 16, 64, 256)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert vals[-1] < -1000.0

    def test_limiting_volume_check_boolean_family(self):
        rows = limiting_volume_check(
            [build_boolean_lattice(n) for n in (1, 2, 3, 4, 5)],
            samples=3000, rng=RngStream(4))
        sizes = [r[0] for r in rows]
        uppers = [r[1] for r in rows]
        assert sizes == [2, 4, 8, 16, 32]
        peak = uppers.index(max(uppers))
        assert all(a > b for a, b in zip(uppers[peak:], uppers[peak + 1:]))

    def test_limiting_volume_check_requires_growing_sizes(self):
        with pytest.raises(ValueError):
            limiting_volume_check([build_boolean_lattice(2),
                                   build_boolean_lattice(1)],
                                  samples=100, rng=RngStream(0))

    def test_log_simplex_volume(self):
        assert log_simplex_volume(1) == 0.0
        assert log_simplex_volume(4) == pytest.approx(-math.lgamma(4), rel=1e-14)
        with pytest.raises(ValueError):
            log_simplex_volume(0)
