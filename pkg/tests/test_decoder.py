"""Measurement side: grand operator, pipeline, tables, equivalence."""

import numpy as np
import pytest

from sdc import hadamard
from sdc.bell import BellLabel, all_labels, bell_state, compact_bell_state, compact_partner
from sdc.decoder import (
    build_decode_table,
    decode_grand,
    decode_pipeline,
    grand_operator,
    outcome_distribution,
    pipeline_report,
)
from sdc.errors import NonDeterministicOutcome, OrderMismatch
from sdc.hilbert import StateVector


class TestGrandOperator:
    def test_maps_compact_states_to_product_kets(self):
        N, H = 1, hadamard.build(2)
        op = grand_operator(N, H)
        for lab in all_labels(N):
            out = op @ compact_bell_state(N, lab, H).amp
            expected = np.zeros(4, dtype=complex)
            expected[(lab.j - 1) * 2 + (compact_partner(N, lab.k, lab.r, lab.j) - 1)] = 1.0
            assert np.max(np.abs(out - expected)) < 1e-12

    @pytest.mark.parametrize("N", [1, 2, 4])
    def test_unitary_involution(self, N):
        m = grand_operator(N, hadamard.build(2 * N)).toarray()
        eye = np.eye(4 * N * N)
        assert np.max(np.abs(m.conj().T @ m - eye)) < 1e-10
        assert np.max(np.abs(m @ m - eye)) < 1e-10

    @pytest.mark.parametrize("N", [1, 2, 4])
    def test_matches_outer_product_oracle(self, N):
        # independent route: sum of |product ket><compact state| outer products
        H = hadamard.build(2 * N)
        dim = 2 * N
        oracle = np.zeros((dim * dim, dim * dim), dtype=complex)
        for lab in all_labels(N):
            out = np.zeros(dim * dim, dtype=complex)
            out[(lab.j - 1) * dim + (compact_partner(N, lab.k, lab.r, lab.j) - 1)] = 1.0
            oracle += np.outer(out, compact_bell_state(N, lab, H).amp.conj())
        assert np.max(np.abs(grand_operator(N, H).toarray() - oracle)) < 1e-14

    def test_order_mismatch(self):
        with pytest.raises(OrderMismatch):
            grand_operator(2, hadamard.build(2))


class TestGrandDecoding:
    def test_base_state_outcome(self):
        N, H = 1, hadamard.build(2)
        top, dist = decode_grand(N, H, bell_state(N, BellLabel(1, -1, 1), H))
        assert top.probability > 1 - 1e-10
        assert len(dist) == 1
        table = build_decode_table(N, H)
        assert table.label_for(top) == BellLabel(1, -1, 1)

    def test_superposition_splits_evenly(self):
        N, H = 1, hadamard.build(2)
        a = bell_state(N, BellLabel(1, -1, 1), H)
        b = bell_state(N, BellLabel(1, +1, 1), H)
        s = StateVector(a.dims, (a.amp + b.amp) / np.sqrt(2))
        _, dist = decode_grand(N, H, s)
        assert len(dist) == 2
        assert all(abs(o.probability - 0.5) < 1e-12 for o in dist)

    @pytest.mark.parametrize("N", [1, 2, 4])
    def test_all_inputs_deterministic_and_distinct(self, N):
        H = hadamard.build(2 * N)
        grand = grand_operator(N, H)
        seen = set()
        for lab in all_labels(N):
            top, dist = decode_grand(N, H, bell_state(N, lab, H), grand=grand)
            assert top.probability > 1 - 1e-10
            assert abs(sum(o.probability for o in dist) - 1.0) < 1e-12
            seen.add((top.first, top.second))
        assert len(seen) == 4 * N * N


class TestDecodeTable:
    @pytest.mark.parametrize("N,expected", [(1, 4), (2, 16), (8, 256)])
    def test_injective_tables(self, N, expected):
        table = build_decode_table(N, hadamard.build(2 * N))
        assert len(table.entries) == expected

    def test_round_trip_through_the_table(self):
        from sdc.analysis import run_protocol

        N, H = 2, hadamard.build(4)
        table = build_decode_table(N, H)
        for m in range(16):
            assert run_protocol(N, H, m, table=table) == m


class TestPipeline:
    def test_single_pair_reduces_to_standard_dense_coding(self):
        # controlled swap + one channel Hadamard (the mixer is trivial)
        N, H, HN = 1, hadamard.build(2), hadamard.build(1)
        outcomes = set()
        for lab in all_labels(N):
            top, _ = decode_pipeline(N, H, HN, bell_state(N, lab, H))
            assert top.probability > 1 - 1e-10
            outcomes.add((top.first, top.second))
        assert len(outcomes) == 4

    def test_two_pair_sweep_is_deterministic(self):
        N, H, HN = 2, hadamard.build(4), hadamard.build(2)
        report = pipeline_report(N, H, HN)
        assert report["deterministic"] is True
        assert report["distinct_outcomes"] == 16
        assert report["partitions_equivalent"] is True

    @pytest.mark.parametrize("N", [1, 2])
    def test_partition_equivalence_with_grand(self, N):
        report = pipeline_report(N, hadamard.build(2 * N), hadamard.build(N))
        assert report["partitions_equivalent"] is True
        assert report["mixer_reading"] == "pm1-entries-over-sqrt-dim"

    def test_four_pair_sweep_remains_deterministic(self):
        # measured fact, stronger than anything required of the pipeline
        report = pipeline_report(4, hadamard.build(8), hadamard.build(4))
        assert report["deterministic"] is True
        assert report["partitions_equivalent"] is True

    def test_eight_pair_sweep_loses_determinism(self):
        # measured fact: beyond four channel pairs the pipeline spreads some
        # inputs over several outcomes, so no decode table exists for it
        report = pipeline_report(8, hadamard.build(16), hadamard.build(8))
        assert report["deterministic"] is False
        with pytest.raises(NonDeterministicOutcome):
            build_decode_table(8, hadamard.build(16), path="pipeline", HN=hadamard.build(8))


def test_outcome_distribution_completeness():
    N, H = 2, hadamard.build(4)
    s = bell_state(N, BellLabel(2, -1, 3), H)
    dist = outcome_distribution(s)
    assert abs(sum(o.probability for o in dist) - 1.0) < 1e-12


class TestGuards:
    """The convention checks must fail loudly if an internal map regresses."""

    def test_partner_collision_halts_construction(self, monkeypatch):
        import sdc.decoder as dec
        from sdc.errors import NonInvolutory

        monkeypatch.setattr(dec, "compact_partner", lambda N, k, r, m: m)
        with pytest.raises(NonInvolutory):
            dec.grand_operator(1, hadamard.build(2))

    def test_colliding_decoder_is_reported(self, monkeypatch):
        import sdc.decoder as dec
        from sdc.decoder import MeasurementOutcome
        from sdc.errors import CollisionDetected

        monkeypatch.setattr(
            dec,
            "decode_grand",
            lambda N, H, s, grand=None: (MeasurementOutcome(0, 0, 1.0), []),
        )
        with pytest.raises(CollisionDetected):
            dec.build_decode_table(1, hadamard.build(2))

    def test_unrelatable_compact_family_is_reported(self, monkeypatch):
        import sdc.bell as bell_mod
        from sdc.errors import NoLocalMapFound
        from sdc.hilbert import StateVector

        def twisted(N, label, H):
            state = compact_bell_state(N, label, H)
            return StateVector(state.dims, state.amp * np.exp(0.1j))

        monkeypatch.setattr(bell_mod, "compact_bell_state", twisted)
        with pytest.raises(NoLocalMapFound):
            bell_mod.derive_compact_relabel(1, hadamard.build(2))
