"""
Unit tests for metastable/core/landscape.py

Tests cover:
- Landscape construction and validation errors
- Bottoms, boundaries and communication heights
- Merge tree queries against the direct minimax search
- Restriction below the ground-state barrier
- Allowed neighbourhoods
- JSON loading and saving
"""
import json
from pathlib import Path

import numpy as np
import pytest

from metastable.core.errors import (
    CapExceeded,
    CapExcludesSource,
    DisconnectedGraph,
    EmptyInput,
    EmptySet,
    FullSet,
    GroundMismatch,
    IndexOutOfRange,
    InputError,
    InvalidEdge,
    LandscapeFormatError,
    Overlap,
    SelfLoop,
    SingleGround,
)
from metastable.core.landscape import (
    MergeTree,
    allowed_neighborhood,
    barrier_filtration,
    bottom,
    boundary_sets,
    build_landscape,
    comm_height,
    load_landscape,
    restrict_to_omega_bar,
    save_landscape,
)

pytestmark = pytest.mark.unit


class TestBuildLandscape:
    """Test landscape construction."""

    def test_w_fixture_is_valid(self, W):
        """Test the seven-state chain loads with its energies and six edges."""
        assert W.n_states == 7
        assert W.n_edges == 6
        assert W.energies == (0, 3, 1, 2, 1, 3, 0)
        assert W.neighbors[3] == (2, 4)

    def test_empty_input(self):
        """Test that a landscape without states is rejected."""
        with pytest.raises(EmptyInput):
            build_landscape([], [])

    def test_self_loop(self):
        """Test that an edge from a state to itself is rejected."""
        with pytest.raises(SelfLoop):
            build_landscape([("a", 0), ("b", 1)], [(0, 1), (1, 1)])

    def test_edge_out_of_range(self):
        """Test that an edge endpoint outside the state range is rejected."""
        with pytest.raises(InvalidEdge):
            build_landscape([("a", 0), ("b", 1)], [(0, 2)])

    def test_disconnected(self):
        """Test that two components are rejected."""
        with pytest.raises(DisconnectedGraph):
            build_landscape([("a", 0), ("b", 1), ("c", 0), ("d", 1)], [(0, 1), (2, 3)])

    def test_non_integer_energy(self):
        """Test that fractional energies are rejected."""
        with pytest.raises(LandscapeFormatError):
            build_landscape([("a", 0), ("b", 1.5)], [(0, 1)])

    def test_state_cap(self):
        """Test that the state cap is enforced."""
        with pytest.raises(CapExceeded):
            build_landscape([(None, 0)] * 3, [(0, 1), (1, 2)], state_cap=2)

    def test_duplicate_edges_dropped(self, caplog):
        """Test that duplicate edges are merged with a warning."""
        L = build_landscape([("a", 0), ("b", 1)], [(0, 1), (1, 0), (0, 1)])
        assert L.n_edges == 1
        assert "duplicate" in caplog.text

    def test_single_state(self):
        """Test that a single isolated state is a valid landscape."""
        L = build_landscape([("only", 5)], [])
        assert L.n_states == 1
        assert L.ground_states() == (0,)

    def test_errors_are_input_errors(self):
        """Test that construction errors share the InputError base."""
        with pytest.raises(InputError):
            build_landscape([("a", 0)], [(0, 0)])


class TestLandscapeHelpers:
    """Test label lookup, ground states and subgraphs."""

    def test_index_of(self, W):
        """Test lookup by label."""
        assert W.index_of("s4") == 4

    def test_index_of_unknown(self, W):
        """Test that unknown labels raise IndexOutOfRange."""
        with pytest.raises(IndexOutOfRange):
            W.index_of("s9")

    def test_ground_states(self, W):
        """Test the global minimizers of W."""
        assert W.ground_states() == (0, 6)

    def test_subgraph_keeps_order(self, W):
        """Test that the induced subgraph renumbers states in order."""
        sub, old = W.subgraph([4, 2, 3])
        assert old == (2, 3, 4)
        assert sub.energies == (1, 2, 1)
        assert sub.labels == ("s2", "s3", "s4")
        assert sub.neighbors == ((1,), (0, 2), (1,))


class TestBottomAndBoundary:
    """Test bottoms and boundary sets."""

    def test_bottom_of_inner_well(self, W):
        """Test the minimizers of {s2, s3, s4}."""
        assert bottom(W, [2, 3, 4]) == (2, 4)

    def test_bottom_of_everything(self, W):
        """Test the minimizers of the whole chain."""
        assert bottom(W, range(7)) == (0, 6)

    def test_bottom_empty(self, W):
        """Test that the bottom of the empty set is an error."""
        with pytest.raises(EmptySet):
            bottom(W, [])

    def test_boundary_of_inner_well(self, W):
        """Test the boundary of {s2, s3, s4} and its minimizers."""
        assert boundary_sets(W, [2, 3, 4]) == ((1, 5), (1, 5))

    def test_boundary_of_end_state(self, W):
        """Test that s0 has the single boundary state s1."""
        assert boundary_sets(W, [0]) == ((1,), (1,))

    def test_boundary_of_everything(self, W):
        """Test that the whole space has no boundary."""
        with pytest.raises(FullSet):
            boundary_sets(W, range(7))


class TestCommunicationHeight:
    """Test the minimax path height."""

    @pytest.mark.parametrize("a,b,expected", [
        ([0], [6], 3),
        ([2], [4], 2),
        ([0], [2], 3),
        ([3], [4], 2),
    ])
    def test_w_heights(self, W, a, b, expected):
        """Test communication heights on W."""
        assert comm_height(W, a, b) == expected

    def test_adjacent_pair(self, make_landscape):
        """Test that adjacent states communicate at the higher energy."""
        L = make_landscape([0, 2], [(0, 1)])
        assert comm_height(L, [0], [1]) == 2

    def test_overlap(self, W):
        """Test that intersecting sets are rejected."""
        with pytest.raises(Overlap):
            comm_height(W, [1, 2], [2, 3])

    def test_empty(self, W):
        """Test that an empty side is rejected."""
        with pytest.raises(EmptySet):
            comm_height(W, [], [1])


class TestMergeTree:
    """Test the union-find merge tree."""

    def test_w_pair_heights(self, W):
        """Test pairwise heights on W."""
        tree = barrier_filtration(W)
        assert tree.height(0, 6) == 3
        assert tree.height(2, 4) == 2
        assert tree.height(0, 2) == 3
        assert tree.height(3, 3) == 2

    def test_matches_comm_height(self, make_landscape):
        """Test every pair of a small grid against the direct search."""
        energies = [4, 1, 3, 0, 5, 2, 1, 3, 0]
        edges = [(0, 1), (1, 2), (3, 4), (4, 5), (6, 7), (7, 8), (0, 3), (3, 6), (1, 4), (4, 7), (2, 5), (5, 8)]
        L = make_landscape(energies, edges)
        tree = barrier_filtration(L)
        for a in range(L.n_states):
            for b in range(a + 1, L.n_states):
                assert tree.height(a, b) == comm_height(L, [a], [b])

    def test_set_height(self, W):
        """Test set heights replayed from the merge events."""
        tree = barrier_filtration(W)
        assert tree.set_height([2], [4]) == 2
        assert tree.set_height([0, 2], [4, 6]) == 2
        assert tree.set_height([0], [2, 4]) == comm_height(W, [0], [2, 4])

    def test_group_heights(self, W):
        """Test the pairwise matrix between plateau groups."""
        tree = barrier_filtration(W)
        M = tree.group_heights([(0,), (2, 4), (6,)])
        assert M[0, 1] == 3 and M[1, 0] == 3
        assert M[1, 2] == 3
        assert M[0, 2] == 3
        assert M[1, 1] == MergeTree.UNSET

    def test_group_overlap(self, W):
        """Test that overlapping groups are rejected."""
        with pytest.raises(Overlap):
            barrier_filtration(W).group_heights([(0, 1), (1, 2)])


class TestOmegaBar:
    """Test restriction below the ground-state barrier."""

    def test_w_keeps_everything(self, W):
        """Test that all of W lies at or below the barrier 3."""
        omega = restrict_to_omega_bar(W)
        assert omega.phi_bar == 3
        assert omega.restricted.n_states == 7
        assert omega.state_map == tuple(range(7))

    def test_drops_high_states(self, make_landscape):
        """Test that a state above the ground barrier is cut away."""
        L = make_landscape([0, 2, 0, 5, 1], [(0, 1), (1, 2), (2, 3), (3, 4)])
        omega = restrict_to_omega_bar(L)
        assert omega.phi_bar == 2
        assert omega.state_map == (0, 1, 2)

    def test_single_ground(self, make_landscape):
        """Test that a unique minimizer is rejected."""
        with pytest.raises(SingleGround):
            restrict_to_omega_bar(make_landscape([0, 1, 2], [(0, 1), (1, 2)]))

    def test_ground_mismatch(self, W):
        """Test that a wrong expected ground set is rejected."""
        with pytest.raises(GroundMismatch):
            restrict_to_omega_bar(W, ground=[0, 2])


class TestAllowedNeighborhood:
    """Test capped reachability."""

    def test_strict_cap(self, W):
        """Test that the strict cap 3 from s2 stops at s1 and s5."""
        assert allowed_neighborhood(W, [2], cap=3, strict=True) == (2, 3, 4)

    def test_no_room(self, W):
        """Test that a non-strict cap at the source energy stays put."""
        assert allowed_neighborhood(W, [0], cap=0) == (0,)

    def test_forbidden(self, W):
        """Test that forbidden states block the search."""
        assert allowed_neighborhood(W, [2], cap=3, forbidden=[3]) == (0, 1, 2)

    def test_cap_excludes_source(self, W):
        """Test that a source above the cap is rejected."""
        with pytest.raises(CapExcludesSource):
            allowed_neighborhood(W, [1], cap=2)

    def test_decomposition(self, W):
        """Test that the neighbourhood of a union splits into two stages."""
        A, B, cap = [0], [6], 3
        whole = set(allowed_neighborhood(W, A + B, cap))
        first = allowed_neighborhood(W, A, cap, forbidden=B)
        second = allowed_neighborhood(W, B, cap, forbidden=first)
        assert whole == set(first) | set(second)


class TestLandscapeIO:
    """Test JSON loading and saving."""

    def test_save_and_reload(self, W, tmp_path: Path):
        """Test that a saved landscape reloads identically."""
        path = save_landscape(W, tmp_path / "w.json")
        again = load_landscape(path)
        assert again.energies == W.energies
        assert again.neighbors == W.neighbors
        assert again.labels == W.labels

    def test_syntax_error_location(self, tmp_path: Path):
        """Test that syntax errors report line and column."""
        path = tmp_path / "bad.json"
        path.write_text('{\n  "states": [\n    {"energy": 0,}\n  ]\n}\n', encoding="utf-8")
        with pytest.raises(LandscapeFormatError, match=r"bad\.json:3:"):
            load_landscape(path)

    def test_schema_error_path(self, tmp_path: Path):
        """Test that schema errors name the offending JSON path."""
        path = tmp_path / "bad.json"
        doc = {"states": [{"energy": 0}, {"energy": 1}, {"energy": 2}, {"energy": "low"}], "edges": []}
        path.write_text(json.dumps(doc), encoding="utf-8")
        with pytest.raises(LandscapeFormatError, match=r"states\[3\]\.energy"):
            load_landscape(path)

    def test_schema_error_line_col(self, tmp_path: Path):
        """Test that schema errors point at the line and column of the offending value."""
        path = tmp_path / "bad.json"
        path.write_text(
            '{\n  "states": [\n    {"energy": 0},\n    {"energy": 1},\n'
            '    {"energy": 2},\n    {"energy": "low"}\n  ],\n  "edges": []\n}\n',
            encoding="utf-8",
        )
        with pytest.raises(LandscapeFormatError, match=r"bad\.json:6:16: states\[3\]\.energy"):
            load_landscape(path)

    def test_schema_error_missing_key(self, tmp_path: Path):
        """Test that a missing required key points at its enclosing object."""
        path = tmp_path / "bad.json"
        path.write_text('{"states": [{"energy": 0},\n {"label": "x"}]}', encoding="utf-8")
        with pytest.raises(LandscapeFormatError, match=r"bad\.json:2:2: states\[1\]\.energy"):
            load_landscape(path)

    def test_missing_file(self, tmp_path: Path):
        """Test that a missing file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            load_landscape(tmp_path / "nope.json")

    def test_build_errors_name_file(self, tmp_path: Path):
        """Test that validation errors are prefixed with the file name."""
        path = tmp_path / "loop.json"
        path.write_text(json.dumps({"states": [{"energy": 0}, {"energy": 1}], "edges": [[0, 0]]}), encoding="utf-8")
        with pytest.raises(SelfLoop, match="loop.json"):
            load_landscape(path)

    def test_energy_array(self, W):
        """Test the cached numpy view of the energies."""
        assert W.energy_array.dtype == np.int64
        assert W.energy_array.tolist() == list(W.energies)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
