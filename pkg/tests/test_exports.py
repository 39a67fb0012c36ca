import numpy as np
import pytest
from hypothesis import given, strategies as st

from tsna.exports import (
    emit_histogram,
    export_graph,
    histogram_to_csv,
    linear_edges,
    log_edges,
    read_graphml,
)
from tsna.measures import measure_matrix
from tsna.roles import assign_roles, table1_roles

from conftest import snap_from_edges


class TestGraphExports:
    def graph(self):
        return snap_from_edges({("a", "b"): 5, ("b", "c"): 1, ("c", "a"): 2})

    def test_dot_contains_nodes_and_weights(self, tmp_path):
        path = tmp_path / "g.dot"
        export_graph(self.graph(), str(path), "dot")
        text = path.read_text()
        assert text.count(";") == 6  # 3 node statements + 3 edges
        assert '"a" -> "b" [weight=5' in text

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            export_graph(self.graph(), str(tmp_path / "g.x"), "gephi")

    def test_graphml_round_trip(self, tmp_path):
        snap = self.graph()
        path = tmp_path / "g.graphml"
        export_graph(snap, str(path), "graphml")
        nodes, edges = read_graphml(str(path))
        assert sorted(nodes) == list(snap.nodes)
        assert edges == dict(snap.edges)

    def test_graphml_empty_snapshot(self, tmp_path):
        snap = snap_from_edges({}, extra_nodes=["lonely"])
        path = tmp_path / "empty.graphml"
        export_graph(snap, str(path), "graphml")
        nodes, edges = read_graphml(str(path))
        assert nodes == ["lonely"] and edges == {}

    def test_node_attributes_follow_roles_and_measures(self, tmp_path):
        snap = self.graph()
        matrix = measure_matrix(snap)
        assignments = assign_roles(matrix, table1_roles(), threshold=0.0)
        path = tmp_path / "g.dot"
        export_graph(snap, str(path), "dot", assignments, matrix)
        text = path.read_text()
        assert "role=" in text
        assert "scaled_degree_in=" in text

    def test_edge_csv(self, tmp_path):
        path = tmp_path / "g.csv"
        export_graph(self.graph(), str(path), "csv")
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "src,dst,weight,en"
        assert len(lines) == 4


class TestHistogram:
    def test_worked_example(self):
        hist = emit_histogram([1, 2, 3], [0, 2, 4])
        assert hist.counts.tolist() == [1, 2]
        assert hist.underflow == 0 and hist.overflow == 0

    def test_inner_edge_goes_up(self):
        hist = emit_histogram([2.0], [0, 2, 4])
        assert hist.counts.tolist() == [0, 1]

    def test_out_of_range(self):
        hist = emit_histogram([-1, 5], [0, 2, 4])
        assert hist.underflow == 1 and hist.overflow == 1
        assert hist.total == 2

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            emit_histogram([], [0, 1])

    def test_bad_edges_rejected(self):
        with pytest.raises(ValueError):
            emit_histogram([1], [0, 0, 1])

    def test_log_bins_conserve(self):
        rng = np.random.default_rng(0)
        values = np.exp(rng.uniform(0, np.log(1e5), size=500))
        edges = log_edges(1.0, 1e5, 25)
        assert np.all(np.diff(edges) > 0)
        hist = emit_histogram(values, edges)
        assert hist.total == 500

    @given(
        st.lists(st.floats(-100, 100), min_size=1, max_size=200),
        st.integers(2, 30),
    )
    def test_conservation_any_binning(self, values, bins):
        hist = emit_histogram(values, linear_edges(-50, 50, bins))
        assert hist.total == len(values)

    def test_csv(self, tmp_path):
        hist = emit_histogram([1, 2, 3], [0, 2, 4])
        path = tmp_path / "h.csv"
        histogram_to_csv(hist, str(path))
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "bin_low,bin_high,count"
        assert len(lines) == 3
