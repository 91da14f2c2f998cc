import json

import numpy as np
import pytest

import metacoarse as mc


def test_sample_json_round_trip():
    samples = mc.generate_synthetic(6, seed=4)
    assert len(samples) == 6
    for g in samples:
        back = mc.SampleGraph.from_json(g.to_json())
        assert back.to_json() == g.to_json()
        assert back.level == "CFG"
        assert back.label in (0, 1)


def test_bad_record_raises_parse_error():
    with pytest.raises(mc.ParseError):
        mc.SampleGraph.from_json('{"id": "x", "label": 0}')


def test_save_and_load(tmp_path):
    samples = mc.generate_synthetic(5, seed=2)
    path = tmp_path / "s.jsonl"
    mc.save_samples(path, samples)
    loaded = mc.load_samples(path)
    assert sorted(g.id for g in loaded) == sorted(g.id for g in samples)


def test_afg_identities():
    for g in mc.generate_synthetic(10, seed=9):
        afg, lists, degrees_ok = mc.build_afg(g)
        assert degrees_ok
        assert afg.num_nodes == g.instruction_count
        assert afg.num_edges == g.num_edges + g.instruction_count - g.num_nodes
        assert sorted(lists) == g.nodes


@pytest.mark.parametrize("method", ["kron", "variation_edges"])
def test_coarsen_partitions_nodes(method):
    g = mc.generate_synthetic(1, seed=3)[0]
    coarse, blocks = mc.coarsen(g, method, 0.5)
    assert coarse.num_nodes == len(blocks)
    assert sorted(v for b in blocks for v in b) == g.nodes
    assert len(blocks) <= mc.coarse_size_bound(g.num_nodes, 0.5)
    with pytest.raises(ValueError):
        mc.coarsen(g, "spectral", 0.5)


def test_kron_matches_numpy_schur():
    g = mc.generate_synthetic(1, seed=5)[0]
    L = mc.laplacian(g)
    kept = mc.kron_kept_set(L)
    rest = [i for i in range(L.shape[0]) if i not in kept]
    expected = L[np.ix_(kept, kept)] - L[np.ix_(kept, rest)] @ np.linalg.solve(
        L[np.ix_(rest, rest)], L[np.ix_(rest, kept)])
    assert np.allclose(mc.kron_reduce(L, kept), expected, atol=1e-9)


def test_selection_partition():
    g = mc.generate_synthetic(1, seed=6)[0]
    attr = np.linspace(1.0, 0.0, g.num_edges)
    mask = mc.select_tes(g, attr, 0.1)
    assert sorted(mask["selected_edges"] + mask["unimportant_edges"]) == list(range(g.num_edges))
    assert len(mask["selected_nodes"]) >= mc.tes_node_budget(g.num_nodes, 2, 0.1)


def test_metric_identities():
    assert mc.characterization(1.0, 0.0) == 1.0
    assert mc.lambda_score(0.724, 0.087) == pytest.approx(0.637, abs=1e-3)
    assert mc.fidelity_scores([False, True], [True, True]) == (0.5, 0.0)
    assert mc.accuracy([1, 0, 1], [1, 1, 1]) == pytest.approx(2 / 3)


def test_small_pipeline_run(tmp_path):
    data = tmp_path / "data.jsonl"
    mc.save_samples(data, mc.generate_synthetic(30, seed=7))
    report = mc.run(data, tmp_path / "run", method="kron", ratio=0.5, seed=1,
                    epochs=3, hidden_dim=16, ig_steps=4)
    assert (tmp_path / "run" / "metrics.json").exists()
    assert report == mc.report(tmp_path / "run")
    with pytest.raises(mc.PipelineError):
        mc.run(tmp_path / "missing.jsonl", tmp_path / "bad", method="kron", ratio=0.5, seed=1)
