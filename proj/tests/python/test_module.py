# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2026 The qcnet Authors

import json
import math

import numpy as np
import pytest

import qcnet


def cubic(a=1.0, z=11):
    return qcnet.Structure(np.eye(3) * a, [z], np.zeros((1, 3)))


def test_dimensions():
    assert qcnet.VERTEX_FEATURE_DIM == 92
    assert qcnet.EDGE_FEATURE_DIM == 376
    assert qcnet.TRIANGLE_FEATURE_DIM == 216
    assert qcnet.HIDDEN_DIM == 64
    assert len(qcnet.rbf_expand(-1.0)) == 192
    assert len(qcnet.rbf_expand(1.0, edge_bank=False)) == 24


def test_structure_round_trip(data_dir):
    s = qcnet.Structure.read(data_dir / "structures" / "catio3.json")
    assert len(s) == 5
    assert s.species == [20, 22, 8, 8, 8]
    again = qcnet.Structure.from_json(s.to_json())
    assert again == s
    assert again.to_json() == s.to_json()
    assert np.allclose(s.lattice, np.eye(3) * 3.9)


def test_structure_wraps_coordinates():
    s = qcnet.Structure(np.eye(3), [8], np.array([[1.25, -0.25, 0.5]]))
    assert np.allclose(s.frac, [[0.25, 0.75, 0.5]])


def test_cubic_self_loops():
    g = qcnet.neighbor_list(cubic(), 6)
    assert len(g.edges) == 6
    offsets = sorted(tuple(e.offset) for e in g.edges)
    assert offsets == sorted([(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)])
    assert all(e.src == 0 and e.dst == 0 and math.isclose(e.dist, 1.0) for e in g.edges)
    assert g == qcnet.brute_force_neighbors(cubic(), 6, 2)
    assert qcnet.build_complex(g).n_triangles == 0


def test_catio3_complex(data_dir):
    s = qcnet.Structure.read(data_dir / "structures" / "catio3.json")
    c = qcnet.build_complex(qcnet.neighbor_list(s, 12))
    assert (c.n_vertices, c.n_edges) == (5, 60)
    edges = c.graph.edges
    for t in c.triangles:
        o1, o2, o3 = (np.array(o) for o in t.offsets)
        assert (o3 == o1 + o2).all()
        assert edges[t.e[0]].src == edges[t.e[2]].src
    f = qcnet.raw_features(c, s, qcnet.AtomFeatureTable.placeholder())
    assert f["h0"].shape == (5, 92)
    assert f["h1"].shape == (60, 376)
    assert f["h2"].shape == (c.n_triangles, 216)
    assert json.loads(c.to_json())["triangles"]


def test_errors_carry_kind():
    with pytest.raises(qcnet.Error, match="InvalidArgument"):
        qcnet.neighbor_list(cubic(), 0)
    with pytest.raises(qcnet.Error, match="DegenerateLattice"):
        qcnet.Structure(np.zeros((3, 3)), [8], np.zeros((1, 3)))
    table = qcnet.AtomFeatureTable.from_json(json.dumps({"11": [0.0] * 92}))
    c = qcnet.build_complex(qcnet.neighbor_list(cubic(z=26), 6))
    with pytest.raises(qcnet.Error, match="Fe"):
        qcnet.raw_features(c, cubic(z=26), table)


def test_predict_deterministic_and_invariant():
    model = qcnet.Model.initialized(seed=3)
    rng = np.random.default_rng(0)
    lattice = np.array([[3.1, 0.2, 0.0], [0.1, 2.9, 0.3], [0.0, 0.4, 3.3]])
    frac = rng.random((3, 3))
    s = qcnet.Structure(lattice, [8, 14, 20], frac)
    y = model.predict(s)
    assert y == model.predict(s)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    rotated = qcnet.Structure(lattice @ q.T, [8, 14, 20], frac)
    assert abs(model.predict(rotated) - y) <= 1e-9 * max(1.0, abs(y))
    permuted = qcnet.Structure(lattice, [20, 8, 14], frac[[2, 0, 1]])
    assert abs(model.predict(permuted) - y) <= 1e-9 * max(1.0, abs(y))


def test_checkpoint_round_trip(tmp_path):
    cfg = qcnet.ModelConfig()
    cfg.hidden = 16
    cfg.head_hidden = 8
    model = qcnet.Model.initialized(cfg, 5)
    path = tmp_path / "m.bin"
    model.save(path)
    loaded = qcnet.Model.load(path)
    assert loaded.config.hidden == 16
    s = cubic(2.5)
    assert loaded.predict(s, k=6) == model.predict(s, k=6)


def test_train_small_and_deterministic():
    cfg = qcnet.TrainConfig.hybrid()
    assert (cfg.batch_size, cfg.epochs, cfg.peak_lr, cfg.loss) == (64, 500, 0.005, "mae")
    cfg.epochs = 4
    cfg.batch_size = 4
    cfg.k_neighbors = 6
    cfg.model.hidden = 16
    cfg.model.head_hidden = 16
    structures = [cubic(a, z) for a, z in [(2.0, 8), (2.5, 11), (3.0, 12), (3.5, 14)]]
    targets = [2.0, 2.5, 3.0, 3.5]
    m1, h1 = qcnet.train(cfg, structures, targets)
    m2, h2 = qcnet.train(cfg, structures, targets)
    assert h1 == h2
    assert len(h1) == 4
    assert m1.predict(structures[0], k=6) == m2.predict(structures[0], k=6)
    with pytest.raises(qcnet.Error):
        qcnet.train(cfg, structures, targets[:2])


def test_metrics():
    m = qcnet.compute_metrics([0, 1, 2], [0, 1, 4])
    assert m["cod"] == -1.0
    assert math.isclose(m["mae"], 2 / 3)
    assert math.isclose(m["mse"], 4 / 3)
    p = qcnet.compute_metrics([1, 2, 3], [1, 2, 3])
    assert p["cod"] == 1.0 and p["mae"] == 0.0 and math.isclose(p["pcc"], 1.0)
    assert p["mad_mae_ratio"] is None
    z = qcnet.compute_metrics([2, 2], [1, 3])
    assert z["status"] == "zero_variance" and z["cod"] is None


def test_kfold():
    folds = qcnet.kfold_split(10, 5, 1)
    assert len(folds) == 5
    assert sorted(i for _, test in folds for i in test) == list(range(10))
    with pytest.raises(qcnet.Error, match="TooFewSamples"):
        qcnet.kfold_split(3, 5, 0)


def test_homology():
    assert qcnet.betti([[0, 1], [1, 2], [2, 3], [0, 3]], 1) == 1
    star = json.loads(qcnet.verify_theorem([[0, 1], [1, 2], [2, 3], [3, 4]], [[0, 1, 2, 3, 4]]))
    assert star["betti_Ktilde"][:2] == [1, 4]
    assert star["all_verdicts"]
    pair = json.loads(qcnet.verify_theorem([[0, 1], [1, 2]], [[0, 1, 2]], pairwise=True))
    assert pair["betti_Ktilde"][1] == 3
