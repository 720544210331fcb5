# SPDX-License-Identifier: Apache-2.0
import math
from pathlib import Path

import numpy as np
import pytest

import egtsyn

TOY = Path(__file__).resolve().parents[2] / "tests" / "data" / "toy"


def test_parse_aspirin():
    mol = egtsyn.parse_smiles("CC(=O)Oc1ccccc1C(=O)O")
    assert mol.num_atoms == 13
    assert mol.num_bonds == 13
    assert sum(mol.aromatic) == 6
    assert sum(mol.ring_bonds) == 6


def test_parse_error_carries_offset():
    with pytest.raises(egtsyn.SmilesError):
        egtsyn.parse_smiles("C1CC")
    assert issubclass(egtsyn.SmilesError, ValueError)


def test_featurize_shapes_and_normalization():
    g = egtsyn.featurize("c1ccncc1")
    atoms, dual = g["atom_graph"], g["atom_bond_graph"]
    assert atoms["features"].shape == (6, 78)
    assert dual["features"].shape == (12, 78)
    adj = dual["adjacency"]
    assert np.allclose(adj, adj.T)
    # Spectrum of D^-1/2 (A + I) D^-1/2 lies in (-1, 1].
    assert np.linalg.eigvalsh(adj).max() == pytest.approx(1.0)
    assert "c1ccncc1" in egtsyn.dump_graph("c1ccncc1")


def test_metrics_hand_cases():
    assert egtsyn.roc_auc([1, 0, 1, 0], [0.8, 0.7, 0.6, 0.2]) == 0.75
    assert egtsyn.pr_auc([1, 0], [0.3, 0.7]) == 0.5
    assert egtsyn.roc_auc([1, 1], [0.1, 0.2]) is None
    report = egtsyn.evaluate_scores([1, 1, 0, 0], [0.6, 0.4, 0.6, 0.4])
    assert report["confusion"] == {"tp": 1, "fp": 1, "tn": 1, "fn": 1}
    assert report["kappa"] == 0.0


def test_gradcheck_passes():
    passed, errors = egtsyn.gradcheck("GSyn", seed=1)
    assert passed
    assert all(e <= 1e-4 for e in errors.values())


def test_train_then_predict(tmp_path):
    ckpt = tmp_path / "model.json"
    data = [str(TOY / f) for f in ("drugs.csv", "cells.csv", "synergy.csv")]
    code, out, err = egtsyn.run_cli(
        ["train", "--data", *data, "--variant", "EGSyn", "--preset", "tiny",
         "--epochs", "3", "--seed", "2", "--out", str(ckpt)])
    assert code == 0, err
    model = egtsyn.Model.load(str(ckpt))
    assert model.variant == "EGSyn"
    assert model.cell_width == 8
    expr = [0.5] * 8
    p = model.predict("CCO", "c1ccccc1O", expr)
    assert 0.0 < p < 1.0
    assert math.isclose(p, model.predict("c1ccccc1O", "CCO", expr), abs_tol=1e-12)
    with pytest.raises(egtsyn.EgtsynError):
        egtsyn.Model.load(str(tmp_path / "missing.json"))
