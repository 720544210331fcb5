# SPDX-License-Identifier: Apache-2.0
"""Drug-pair synergy classification on dual molecular graphs."""

from ._egtsyn import (
    EgtsynError,
    Model,
    Molecule,
    SmilesError,
    __version__,
    dump_graph,
    evaluate_scores,
    featurize,
    gradcheck,
    parse_smiles,
    pr_auc,
    roc_auc,
    run_cli,
)

__all__ = [
    "EgtsynError",
    "Model",
    "Molecule",
    "SmilesError",
    "__version__",
    "dump_graph",
    "evaluate_scores",
    "featurize",
    "gradcheck",
    "parse_smiles",
    "pr_auc",
    "roc_auc",
    "run_cli",
]
