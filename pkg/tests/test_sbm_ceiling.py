"""Link AUC ceiling on the two-community block model.

Edges in a block model are independent given the communities, so no scorer
can beat the one that knows the true community of every node. Against
uniformly sampled non-edges that scorer reaches roughly

    0.5 * (1 + P(same | edge) - P(same | non-edge)) = 0.5 * (1 + 0.909 - 0.49) ~ 0.71
"""

import numpy as np

from hdgl.datasets import block_sbm, make_link_splits
from hdgl.linkpred import auc_roc
from hdgl.runner import RepeatSeeds, RunConfig, run_linkpred


def community_oracle_auc(bundle, splits):
    pairs = np.concatenate([splits["test_edges"], splits["test_neg"]])
    labels = np.r_[np.ones(len(splits["test_edges"])), np.zeros(len(splits["test_neg"]))]
    same = (bundle.labels[pairs[:, 0]] == bundle.labels[pairs[:, 1]]).astype(float)
    return auc_roc(same, labels)


def test_analytic_ceiling():
    p_in, p_out = 0.05, 0.005
    same_given_edge = p_in / (p_in + p_out)
    # half the pairs are within a community; non-edges are drawn from all the rest
    same_given_non_edge = 0.5 * (1 - p_in) / (0.5 * (1 - p_in) + 0.5 * (1 - p_out))
    ceiling = 0.5 * (1 + same_given_edge - same_given_non_edge)
    assert 0.70 < ceiling < 0.72


def test_oracle_and_model_below_ceiling():
    b = block_sbm(n=1000, n_blocks=2, p_in=0.05, p_out=0.005, separation=4.0, seed=0)
    splits = make_link_splits(b.graph, RepeatSeeds.derive(0, 0).splits)
    oracle = community_oracle_auc(b, splits)
    assert 0.65 < oracle < 0.76
    model = run_linkpred(b, RunConfig(dim=20000, seed=0))["summary"]["test_auc"]["mean"]
    assert 0.5 < model <= oracle + 0.03
