"""Structure learners and comparison metrics."""

import numpy as np
import pytest

from _helpers import binary_frame, random_proper_mass
from beliefnet.dependence import ScoreContext
from beliefnet.errors import GraphError
from beliefnet.frames import ConfigSet, Frame
from beliefnet.learners import LearnedStructure, compare_structures, learn_polytree, learn_tree
from beliefnet.mass import MassFunction, combine
from beliefnet.network import Dag, joint_distribution, random_network, random_polytree, random_tree
from beliefnet.population import sample_dataset


def cs(scope, *tuples):
    return ConfigSet.of(scope, tuples)


def test_two_variables_single_edge():
    rng = np.random.default_rng(3)
    frame = binary_frame(2)
    joint = random_proper_mass(frame.full_scope, rng, max_focal=6)
    learned = learn_tree(ScoreContext.from_joint(joint))
    assert learned.skeleton == (("X1", "X2"),)
    assert learned.oriented == ()
    with pytest.raises(GraphError):
        learn_tree(ScoreContext.from_joint(random_proper_mass(frame.scope(["X1"]), rng)))


def test_learn_tree_spanning_and_deterministic():
    frame = binary_frame(5)
    dag = random_tree(5, 4)
    net = random_network(dag, frame, focal_budget=3, seed=21)
    ctx = ScoreContext.from_joint(joint_distribution(net))
    one = learn_tree(ctx)
    two = learn_tree(ScoreContext.from_joint(joint_distribution(net)))
    assert one.skeleton == two.skeleton
    assert len(one.skeleton) == 4
    # spanning: every variable touched
    touched = {v for e in one.skeleton for v in e}
    assert touched == set(frame.names)


def test_learn_tree_recovers_exact_structures():
    for seed in range(5):
        n = 5 + seed % 3
        frame = binary_frame(n)
        dag = random_tree(n, seed)
        net = random_network(dag, frame, focal_budget=4, seed=100 + seed)
        ctx = ScoreContext.from_joint(joint_distribution(net))
        metrics = compare_structures(dag, learn_tree(ctx), frame.names)
        assert metrics.skeleton_recall == 1.0 and metrics.skeleton_precision == 1.0


def test_star_collider_orientation():
    # X1 -> X3 <- X2 with independent parents: both edges oriented into X3
    frame = binary_frame(3)
    dag = Dag(3, [(0, 2), (1, 2)])
    for seed in range(5):
        net = random_network(dag, frame, focal_budget=4, seed=seed)
        ctx = ScoreContext.from_joint(joint_distribution(net))
        learned = learn_polytree(ctx)
        assert set(learned.skeleton) == {("X1", "X3"), ("X2", "X3")}
        assert set(learned.oriented) == {("X1", "X3"), ("X2", "X3")}
        assert learned.collider_scores[("X1", "X2", "X3")] > 0


def test_learn_polytree_exact_recovery():
    for seed in range(5):
        frame = binary_frame(6)
        dag = random_polytree(6, seed)
        net = random_network(dag, frame, focal_budget=4, seed=100 + seed)
        ctx = ScoreContext.from_joint(joint_distribution(net))
        learned = learn_polytree(ctx)
        metrics = compare_structures(dag, learned, frame.names)
        assert metrics.skeleton_recall == 1.0
        assert metrics.orientation_accuracy == 1.0
        assert metrics.spurious_colliders == 0
        # an oriented edge is never oriented both ways and stays inside the skeleton
        assert len(set(learned.oriented)) == len(learned.oriented)
        skeleton = {frozenset(e) for e in learned.skeleton}
        assert all(frozenset(e) in skeleton for e in learned.oriented)


def test_learn_polytree_needs_three():
    rng = np.random.default_rng(9)
    frame = binary_frame(2)
    with pytest.raises(GraphError):
        learn_polytree(ScoreContext.from_joint(random_proper_mass(frame.full_scope, rng)))


def test_learner_on_sampled_data():
    # empirical marginals drive the same machinery; recovery rates over many
    # runs are the acceptance suite's business, one run should come close
    frame = binary_frame(6)
    dag = random_tree(6, 8)
    net = random_network(dag, frame, focal_budget=4, seed=8)
    ds = sample_dataset(joint_distribution(net), 300, seed=8)
    learned = learn_tree(ScoreContext.from_dataset(ds))
    metrics = compare_structures(dag, learned, frame.names)
    assert len(learned.skeleton) == 5
    assert metrics.skeleton_recall >= 0.8


# --- compare_structures counting cases --------------------------------------


def test_compare_identical():
    truth = Dag(4, [(0, 1), (1, 2), (1, 3)])
    learned = LearnedStructure(
        variables=("A", "B", "C", "D"),
        skeleton=(("A", "B"), ("B", "C"), ("B", "D")),
        oriented=(("A", "B"),),
    )
    m = compare_structures(truth, learned, ["A", "B", "C", "D"])
    assert m.skeleton_precision == 1.0 and m.skeleton_recall == 1.0
    assert m.orientation_accuracy == 1.0 and m.spurious_colliders == 0


def test_compare_counts_missing_edges():
    # 5 true edges, learned spanning tree has one wrong edge: 4/5 both ways
    truth = Dag(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)])
    learned = LearnedStructure(
        variables=tuple("ABCDEF"),
        skeleton=(("A", "B"), ("B", "C"), ("C", "D"), ("D", "E"), ("A", "F")),
    )
    m = compare_structures(truth, learned, list("ABCDEF"))
    assert m.skeleton_recall == pytest.approx(0.8)
    assert m.skeleton_precision == pytest.approx(0.8)


def test_compare_counts_colliders():
    # truth has one collider (A -> C <- B); learned adds a spurious one at D
    truth = Dag(4, [(0, 2), (1, 2), (2, 3)])
    learned = LearnedStructure(
        variables=("A", "B", "C", "D"),
        skeleton=(("A", "C"), ("B", "C"), ("C", "D")),
        oriented=(("A", "C"), ("B", "C"), ("A", "D"), ("C", "D")),
    )
    # learned orientation A->D is not even in the skeleton of truth; the
    # collider (A, C) -> D is counted as spurious, the true one as recovered
    m = compare_structures(truth, learned, ["A", "B", "C", "D"])
    assert m.orientation_accuracy == 1.0
    assert m.spurious_colliders == 1


def test_compare_requires_same_variables():
    truth = Dag(2, [(0, 1)])
    learned = LearnedStructure(variables=("A", "B"), skeleton=(("A", "B"),))
    with pytest.raises(GraphError):
        compare_structures(truth, learned, ["A", "Z"])
