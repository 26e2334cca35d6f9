import numpy as np
import pytest

from adjhrl import adjacency as adj
from adjhrl import embed, nets
from adjhrl.gridworld import GridState, Subgoal


def make_psi(rng, k=10, extent=(16.0, 12.0), eps_k=1.0, delta=0.2):
    return embed.make_adjacency_net(k, extent, rng, eps_k=eps_k, delta=delta)


def identity_psi(k=10, eps_k=1.0, delta=0.2):
    """Single identity layer passing the normalized 2-d input into the first
    two embedding coordinates; distances are exactly normalized-input
    distances."""
    w = np.zeros((2, embed.EMBED_DIM))
    w[0, 0] = 1.0
    w[1, 1] = 1.0
    net = nets.DenseNet([w], [np.zeros(embed.EMBED_DIM)], ("identity",))
    return embed.AdjacencyNet(net, k, (16.0, 12.0), eps_k, delta)


def test_hinge_examples():
    assert embed.hinge(10, 10) == 0.0
    assert embed.hinge(20, 10) == 1.0
    assert embed.hinge(5, 10) == 0.0
    with pytest.raises(ValueError):
        embed.hinge(1.0, 0)


def test_embed_deterministic_and_finite(rng):
    psi = make_psi(rng)
    g = Subgoal(3.0, 5.0)
    a = embed.embed(psi, g)
    b = embed.embed(psi, g)
    assert np.array_equal(a, b)
    assert np.all(np.isfinite(a))


def test_embed_continuity(rng):
    psi = make_psi(rng)
    base = embed.embed(psi, Subgoal(8.0, 6.0))
    for eps in (1e-2, 1e-4, 1e-6):
        moved = embed.embed(psi, Subgoal(8.0 + eps, 6.0))
        assert np.linalg.norm(moved - base) < 10 * eps + 1e-12


def test_approx_distance_identity_and_symmetry(rng):
    psi = make_psi(rng)
    g1, g2 = Subgoal(2.0, 3.0), Subgoal(9.0, 1.0)
    assert embed.approx_distance(psi, g1, g1) == 0.0
    assert embed.approx_distance(psi, g1, g2) == embed.approx_distance(psi, g2, g1)
    assert embed.approx_distance(psi, g1, g2) >= 0.0


def test_approx_distance_formula(rng):
    psi = make_psi(rng, k=7, eps_k=0.5)
    g1, g2 = Subgoal(1.0, 2.0), Subgoal(10.0, 9.0)
    norm = np.linalg.norm(embed.embed(psi, g1) - embed.embed(psi, g2))
    assert embed.approx_distance(psi, g1, g2) == pytest.approx(7 / 0.5 * norm)


def test_approx_distance_boundary_returns_k():
    # identity embedding: normalized input distance == embedding distance;
    # choose goals exactly eps_k apart in normalized coordinates
    psi = identity_psi(k=10, eps_k=1.0)
    g1 = Subgoal(0.0, 6.0)
    g2 = Subgoal(8.0, 6.0)   # normalized x: 2*8/16 - 1 = 0 vs -1 -> distance 1
    assert embed.approx_distance(psi, g1, g2) == pytest.approx(10.0)


def test_contrastive_loss_boundary_cases():
    psi = identity_psi(eps_k=1.0, delta=0.2)
    # embedding distance exactly eps_k: positive pair contributes 0
    at_eps = [adj.LabeledPair((0.0, 6.0), (8.0, 6.0), 1)]
    loss, _ = embed.contrastive_loss(psi, at_eps)
    assert loss == 0.0
    # distance exactly eps_k + delta: negative pair contributes 0
    at_margin = [adj.LabeledPair((0.0, 6.0), (9.6, 6.0), 0)]
    loss, _ = embed.contrastive_loss(psi, at_margin)
    assert loss == pytest.approx(0.0, abs=1e-12)
    # coincident negative pair contributes eps_k + delta
    coincident = [adj.LabeledPair((4.0, 6.0), (4.0, 6.0), 0)]
    loss, _ = embed.contrastive_loss(psi, coincident)
    assert loss == pytest.approx(1.2)


def test_contrastive_loss_empty_batch(rng):
    with pytest.raises(ValueError):
        embed.contrastive_loss(make_psi(rng), [])


def test_contrastive_gradients_match_finite_differences(rng):
    psi = make_psi(rng)
    pairs = [adj.LabeledPair((float(rng.integers(0, 17)), float(rng.integers(0, 13))),
                             (float(rng.integers(0, 17)), float(rng.integers(0, 13))),
                             int(rng.integers(2)))
             for _ in range(8)]

    def loss_and_grads(net):
        psi2 = embed.AdjacencyNet(net, psi.k, psi.extent, psi.eps_k, psi.delta)
        return embed.contrastive_loss(psi2, pairs)

    worst = nets.gradcheck(loss_and_grads, psi.net, rng, n_coords=30)
    assert worst <= 1e-4


def test_distill_two_cell_adjacent_collapses(rng):
    m = adj.AdjacencyMatrix(k=10)
    m.add_trajectory(adj.Trajectory([(2, 2), (3, 2)]))
    psi = make_psi(rng)
    hist = embed.distill(psi, m, epochs=40, rng=rng, lr=2e-3,
                         batches_per_epoch=10)
    assert hist["single_class"]
    assert hist["epoch_loss"][-1] < 1e-3
    assert embed.approx_distance(psi, Subgoal(2, 2), Subgoal(3, 2)) <= 10.0


def test_distill_two_cell_non_adjacent_separates(rng):
    m = adj.AdjacencyMatrix(k=10)
    m.ensure_cell((0, 0))
    m.ensure_cell((16, 12))
    psi = make_psi(rng)
    hist = embed.distill(psi, m, epochs=60, rng=rng, lr=2e-3,
                         batches_per_epoch=10)
    assert hist["epoch_loss"][-1] < 1e-3
    dist = np.linalg.norm(embed.embed(psi, Subgoal(0, 0))
                          - embed.embed(psi, Subgoal(16, 12)))
    assert dist >= psi.eps_k + psi.delta - 1e-6


def test_distill_requires_two_cells(rng):
    m = adj.AdjacencyMatrix(k=10)
    m.ensure_cell((0, 0))
    with pytest.raises(ValueError):
        embed.distill(make_psi(rng), m, epochs=1, rng=rng)


def test_adjacency_loss_zero_at_own_position(rng):
    psi = make_psi(rng)
    s = GridState(4, 7)
    value, grad = embed.adjacency_loss(psi, s, Subgoal(4.0, 7.0))
    assert value == 0.0
    assert np.array_equal(grad, np.zeros(2))


def test_adjacency_loss_active_hinge_value():
    # identity embedding: loss = max(normalized distance - eps, 0)
    psi = identity_psi(eps_k=0.25)
    s = GridState(0, 6)
    value, grad = embed.adjacency_loss(psi, s, Subgoal(8.0, 6.0))
    assert value == pytest.approx(0.75)  # distance 1.0, eps 0.25
    assert grad[0] != 0.0


def test_adjacency_loss_gradient_matches_finite_differences(rng):
    # tiny eps keeps the hinge active for a freshly initialized network
    psi = make_psi(rng, eps_k=1e-3)
    s = GridState(3, 3)
    g = np.array([11.0, 9.0])
    value, grad = embed.adjacency_loss(psi, s, Subgoal(*g))
    assert value > 0.0
    h = 1e-6
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        hi, _ = embed.adjacency_loss(psi, s, Subgoal(*(g + e)))
        lo, _ = embed.adjacency_loss(psi, s, Subgoal(*(g - e)))
        num = (hi - lo) / (2 * h)
        assert abs(grad[i] - num) / (abs(num) + 1e-8) <= 1e-4


def test_holdout_split_is_seeded_and_disjoint(rng):
    m = adj.AdjacencyMatrix(k=2)
    m.add_trajectory(adj.Trajectory([(i, 0) for i in range(20)]))
    a = embed.make_holdout(m, 0.1, np.random.default_rng(5))
    b = embed.make_holdout(m, 0.1, np.random.default_rng(5))
    assert a == b
    assert all(i < j for i, j in a)


def test_pair_accuracy_balanced():
    pred = np.array([1, 1, 0, 0, 1])
    true = np.array([1, 0, 0, 0, 1])
    acc, bal = embed.pair_accuracy(pred, true)
    assert acc == pytest.approx(0.8)
    assert bal == pytest.approx((2 / 3 + 1.0) / 2)


def test_checkpoint_roundtrip(tmp_path, rng):
    psi = make_psi(rng, k=7, eps_k=0.9, delta=0.3)
    prefix = str(tmp_path / "adjacency")
    embed.save_adjacency_net(psi, prefix)
    loaded = embed.load_adjacency_net(prefix)
    assert loaded.k == 7
    assert loaded.eps_k == pytest.approx(0.9)
    assert loaded.delta == pytest.approx(0.3)
    assert loaded.extent == psi.extent
    g = Subgoal(5.5, 2.5)
    np.testing.assert_array_equal(embed.embed(psi, g), embed.embed(loaded, g))
