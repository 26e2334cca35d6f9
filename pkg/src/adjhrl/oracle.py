"""Ground-truth distances, optimal goal-conditioned policies, and executable
checks of the two surrogate-goal theorems on small deterministic MDPs.

Goals are identified with state ids here (the goal map is the identity on a
tabular MDP). Unreachable pairs carry the sentinel distance n_states, which
is strictly larger than any path length.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .gridworld import TabularMDP


def shortest_transition_distance(mdp: TabularMDP) -> np.ndarray:
    """BFS from every state over the directed transition graph.

    Entry [i, j] is the minimum number of steps from i to j, 0 on the
    diagonal, and n_states for unreachable pairs.
    """
    n = mdp.n_states
    succ = [np.unique(mdp.next_state[s]) for s in range(n)]
    d = np.full((n, n), n, dtype=np.int64)
    for s in range(n):
        d[s, s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            du = d[s, u]
            for v in succ[u]:
                if d[s, v] > du + 1:
                    d[s, v] = du + 1
                    q.append(v)
    return d


def floyd_warshall(mdp: TabularMDP) -> np.ndarray:
    """Independent all-pairs distance computation, used to cross-check BFS."""
    n = mdp.n_states
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for s in range(n):
        for v in np.unique(mdp.next_state[s]):
            if v != s:
                d[s, v] = 1.0
    for m in range(n):
        d = np.minimum(d, d[:, m:m + 1] + d[m:m + 1, :])
    out = d.copy()
    out[np.isinf(out)] = n
    return out.astype(np.int64)


def is_strongly_connected(d: np.ndarray) -> bool:
    return bool((d < d.shape[0]).all())


def optimal_goal_policy(mdp: TabularMDP, d: np.ndarray) -> np.ndarray:
    """Deterministic optimal policy table: entry [s, g] is the action whose
    successor minimizes the distance to g, ties broken by lowest index."""
    # d[next_state] has shape (S, A, S); argmin over the action axis
    return np.argmin(d[mdp.next_state], axis=1).astype(np.int64)


@dataclass(frozen=True)
class AdjacentRegion:
    center: int
    k: int
    members: frozenset


def adjacent_region(d: np.ndarray, s: int, k: int) -> AdjacentRegion:
    if k < 1:
        raise ValueError("k must be >= 1")
    return AdjacentRegion(s, k, frozenset(np.flatnonzero(d[s] <= k).tolist()))


def check_triangle_inequality(d: np.ndarray):
    """Exhaustive check over all (a, b, c) triples.

    Returns (True, None) or (False, first violating triple in lexicographic
    order). The sentinel behaves correctly because it bounds every entry.
    """
    via = d[:, :, None] + d[None, :, :]   # [a, b, c] = d[a,b] + d[b,c]
    bad = d[:, None, :] > via
    if not bad.any():
        return True, None
    a, b, c = np.unravel_index(np.argmax(bad), bad.shape)
    return False, (int(a), int(b), int(c))


def rollout(mdp: TabularMDP, policy: np.ndarray, s: int, g: int, steps: int):
    """Follow policy[., g] for a fixed number of steps.

    Returns (states, actions) with len(states) == steps + 1.
    """
    states = [s]
    actions = []
    for _ in range(steps):
        a = int(policy[states[-1], g])
        actions.append(a)
        states.append(int(mdp.next_state[states[-1], a]))
    return states, actions


@dataclass(frozen=True)
class TheoremCheck:
    ok: bool
    surrogate: int | None = None
    reason: str | None = None


def check_theorem1(mdp: TabularMDP, s: int, g: int, k: int,
                   d: np.ndarray | None = None,
                   policy: np.ndarray | None = None) -> TheoremCheck:
    """Construct the surrogate goal for (s, g, k) and verify its properties.

    The surrogate is the k-th state on the shortest path traced by the
    tie-broken optimal policy toward g. Verified: the surrogate lies in the
    k-step adjacent region of s, every path prefix is itself shortest, and
    the policy conditioned on the surrogate picks the same action at each of
    the first k states.
    """
    if d is None:
        d = shortest_transition_distance(mdp)
    if policy is None:
        policy = optimal_goal_policy(mdp, d)
    if not 1 <= k <= d[s, g] or d[s, g] >= mdp.n_states:
        raise ValueError("need 1 <= k <= d_st(s, g) with g reachable")
    states, actions = rollout(mdp, policy, s, g, k)
    st = states[k]
    if d[s, st] > k:
        return TheoremCheck(False, st, f"surrogate at distance {d[s, st]} > k")
    for i in range(k):
        if d[states[i], st] != k - i:
            return TheoremCheck(False, st, f"prefix from step {i} not shortest")
        if policy[states[i], st] != actions[i]:
            return TheoremCheck(False, st, f"policy mismatch at step {i}")
    return TheoremCheck(True, st)


def surrogate_goal(mdp, s, g, k, d, policy) -> int:
    """Theorem-1 surrogate; the goal itself when it is already within k steps."""
    if d[s, g] <= k:
        return g
    states, _ = rollout(mdp, policy, s, g, k)
    return states[k]


def high_level_tables(mdp: TabularMDP, rewards: np.ndarray, k: int,
                      policy: np.ndarray):
    """k-step endpoint and accumulated reward for every (state, goal) pair
    under the tie-broken optimal low-level policy."""
    n = mdp.n_states
    endpoint = np.empty((n, n), dtype=np.int64)
    ksum = np.zeros((n, n))
    for g in range(n):
        cur = np.arange(n)
        total = np.zeros(n)
        for _ in range(k):
            a = policy[cur, g]
            total += rewards[cur, a]
            cur = mdp.next_state[cur, a]
        endpoint[:, g] = cur
        ksum[:, g] = total
    return endpoint, ksum


def check_theorem2(mdp: TabularMDP, rewards: np.ndarray, k: int, T: int,
                   gamma: float = 0.99,
                   d: np.ndarray | None = None) -> TheoremCheck:
    """Exact finite-horizon value iteration over the high-level MDP, then
    verify that replacing each optimal subgoal by its surrogate leaves the
    optimal Q value unchanged, from every start state.

    Requires reward table rewards[s, a] and a small, strongly connected MDP.
    """
    if d is None:
        d = shortest_transition_distance(mdp)
    policy = optimal_goal_policy(mdp, d)
    endpoint, ksum = high_level_tables(mdp, rewards, k, policy)

    n = mdp.n_states
    q = [None] * T          # q[t][s, g]
    v_next = np.zeros(n)    # terminal value is zero
    for t in range(T - 1, -1, -1):
        q[t] = ksum + gamma * v_next[endpoint]
        v_next = q[t].max(axis=1)

    for s0 in range(n):
        s = s0
        for t in range(T):
            g = int(np.argmax(q[t][s]))
            gt = surrogate_goal(mdp, s, g, k, d, policy)
            if d[s, gt] > k:
                return TheoremCheck(False, gt, f"t={t}: surrogate not adjacent")
            if q[t][s, gt] != q[t][s, g]:
                return TheoremCheck(
                    False, gt,
                    f"t={t}, s={s}: Q({gt})={q[t][s, gt]} != Q({g})={q[t][s, g]}")
            s = int(endpoint[s, g])
    return TheoremCheck(True)


def perfect_adjacency_matrix(d: np.ndarray, k: int, symmetric: bool = False) -> np.ndarray:
    """Binary matrix with entry 1 iff d[i, j] <= k (directional by default;
    symmetric=True also accepts the reverse direction, for reversible grids)."""
    m = (d <= k)
    if symmetric:
        m = m | m.T
    return m.astype(np.uint8)
