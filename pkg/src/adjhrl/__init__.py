"""Desk-scale laboratory for goal-conditioned hierarchical RL with a k-step
adjacency constraint on subgoal generation."""

__version__ = "0.1.0"
