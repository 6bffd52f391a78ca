"""Resonating valence bond ladder states."""
