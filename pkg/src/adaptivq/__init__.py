"""Adaptive question personalization engine.

Predicts each student's chance of solving the next exercise from their attempt
history, maps that prediction to a beginner/intermediate/advanced question
variant by population percentile, and measures the learning-outcome effect
with a three-arm experiment harness (simulated or live over HTTP).
"""

__version__ = "0.1.0"
