"""Fairness evaluation toolkit for ranked recommendation outputs.

The toolkit computes per-user effectiveness base scores from ranked runs,
aggregates them into group and individual fairness scores with a shared
battery of inequality measures, decomposes unfairness into between- and
within-group components, and quantifies agreement between fairness measures.
"""

__version__ = "0.1.0"
