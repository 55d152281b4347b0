"""fairtox: fairness-aware toxic comment classification at desk scale.

Ingests labeled comment corpora, trains four classifier families over
TF-IDF or embedding features, rebalances training data across the four
toxicity-by-identity categories (with synthetic template expansion), and
quantifies identity-driven bias through subgroup FPR/FNR gaps, AUC, and F1.
"""

__version__ = "0.1.0"
