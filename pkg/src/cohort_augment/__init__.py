"""Desk-scale toolkit for classifying impaired vs. healthy picture-description
speech: linguistic features over CHAT transcripts and constituency trees,
ANOVA feature selection, ADASYN oversampling, four from-scratch classifiers,
and participant-grouped evaluation with table and figure reports."""

__version__ = "0.1.0"
