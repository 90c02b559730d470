"""Image-text relation toolkit: taxonomy, corpus synthesis, antonym
augmentation, trainable class predictors, evaluation, and an annotation
service."""

__version__ = "0.1.0"
