"""Multi-view fusion learning for high-dimensional low-sample-size data.

Feature-set partitioning builds views from one wide feature matrix; early,
mid and late fusion variants of LS-SVM, MLP and spectral clustering models
then consume those views.
"""

from .errors import MidfuseError

__version__ = "0.1.0"
__all__ = ["MidfuseError", "__version__"]
