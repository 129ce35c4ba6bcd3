"""Goal-conditional gridworld navigation with word-vector guided transfer."""

__version__ = "0.1.0"
