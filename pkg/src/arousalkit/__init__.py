"""Multi-modal ECG/EDA representation learning and arousal classification toolkit."""

__version__ = "0.1.0"
