"""Waveform capture, replay-artifact encoding and open-loop replay."""

__version__ = "0.1.0"
