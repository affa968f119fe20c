"""Discrete-event simulator of 802.15.4 / 802.11b coexistence in the 2.4 GHz band."""

__version__ = "0.1.0"
