"""Trust-weighted RPL with sinkhole detection, quarantine and encrypted transport."""

__version__ = "0.1.0"
