"""Non-stationary polar codes and a resistive crossbar read-channel simulator."""

__version__ = "0.1.0"
