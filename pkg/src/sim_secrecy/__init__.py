"""SIM Secrecy - SIM-assisted secure uplink simulator and PPO-BOP trainer."""

__version__ = "0.1.0"
