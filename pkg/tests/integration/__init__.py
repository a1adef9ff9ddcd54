"""Reduced-scale trend checks for the SIM secrecy simulator and trainer."""
