"""Holometer uncertainty budget and Monte Carlo estimation campaigns."""
