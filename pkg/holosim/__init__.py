"""holosim: uncertainty budgets for coupled interferometers fed by quantum light."""

__version__ = "1.0.0"
