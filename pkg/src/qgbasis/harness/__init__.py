"""Experiment drivers, configuration, fitting and output for the CLI."""
