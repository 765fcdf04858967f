"""Benchmark scoring, the reward HTTP service and the command line interface."""
from .bench import BenchReport, CategoryScore, score_run
