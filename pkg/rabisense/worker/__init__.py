from rabisense.worker.monte_carlo import MonteCarloSummary, MonteCarloWorker, run_monte_carlo

__all__ = ["MonteCarloSummary", "MonteCarloWorker", "run_monte_carlo"]
