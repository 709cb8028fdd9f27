"""Monte Carlo statistics over seeded protocol runs."""
from fibanyon.stats import format_summary, simulate, summarize

traces = simulate(200, seed=7)
print(format_summary(summarize(traces)))
