"""Evolves black-box optimization algorithms with an LLM inside an elitist loop.

The public surface is organized by module:

- :mod:`benchevo.problems` -- problem registry and seeded instances
- :mod:`benchevo.evaluation` -- anytime performance (ECDF/AUC) and run traces
- :mod:`benchevo.sandbox` -- subprocess harness for candidate algorithms
- :mod:`benchevo.prompts` -- prompt assembly and response parsing
- :mod:`benchevo.llm` -- chat client with retry and record/replay
- :mod:`benchevo.search` -- the elitist search loop and run persistence
- :mod:`benchevo.analysis` -- code similarity, relevance aggregation, report tables
- :mod:`benchevo.cli` -- command line entry points
"""

__version__ = "0.1.0"
