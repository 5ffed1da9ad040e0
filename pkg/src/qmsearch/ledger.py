from dataclasses import dataclass


@dataclass
class QueryLedger:
    """Counters for complexity comparisons.

    ``oracle_queries`` counts Grover oracle applications, ``comparisons``
    counts classical value comparisons. Both only ever grow.
    """

    oracle_queries: int = 0
    comparisons: int = 0
