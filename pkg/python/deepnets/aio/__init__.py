"""Async front-end for learning-rate sweeps."""

import asyncio
from concurrent.futures import Executor
from typing import List, Optional

from deepnets.config import ExperimentConfig
from deepnets.harness import (
    SweepOutcome,
    SweepRow,
    run_sweep_cell,
    summarize_sweep,
    sweep_cells,
)

__all__ = ["SweepRunner", "run_rate_sweep"]


class SweepRunner:
    """Dispatches sweep cells to an executor from a running event loop.

    :param ExperimentConfig cfg: The sweep configuration
    :param executor: Executor for the cells; ``None`` uses the loop's default
    """

    def __init__(self, cfg: ExperimentConfig, executor: Optional[Executor] = None):
        self._cfg = cfg
        self._executor = executor

    async def __aenter__(self):
        return self

    async def __aexit__(self, exc_type, exc_val, exc_tb):
        return False

    async def run_cell(self, m_index: int, m: int, trial: int) -> SweepRow:
        """Run one ``(m, trial)`` cell.

        :rtype: SweepRow
        """
        cfg = self._cfg
        return await asyncio.get_running_loop().run_in_executor(
            self._executor, lambda: run_sweep_cell(cfg, m_index, m, trial)
        )

    async def run_rate_sweep(self) -> List[SweepRow]:
        """Run every cell concurrently; rows are sorted by ``(m, trial)``.

        :raises InvalidArgumentError: On an empty ``m_grid``
        """
        cells = sweep_cells(self._cfg)
        rows = await asyncio.gather(*(self.run_cell(*cell) for cell in cells))
        return sorted(rows, key=lambda row: (row.m, row.trial))

    async def run(self) -> SweepOutcome:
        """The sweep plus its rate fit and summary.

        :rtype: SweepOutcome
        """
        rows = await self.run_rate_sweep()
        return summarize_sweep(rows, self._cfg)


async def run_rate_sweep(
    cfg: ExperimentConfig, executor: Optional[Executor] = None
) -> List[SweepRow]:
    """Async counterpart of :func:`deepnets.harness.run_rate_sweep`."""
    async with SweepRunner(cfg, executor) as runner:
        return await runner.run_rate_sweep()
