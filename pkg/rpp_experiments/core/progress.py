"""Console progress and reporting for RPP Experiments.

Renders epoch/job progress bars, status lines, result tables and summary panels
with the Rich library, falling back to plain text (tabulate) when Rich is not
available or output is redirected.
"""

from contextlib import contextmanager
from typing import Any, Iterator, List, Optional, Sequence

from tabulate import tabulate

try:
    from rich.console import Console
    from rich.panel import Panel
    from rich.progress import (
        BarColumn,
        MofNCompleteColumn,
        Progress,
        SpinnerColumn,
        TextColumn,
        TimeElapsedColumn,
        TimeRemainingColumn,
    )
    from rich.table import Table

    RICH_AVAILABLE = True
except ImportError:
    RICH_AVAILABLE = False
    Console = None


def _format_metrics(metrics: dict) -> str:
    parts = []
    for key, value in metrics.items():
        if isinstance(value, float):
            parts.append(f"{key}={value:.4g}")
        else:
            parts.append(f"{key}={value}")
    return " ".join(parts)


class ProgressTracker:
    """Progress bars and status output for training runs and experiment sweeps.

    Attributes:
        use_rich: Whether Rich rendering is active
        quiet: Whether all output is suppressed
        console: Rich console instance (None in plain mode)
    """

    def __init__(self, use_rich: bool = True, quiet: bool = False) -> None:
        self.use_rich = use_rich and RICH_AVAILABLE and not quiet
        self.quiet = quiet
        self.console = Console() if self.use_rich else None
        self._progress: Optional[Any] = None
        self._task_id: Optional[Any] = None
        self._description = ""

    @contextmanager
    def operation(self, description: str, total: int) -> Iterator["ProgressTracker"]:
        """Show a progress bar for the duration of the block.

        Args:
            description: Label shown next to the bar
            total: Number of units (epochs, jobs) in the operation
        """
        self._description = description
        if self.quiet:
            yield self
            return

        if self.use_rich:
            self._progress = Progress(
                SpinnerColumn(),
                TextColumn("[progress.description]{task.description}"),
                BarColumn(),
                MofNCompleteColumn(),
                TimeElapsedColumn(),
                TimeRemainingColumn(),
                console=self.console,
                transient=False,
            )
            self._progress.start()
            self._task_id = self._progress.add_task(description, total=total)
        else:
            print(f"⏳ {description} ({total} steps)...")

        try:
            yield self
        finally:
            if self._progress is not None:
                self._progress.stop()
            self._progress = None
            self._task_id = None

    def advance(self, steps: int = 1, **metrics: Any) -> None:
        """Advance the active bar, showing the latest metrics in its label."""
        if self.quiet or self._progress is None:
            return
        description = self._description
        if metrics:
            description = f"{self._description} {_format_metrics(metrics)}"
        self._progress.update(self._task_id, advance=steps, description=description)

    def print_status(self, message: str, style: Optional[str] = None) -> None:
        """Print a status line with optional Rich styling (e.g. 'green', 'bold red')."""
        if self.quiet:
            return
        if self.use_rich:
            self.console.print(message, style=style)
        else:
            print(message)

    def print_table(
        self,
        rows: Sequence[Sequence[Any]],
        headers: List[str],
        title: Optional[str] = None,
    ) -> None:
        """Print a result table (Rich table, or a tabulate grid in plain mode)."""
        if self.quiet:
            return

        if self.use_rich:
            table = Table(title=title)
            for header in headers:
                table.add_column(header)
            for row in rows:
                table.add_row(*[_cell(value) for value in row])
            self.console.print(table)
        else:
            if title:
                print(f"\n{title}")
            print(tabulate(rows, headers=headers, tablefmt="grid", floatfmt=".4g"))

    def print_panel(self, content: str, title: Optional[str] = None) -> None:
        """Print a boxed summary (plain heading in fallback mode)."""
        if self.quiet:
            return
        if self.use_rich:
            self.console.print(Panel(content, title=title))
        else:
            if title:
                print(f"\n=== {title} ===")
            print(content)


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)
