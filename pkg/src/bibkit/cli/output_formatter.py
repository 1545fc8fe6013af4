"""
Output Formatter for the bibkit CLI

Renders command results either as rich tables and panels for people or as
JSON documents for scripts (``--machine``).
"""

import json
import math
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Union

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from ..core.exceptions import BIBError
from ..core.models import Settings

Renderable = Union[str, Dict[str, Any], Table, Panel, List[Any]]


class OutputMode(Enum):
    """Output formatting modes."""
    USER = "user"
    MACHINE = "machine"


def _clean(value: Any) -> Any:
    """Replace non-finite floats by None so the JSON stays strict."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def _fmt(value: Any, digits: int = 6) -> str:
    if isinstance(value, float):
        return "n/a" if not math.isfinite(value) else f"{value:.{digits}g}"
    return str(value)


class OutputFormatter:
    """Formats command results for the selected interface mode."""

    def __init__(self, mode: OutputMode = OutputMode.USER, console: Optional[Console] = None):
        self.mode = mode
        self.console = console or Console()

    @property
    def machine(self) -> bool:
        return self.mode == OutputMode.MACHINE

    def _stamp(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        payload = _clean(payload)
        payload["timestamp"] = datetime.now().isoformat()
        return payload

    def format_summary(self, title: str, values: Mapping[str, Any]) -> Renderable:
        """Key/value summary of a command run."""
        if self.machine:
            return self._stamp({"command": title, **dict(values)})
        table = Table(title=title, show_header=False)
        table.add_column("Field", style="cyan")
        table.add_column("Value", style="green")
        for key, value in values.items():
            if isinstance(value, (dict, list)):
                value = json.dumps(_clean(value))
            table.add_row(key, _fmt(value))
        return table

    def format_kernel(self, kernel: List[List[float]], thetas: Mapping[str, float]) -> Renderable:
        if self.machine:
            return self._stamp({"kernel": kernel, "thetas": dict(thetas)})
        table = Table(title="Switch kernel")
        table.add_column("from \\ to", style="cyan")
        for k in range(len(kernel)):
            table.add_column(str(k), style="green", justify="right")
        table.add_column("theta", style="yellow", justify="right")
        for k, row in enumerate(kernel):
            table.add_row(str(k), *(f"{p:.4f}" for p in row), _fmt(thetas.get(str(k), math.nan), 4))
        return table

    def format_events(self, counts: Mapping[str, int], steps: int) -> Renderable:
        if self.machine:
            return self._stamp({"steps": steps, "events": dict(counts)})
        table = Table(title=f"Events over {steps} steps")
        table.add_column("Event", style="cyan")
        table.add_column("Count", style="green", justify="right")
        table.add_column("Share", style="blue", justify="right")
        for tag, count in counts.items():
            table.add_row(tag, str(count), f"{count / steps:.2%}" if steps else "n/a")
        return table

    def format_dwell(self, record: Dict[str, Any]) -> Renderable:
        if self.machine:
            return self._stamp({"dwell": record})
        table = Table(title=f"Dwell times ({record['switches']} switches)")
        table.add_column("Percept", style="cyan")
        table.add_column("Samples", style="green", justify="right")
        table.add_column("Mean", style="blue", justify="right")
        table.add_column("Median", style="blue", justify="right")
        table.add_column("Std. error", style="magenta", justify="right")
        for percept, count in record["counts"].items():
            table.add_row(
                percept,
                str(count),
                _fmt(record["means"].get(percept, math.nan), 5),
                _fmt(record["medians"].get(percept, math.nan), 5),
                _fmt(record["stderrs"].get(percept, math.nan), 3),
            )
        tail = record.get("tail")
        if not tail:
            return table
        return [table, self._tail_panel(tail)]

    def format_diffusion(self, record: Dict[str, Any]) -> Renderable:
        if self.machine:
            return self._stamp({"diffusion": record})
        lo, hi = record["fit_range"]
        text = (
            f"[bold]Straight runs[/bold]: {record['runs']}\n"
            f"[bold]MSD exponent[/bold]: {record['msd_exponent']:.4f} (lags {lo}-{hi})"
        )
        panels: List[Any] = [Panel(text, title="Diffusion")]
        if record.get("tail"):
            panels.append(self._tail_panel(record["tail"]))
        return panels

    def _tail_panel(self, tail: Mapping[str, Any]) -> Panel:
        text = (
            f"alpha = {_fmt(tail['alpha'], 4)} "
            f"[{_fmt(tail['ci_low'], 4)}, {_fmt(tail['ci_high'], 4)}]\n"
            f"xmin = {tail['xmin']}, tail samples = {tail['n_tail']}, KS = {_fmt(tail['ks'], 3)}"
        )
        return Panel(text, title="Power-law tail")

    def format_settings(self, settings: Settings) -> Renderable:
        if self.machine:
            return self._stamp({"settings": settings.model_dump(mode="json")})
        tables = []
        for section, values in settings.model_dump(mode="json").items():
            table = Table(title=f"Section: {section}")
            table.add_column("Key", style="cyan")
            table.add_column("Value", style="green")
            for key, value in values.items():
                table.add_row(key, json.dumps(value) if isinstance(value, (dict, list)) else str(value))
            tables.append(table)
        return tables

    def format_error(self, error: Exception, context: Optional[str] = None) -> Renderable:
        """Format error information."""
        if self.machine:
            result: Dict[str, Any] = {
                "error": True,
                "error_type": type(error).__name__,
                "error_message": getattr(error, "message", str(error)),
            }
            if isinstance(error, BIBError):
                result["error_code"] = error.error_code
                result["metadata"] = error.metadata
            if context:
                result["context"] = context
            return self._stamp(result)
        error_text = f"[red]Error: {getattr(error, 'message', error)}[/red]"
        if isinstance(error, BIBError) and error.error_code:
            error_text += f"\n[red]Code: {error.error_code}[/red]"
        if context:
            error_text += f"\n[dim]Context: {context}[/dim]"
        return error_text

    def output(self, data: Any) -> None:
        """Output data in the appropriate format."""
        if self.machine:
            print(json.dumps(data, indent=2, ensure_ascii=False, default=str))
        elif isinstance(data, list):
            for item in data:
                self.console.print(item)
                self.console.print()
        elif data:
            self.console.print(data)
