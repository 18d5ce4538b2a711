"""Excel output: one formatted sheet per experiment table plus a statistics sheet."""

import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

import pandas as pd

from .. import __version__

HEADER_COLOR = "366092"
MAX_COLUMN_WIDTH = 50


def _sheet_title(name: str) -> str:
    # Excel limits sheet names to 31 characters
    return name.replace("_", " ").title()[:31]


def create_excel_output(
    tables: Dict[str, pd.DataFrame],
    output_dir: str,
    name: str,
    metadata: Optional[Dict[str, Any]] = None,
    quiet: bool = False,
) -> bool:
    """Write ``<output_dir>/<name>.xlsx`` with one sheet per table.

    Args:
        tables: Tables by name
        output_dir: Output directory (created if missing)
        name: Workbook file stem
        metadata: Key/value pairs listed on the Statistics sheet
        quiet: Suppress progress output if True

    Returns:
        True if the workbook was written, False if openpyxl is missing or
        writing failed
    """
    output_path = Path(output_dir) / f"{name}.xlsx"
    logger = logging.getLogger(__name__)

    try:
        from openpyxl import Workbook
        from openpyxl.styles import Font, PatternFill

        if not quiet:
            print("  📝 Creating Excel output...")

        wb = Workbook()
        wb.remove(wb.active)
        header_font = Font(bold=True, color="FFFFFF")
        header_fill = PatternFill(
            start_color=HEADER_COLOR, end_color=HEADER_COLOR, fill_type="solid"
        )

        for table in sorted(tables):
            frame = tables[table]
            if table == "prior_grid_surface":
                frame = frame.reset_index()
            ws = wb.create_sheet(_sheet_title(table))
            ws.append([str(c) for c in frame.columns])
            for row in frame.itertuples(index=False):
                ws.append([_cell(value) for value in row])
            for cell in ws[1]:
                cell.font = header_font
                cell.fill = header_fill

        ws_stats = wb.create_sheet("Statistics")
        stats_rows = [
            ["Generated At", datetime.now().strftime("%Y-%m-%d %H:%M:%S")],
            ["Generator", f"RPP Experiments v{__version__}"],
            [""],
            ["Run Settings", ""],
        ]
        for key, value in sorted((metadata or {}).items()):
            stats_rows.append([key, _cell(value)])
        for row in stats_rows:
            ws_stats.append(row)
        for row in ws_stats.iter_rows():
            if row[0].value == "Run Settings":
                row[0].font = Font(bold=True, size=12)

        for ws in wb.worksheets:
            for column in ws.columns:
                lengths = [len(str(c.value)) for c in column if c.value]
                max_length = max(lengths, default=0)
                width = min(max_length + 2, MAX_COLUMN_WIDTH)
                ws.column_dimensions[column[0].column_letter].width = width

        output_path.parent.mkdir(parents=True, exist_ok=True)
        wb.save(output_path)
        file_size = output_path.stat().st_size

        if not quiet:
            print(
                f"    ✓ Created Excel output ({file_size:,} bytes, "
                f"{len(wb.worksheets)} sheets)"
            )
        logger.info(f"Created Excel output: {output_path} ({file_size:,} bytes)")
        return True

    except ImportError as e:
        if not quiet:
            print(f"  ⚠️  Excel output requires openpyxl: {e}")
        logger.warning(f"Excel output dependencies missing: {e}")
        return False
    except OSError as e:
        if not quiet:
            print(f"  ❌ Failed to create Excel output: {e}")
        logger.error(f"Failed to create Excel output: {e}")
        return False


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float) and value != value:
        return ""
    if isinstance(value, (list, tuple, dict)):
        return str(value)
    return value
