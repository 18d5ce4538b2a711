"""Output writers for experiment tables.

Provides CSV, JSON, and Excel output with generation metadata.
"""

from .csv_output import create_experiment_csvs, write_table_csv
from .excel_output import create_excel_output
from .json_output import create_json_output

__all__ = [
    "write_table_csv",
    "create_experiment_csvs",
    "create_json_output",
    "create_excel_output",
]
