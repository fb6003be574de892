import json
import math
import os
from fractions import Fraction
from typing import Any, Dict, List, Optional, Union

import pandas as pd

import core.custom_logger as custom_logger

SCHEMA_VERSION = "1"


class CSVFileParser:
    """
    Reads and writes the per-function sweep tables.
    """

    @staticmethod
    def read_csv(
        file_name: str,
        delimiter: str = ',',
        **kwargs
    ) -> pd.DataFrame:
        """
        Read a CSV file into a pandas DataFrame.

        Args:
            file_name: Path to the CSV file
            delimiter: Column separator character
            **kwargs: Additional arguments to pass to pd.read_csv

        Returns:
            A pandas DataFrame with the CSV data, or an empty DataFrame if the file cannot be read
        """
        try:
            if not os.path.exists(file_name):
                raise FileNotFoundError(f"File not found: {file_name}")
            # Reproducer specs and schema versions stay strings.
            dtype = {'schema_version': str, 'spec': str}
            dtype.update(kwargs.pop('dtype', {}))
            return pd.read_csv(file_name, sep=delimiter, encoding='utf-8', dtype=dtype, **kwargs)

        except Exception as e:
            if isinstance(e, FileNotFoundError):
                custom_logger.customLogger().error(f"File not found: {file_name}")
            elif isinstance(e, pd.errors.EmptyDataError):
                custom_logger.customLogger().error(f"Empty file: {file_name}")
            elif isinstance(e, pd.errors.ParserError):
                custom_logger.customLogger().error(f"Parser error in file: {file_name}")
            else:
                custom_logger.customLogger().error(f"Error reading CSV file: {str(e)}")
            return pd.DataFrame()

    @staticmethod
    def write_to_csv(
        data_frame: pd.DataFrame,
        file_name: str,
        index: bool = False,
        **kwargs
    ) -> bool:
        """
        Write a DataFrame to CSV, creating the parent directory if needed.

        Args:
            data_frame: The DataFrame to write
            file_name: Path for the output file
            index: Whether to include the DataFrame index in the output
            **kwargs: Additional arguments to pass to to_csv

        Returns:
            True if successful, False otherwise
        """
        try:
            directory = os.path.dirname(file_name)
            if directory and not os.path.exists(directory):
                os.makedirs(directory)
            data_frame.to_csv(file_name, index=index, **kwargs)
            return True

        except Exception as e:
            custom_logger.customLogger().error(f"Error writing to file {file_name}: {str(e)}")
            return False


class JsonReportParser:
    """
    JSON codec for reports: exact rationals become {"num", "den_pow2"} (or {"num", "den"}
    when the denominator is not a power of two), reals become decimal strings.
    """

    @staticmethod
    def rational_to_json(value: Fraction) -> Dict[str, int]:
        value = Fraction(value)
        den = value.denominator
        if den & (den - 1) == 0:
            return {'num': value.numerator, 'den_pow2': den.bit_length() - 1}
        return {'num': value.numerator, 'den': den}

    @staticmethod
    def rational_from_json(data: Dict[str, int]) -> Fraction:
        if 'den_pow2' in data:
            return Fraction(int(data['num']), 1 << int(data['den_pow2']))
        return Fraction(int(data['num']), int(data['den']))

    @staticmethod
    def real_to_json(value: Optional[float]) -> Optional[str]:
        if value is None:
            return None
        value = float(value)
        if math.isnan(value):
            return None
        return repr(value)

    @staticmethod
    def real_from_json(text: Optional[str]) -> Optional[float]:
        return None if text is None else float(text)

    @staticmethod
    def write_json(document: Dict[str, Any], file_name: str) -> None:
        """
        Write a report document, stamping it with the schema version.

        Raises:
            OSError: If the file cannot be written
        """
        payload = {'schema_version': SCHEMA_VERSION, **document}
        try:
            directory = os.path.dirname(file_name)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(file_name, 'w', encoding='utf-8') as f:
                json.dump(payload, f, indent=2, sort_keys=False)
        except OSError as e:
            custom_logger.customLogger().error(f"Error writing JSON report {file_name}: {e}")
            raise

    @staticmethod
    def read_json(file_name: str) -> Dict[str, Any]:
        with open(file_name, 'r', encoding='utf-8') as f:
            return json.load(f)

    @staticmethod
    def dumps(document: Dict[str, Any]) -> str:
        return json.dumps({'schema_version': SCHEMA_VERSION, **document}, indent=2)


def rows_to_frame(rows: Union[List[Dict[str, Any]], Dict[str, Any]], columns: List[str]) -> pd.DataFrame:
    """Build a DataFrame (from row dicts or a column dict) with a fixed column order and the schema version first."""
    frame = pd.DataFrame(rows, columns=columns)
    frame.insert(0, 'schema_version', SCHEMA_VERSION)
    return frame
