"""Model persistence, benchmark reports and the command line front end."""
from .modelfile import (FieldCountError, ModelFormatError, ModelVersionError, NonFiniteValueError,
                        dumps_model, load_model, loads_model, save_model)
from .report import BenchReport, BenchRow, run_bench
from .cli import main
