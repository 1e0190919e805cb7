from adaptsgd.logger.run_logger import RunLogger
from adaptsgd.logger.verbose import VerbosePrinter

__all__ = ["RunLogger", "VerbosePrinter"]
