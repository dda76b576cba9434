"""Static security analysis toolkit for EVM bytecode."""

__version__ = "0.1.0"
