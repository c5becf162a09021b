"""Zero-knowledge permissioning of smart-contract functions with verifiable credentials."""

__version__ = "0.1.0"
