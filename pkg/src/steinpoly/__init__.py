"""steinpoly: exact kernel for apartment classes and polylog symbols on tori."""

__version__ = "0.1.0"
