"""routeforge: synthesis-route data generation, retrosynthesis response
validation, building-block retrieval, and route reconstruction."""

__version__ = "0.1.0"
