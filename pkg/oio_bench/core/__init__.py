"""Settings, exceptions and random streams."""
