"""Infrastructure utilities (errors, logging, JSON, run identity)."""
