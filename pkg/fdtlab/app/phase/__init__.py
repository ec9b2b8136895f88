"""Phase runner: load, build, validate_deltas, checks, report."""
