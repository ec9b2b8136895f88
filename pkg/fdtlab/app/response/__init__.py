"""Response functions and the linear-response limit."""
