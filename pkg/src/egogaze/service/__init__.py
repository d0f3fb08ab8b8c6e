"""HTTP service wrapping the streaming engine."""
