"""Bengali-style two-line license plate recognition toolkit."""
