"""Command-line interface, DSL parser and printer."""
