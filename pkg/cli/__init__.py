"""Command-line surface: request models, command handlers and report export."""
