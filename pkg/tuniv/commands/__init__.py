"""Command groups; tuniv.main wires them into one application."""
