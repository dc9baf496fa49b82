"""JSON schemas for inputs and command outputs."""
