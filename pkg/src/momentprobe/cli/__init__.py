"""Configuration-driven experiment runner."""
