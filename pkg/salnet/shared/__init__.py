"""Shared infrastructure: exceptions, logging, utilities."""
