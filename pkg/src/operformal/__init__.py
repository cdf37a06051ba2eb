"""Exact formality checks for minimal A∞ and L∞ algebras."""
