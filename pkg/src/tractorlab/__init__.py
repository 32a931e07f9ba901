"""Exact-arithmetic laboratory for ambient and tractor holonomy."""
