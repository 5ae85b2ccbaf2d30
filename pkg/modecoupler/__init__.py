"""Effective non-Hermitian model of resonator modes that share one
transmission line.
"""
