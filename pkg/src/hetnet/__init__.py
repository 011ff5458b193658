"""Controllability analysis of heterogeneous networks of MIMO LTI node systems."""
