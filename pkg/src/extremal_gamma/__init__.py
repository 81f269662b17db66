"""Maxima of triangular gamma arrays and exchangeable Dirichlet vectors."""
