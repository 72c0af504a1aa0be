"""
Test suite for metastable-hierarchy.

Test Categories:
- Unit tests: landscapes, plateaux, hierarchy levels, verification numerics
- Integration tests: the command-line interface end to end
- Property tests: seeded random landscapes against brute-force oracles
- Slow tests: Kawasaki enumeration and large Monte Carlo runs
"""
