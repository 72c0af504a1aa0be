"""Analysis engines: landscapes, plateaux, hierarchy, Kawasaki lattice gas, finite-beta verification."""
