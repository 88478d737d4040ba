"""
Analysis package for the clock synchronization simulator.
Contains dynamic-graph connectivity analysis, trace invariant checks and bound tables.
"""
