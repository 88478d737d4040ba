"""
Clock package: the node automata run by the engine (MinMax and the self-adaptive-period clocks).
"""
