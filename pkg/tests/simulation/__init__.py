"""
Simulation Tests
Synthetic bilingual training experiments
"""
