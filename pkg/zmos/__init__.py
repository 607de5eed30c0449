"""
Top-level ZMOS package: zero-shot model selection for speech enhancement.
"""
