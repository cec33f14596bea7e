"""
Utility modules for the feature-network toolkit.
"""
