"""
Shared domain records and errors
"""
