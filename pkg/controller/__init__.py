"""
Controller module for the CRW scattering engine
"""
