"""
Utils package for the CRW scattering engine
"""
