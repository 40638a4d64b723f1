"""
Scattering engine packages for coupled-resonator waveguide nodes
"""
