"""Fermi-Gas Tracer Laboratory - Main Package"""

__version__ = '0.1.0'
__author__ = 'Alpha Wizards'
