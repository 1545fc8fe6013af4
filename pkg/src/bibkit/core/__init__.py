"""Exceptions, configuration models and file formats shared by every bibkit module."""
